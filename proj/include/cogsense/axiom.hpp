#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cogsense/probes.hpp"

namespace cogsense {

/// A calibrated probabilistic constraint: over a sliding window of
/// `window` frames, the fraction of defined probe values inside
/// [lower, upper] must be at least p_tp.
struct AxiomSpec {
    ProbeId probe = ProbeId::contrast;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double p_tp = 0.9;       // in (0,1)
    int window = 10;         // frames
    double epsilon = 0.1;    // tolerance; defaults to 1 - p_tp

    bool operator==(const AxiomSpec&) const = default;
};

enum class Comparison { two_sided, upper_only, lower_only };

inline std::string_view comparison_name(Comparison c) {
    switch (c) {
        case Comparison::two_sided: return "two_sided";
        case Comparison::upper_only: return "upper_only";
        case Comparison::lower_only: return "lower_only";
    }
    return "?";
}

/// A named axiom as written in the DSL. Equality ignores source_text, so a
/// reparse of the printed form compares equal to the original.
struct AxiomFormula {
    std::string name;
    AxiomSpec spec;
    Comparison comparison = Comparison::two_sided;
    std::string source_text;

    bool operator==(const AxiomFormula& o) const {
        return name == o.name && spec == o.spec && comparison == o.comparison;
    }
};

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error("axiom parse error at " + std::to_string(line_) + ":" +
                             std::to_string(column_) + ": " + msg),
          line(line_),
          column(column_) {}
};

namespace detail {

/// Shortest decimal form that reparses to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

class AxiomScanner {
   public:
    AxiomScanner(std::string_view text, int line) : text_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
            ++pos_;
        }
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
    }

    void expect(std::string_view token) {
        skip_ws();
        if (text_.substr(pos_, token.size()) != token) {
            fail("expected '" + std::string(token) + "'");
        }
        pos_ += token.size();
    }

    bool try_consume(std::string_view token) {
        skip_ws();
        if (text_.substr(pos_, token.size()) == token) {
            pos_ += token.size();
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
        auto tail = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
        if (pos_ >= text_.size() || !head(text_[pos_])) {
            fail("expected identifier");
        }
        while (pos_ < text_.size() && tail(text_[pos_])) {
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    double number() {
        skip_ws();
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        double v = 0.0;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr == first) {
            fail("expected number");
        }
        pos_ += static_cast<std::size_t>(res.ptr - first);
        return v;
    }

    int integer() {
        skip_ws();
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        int v = 0;
        auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc{} || res.ptr == first) {
            fail("expected integer");
        }
        pos_ += static_cast<std::size_t>(res.ptr - first);
        return v;
    }

    /// Peek: does a number start here? (distinguishes "0.2 <= probe" from
    /// "probe <= 0.2")
    bool peek_number() {
        skip_ws();
        if (pos_ >= text_.size()) {
            return false;
        }
        const char c = text_[pos_];
        return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
    }

    std::size_t position() const { return pos_; }

   private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_;
};

}  // namespace detail

/// Parse one axiom line:
///   axiom NAME : Pr( pred , window=INT ) >= FLOAT
///   pred := FLOAT <= PROBE <= FLOAT | PROBE <= FLOAT | PROBE >= FLOAT
/// Whitespace-insensitive. Throws ParseError with line/column on bad input.
inline AxiomFormula parse_axiom(std::string_view text, int line_number = 1) {
    detail::AxiomScanner s(text, line_number);
    AxiomFormula f;
    f.source_text = std::string(text);

    s.expect("axiom");
    f.name = s.identifier();
    s.expect(":");
    s.expect("Pr");
    s.expect("(");

    constexpr double inf = std::numeric_limits<double>::infinity();
    if (s.peek_number()) {
        // FLOAT <= PROBE <= FLOAT
        f.spec.lower = s.number();
        s.expect("<=");
        const std::string probe = s.identifier();
        const auto id = probe_from_name(probe);
        if (!id) {
            s.fail("unknown probe '" + probe + "'");
        }
        f.spec.probe = *id;
        s.expect("<=");
        f.spec.upper = s.number();
        f.comparison = Comparison::two_sided;
        if (!(f.spec.lower < f.spec.upper)) {
            s.fail("bound ordering violation: lower " + detail::format_double(f.spec.lower) +
                   " must be < upper " + detail::format_double(f.spec.upper));
        }
    } else {
        const std::string probe = s.identifier();
        const auto id = probe_from_name(probe);
        if (!id) {
            s.fail("unknown probe '" + probe + "'");
        }
        f.spec.probe = *id;
        if (s.try_consume("<=")) {
            f.spec.upper = s.number();
            f.spec.lower = -inf;
            f.comparison = Comparison::upper_only;
        } else if (s.try_consume(">=")) {
            f.spec.lower = s.number();
            f.spec.upper = inf;
            f.comparison = Comparison::lower_only;
        } else {
            s.fail("expected '<=' or '>=' after probe name");
        }
    }

    s.expect(",");
    s.expect("window");
    s.expect("=");
    f.spec.window = s.integer();
    if (f.spec.window < 1) {
        s.fail("window must be >= 1");
    }
    s.expect(")");
    s.expect(">=");
    f.spec.p_tp = s.number();
    if (!(f.spec.p_tp > 0.0 && f.spec.p_tp < 1.0)) {
        s.fail("threshold must lie in (0,1)");
    }
    f.spec.epsilon = 1.0 - f.spec.p_tp;
    if (!s.at_end()) {
        s.fail("trailing input after axiom");
    }
    return f;
}

/// Canonical printed form; parse(print(f)) == f.
inline std::string print_axiom(const AxiomFormula& f) {
    std::ostringstream os;
    os << "axiom " << f.name << ": Pr(";
    switch (f.comparison) {
        case Comparison::two_sided:
            os << detail::format_double(f.spec.lower) << " <= " << probe_name(f.spec.probe)
               << " <= " << detail::format_double(f.spec.upper);
            break;
        case Comparison::upper_only:
            os << probe_name(f.spec.probe) << " <= " << detail::format_double(f.spec.upper);
            break;
        case Comparison::lower_only:
            os << probe_name(f.spec.probe) << " >= " << detail::format_double(f.spec.lower);
            break;
    }
    os << ", window=" << f.spec.window << ") >= " << detail::format_double(f.spec.p_tp);
    return os.str();
}

/// Parse a whole axiom file: one axiom per line, '#' starts a comment,
/// blank lines ignored.
inline std::vector<AxiomFormula> parse_axiom_set(std::string_view contents) {
    std::vector<AxiomFormula> out;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
        const std::size_t eol = contents.find('\n', pos);
        std::string_view line = contents.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                                   : eol - pos);
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        bool blank = true;
        for (char c : line) {
            if (c != ' ' && c != '\t' && c != '\r') {
                blank = false;
                break;
            }
        }
        if (!blank) {
            if (line.ends_with('\r')) {
                line.remove_suffix(1);
            }
            out.push_back(parse_axiom(line, line_no));
        }
        if (eol == std::string_view::npos) {
            break;
        }
        pos = eol + 1;
    }
    return out;
}

inline std::string print_axiom_set(const std::vector<AxiomFormula>& axioms) {
    std::string out;
    for (const AxiomFormula& f : axioms) {
        out += print_axiom(f);
        out += '\n';
    }
    return out;
}

/// Build a formula from a bare spec: the comparison form follows from which
/// bounds are finite (a finite lower of exactly 0 on a non-negative
/// deviation probe is kept two-sided so the printed form shows it).
inline AxiomFormula make_formula(std::string name, const AxiomSpec& spec) {
    AxiomFormula f;
    f.name = std::move(name);
    f.spec = spec;
    const bool lo_inf = std::isinf(spec.lower) && spec.lower < 0;
    const bool hi_inf = std::isinf(spec.upper) && spec.upper > 0;
    if (lo_inf && !hi_inf) {
        f.comparison = Comparison::upper_only;
    } else if (!lo_inf && hi_inf) {
        f.comparison = Comparison::lower_only;
    } else if (!lo_inf && !hi_inf) {
        f.comparison = Comparison::two_sided;
    } else {
        throw std::invalid_argument("make_formula: axiom with no finite bound is vacuous");
    }
    f.source_text = print_axiom(f);
    return f;
}

}  // namespace cogsense
