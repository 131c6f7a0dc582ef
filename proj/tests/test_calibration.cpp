#include <catch2/catch.hpp>

#include <random>

#include "cogsense/calibration.hpp"

using namespace cogsense;

namespace {

struct SampleSpec {
    double contrast_mean, contrast_std;
    double confidence_mean, confidence_std;
    double loc_dev_mean, loc_dev_std;
};

/// Synthetic labeled probes: contrast/confidence/loc_dev drawn from
/// gaussians, the remaining probes constant (so they fail calibration and
/// exercise the skip path).
std::vector<LabeledSample> make_samples(int n_tp, int n_fp, const SampleSpec& tp,
                                        const SampleSpec& fp, std::uint64_t seed = 1,
                                        bool fp_loc_defined = true) {
    std::mt19937_64 rng(seed);
    auto draw = [&rng](double mean, double std) {
        std::normal_distribution<double> d(mean, std);
        return d;
    };
    std::vector<LabeledSample> out;
    auto emit = [&](int n, const SampleSpec& s, Label label, bool loc_defined) {
        auto contrast = draw(s.contrast_mean, s.contrast_std);
        auto confidence = draw(s.confidence_mean, s.confidence_std);
        auto loc = draw(s.loc_dev_mean, s.loc_dev_std);
        for (int i = 0; i < n; ++i) {
            LabeledSample ls;
            ls.label = label;
            ls.probes.size_px2 = 400.0;  // constant: never calibrates
            ls.probes.aspect = 1.0;
            ls.probes.confidence = std::clamp(confidence(rng), 0.0, 1.0);
            ls.probes.contrast = std::clamp(contrast(rng), 0.0, 1.0);
            ls.probes.entropy_bits = 3.0;
            ls.probes.loc_dev_px = loc_defined ? std::optional(std::abs(loc(rng))) : std::nullopt;
            ls.probes.bbox_dev_rel = std::nullopt;
            ls.probes.id_consistency = label == Label::true_positive ? 1.0 : 0.1;
            out.push_back(ls);
        }
    };
    emit(n_tp, tp, Label::true_positive, true);
    emit(n_fp, fp, Label::false_positive, fp_loc_defined);
    return out;
}

const SampleSpec kTpSpec{0.5, 0.05, 0.9, 0.03, 1.0, 0.5};
const SampleSpec kFpSpec{0.15, 0.05, 0.25, 0.08, 20.0, 4.0};

const AxiomFormula* find_axiom(const CalibrationResult& r, ProbeId probe) {
    for (const auto& f : r.axioms) {
        if (f.spec.probe == probe) {
            return &f;
        }
    }
    return nullptr;
}

}  // namespace

TEST_CASE("separable contrast distributions calibrate to the gaussian midpoint") {
    const auto samples = make_samples(2000, 2000, kTpSpec, kFpSpec, 7);
    const auto result = calibrate(samples, CalibrationConfig{10, 30, 2.0});

    const AxiomFormula* contrast = find_axiom(result, ProbeId::contrast);
    REQUIRE(contrast != nullptr);
    // equal variances: the density crossing is the midpoint of the means
    CHECK(contrast->spec.lower == Approx(0.325).margin(0.01));
    CHECK(std::isinf(contrast->spec.upper));
    CHECK(contrast->comparison == Comparison::lower_only);
    CHECK(contrast->spec.window == 10);
    CHECK(contrast->spec.p_tp > 0.99);
    CHECK(contrast->spec.p_tp < 1.0);
    CHECK(contrast->spec.epsilon == Approx(1.0 - contrast->spec.p_tp));

    // targets come from the TP side
    CHECK(result.targets.contrast == Approx(0.5).margin(0.01));

    // constant probes were skipped with a recorded reason
    bool size_skipped = false;
    for (const auto& s : result.skipped) {
        size_skipped = size_skipped || s.find("size_px2") != std::string::npos;
    }
    CHECK(size_skipped);
}

TEST_CASE("deviation probes get one-sided bounds anchored at zero") {
    const auto samples = make_samples(2000, 2000, kTpSpec, kFpSpec, 11);
    const auto result = calibrate(samples, CalibrationConfig{10, 30, 2.0});

    const AxiomFormula* loc = find_axiom(result, ProbeId::loc_dev_px);
    REQUIRE(loc != nullptr);
    CHECK(loc->spec.lower == 0.0);
    CHECK(std::isfinite(loc->spec.upper));
    // the crossing sits between the TP bulk (~1) and the FP bulk (~20)
    CHECK(loc->spec.upper > 2.0);
    CHECK(loc->spec.upper < 18.0);
    CHECK(loc->comparison == Comparison::two_sided);
    // printed form keeps the explicit zero
    CHECK(print_axiom(*loc).find("0 <= loc_dev_px") != std::string::npos);
}

TEST_CASE("probes with no FP samples are skipped") {
    const auto samples = make_samples(1000, 1000, kTpSpec, kFpSpec, 3, /*fp_loc_defined=*/false);
    const auto result = calibrate(samples, CalibrationConfig{10, 30, 2.0});
    CHECK(find_axiom(result, ProbeId::loc_dev_px) == nullptr);
    bool reason_found = false;
    for (const auto& s : result.skipped) {
        reason_found = reason_found || (s.find("loc_dev_px") != std::string::npos &&
                                        s.find("insufficient") != std::string::npos);
    }
    CHECK(reason_found);
}

TEST_CASE("a dataset where nothing calibrates is refused") {
    // all probes constant on both sides: zero variance everywhere
    std::vector<LabeledSample> samples;
    for (int i = 0; i < 100; ++i) {
        LabeledSample s;
        s.label = i % 2 == 0 ? Label::true_positive : Label::false_positive;
        s.probes.size_px2 = 100.0;
        s.probes.aspect = 1.0;
        s.probes.confidence = 0.5;
        s.probes.contrast = 0.5;
        s.probes.entropy_bits = 3.0;
        s.probes.id_consistency = 0.5;
        samples.push_back(s);
    }
    CHECK_THROWS_WITH(calibrate(samples), Catch::Contains("no probe calibrated"));
}

TEST_CASE("build_axiom_set exposes the bare specs") {
    const auto samples = make_samples(500, 500, kTpSpec, kFpSpec, 5);
    const auto specs = build_axiom_set(samples, CalibrationConfig{8, 30, 2.0});
    REQUIRE_FALSE(specs.empty());
    for (const auto& s : specs) {
        CHECK(s.window == 8);
        CHECK(s.p_tp > 0.0);
        CHECK(s.p_tp < 1.0);
        CHECK(s.lower < s.upper);
    }
}

TEST_CASE("serialized axiom sets reload to identical formulas") {
    const auto samples = make_samples(1500, 1500, kTpSpec, kFpSpec, 13);
    const auto result = calibrate(samples, CalibrationConfig{10, 30, 2.0});

    const std::string text = print_axiom_set(result.axioms);
    const auto reloaded = parse_axiom_set(text);
    REQUIRE(reloaded.size() == result.axioms.size());
    for (std::size_t i = 0; i < reloaded.size(); ++i) {
        CHECK(reloaded[i] == result.axioms[i]);
    }
    // and a second serialize is byte-identical
    CHECK(print_axiom_set(reloaded) == text);
}
