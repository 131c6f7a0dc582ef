#include <catch2/catch.hpp>

#include <random>

#include "cogsense/distribution.hpp"

using namespace cogsense;

namespace {

/// Standard normal CDF via erf; the independent check against the
/// Simpson-quadrature mass() used by the implementation.
double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

/// Histogram distribution whose densities follow an arbitrary pdf on a
/// fine grid (used to feed non-gaussian shapes into intersect_bounds).
template <typename Pdf>
ProbeDistribution tabulated(Pdf&& pdf, double lo, double hi, int bins) {
    HistogramModel h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    h.densities.resize(static_cast<std::size_t>(bins));
    const double w = (hi - lo) / bins;
    double mass = 0.0;
    for (int i = 0; i <= bins; ++i) {
        h.edges[static_cast<std::size_t>(i)] = lo + w * i;
    }
    for (int i = 0; i < bins; ++i) {
        const double mid = lo + w * (i + 0.5);
        h.densities[static_cast<std::size_t>(i)] = pdf(mid);
        mass += pdf(mid) * w;
    }
    for (auto& d : h.densities) {
        d /= mass;
    }
    ProbeDistribution out;
    out.model = std::move(h);
    out.sample_count = 1000;
    out.support_lo = lo;
    out.support_hi = hi;
    return out;
}

}  // namespace

TEST_CASE("gaussian fit uses the population convention") {
    const std::vector<double> two = {-1.0, 1.0};
    const auto d = fit_distribution(two, ModelKind::gaussian, 2);
    const auto& g = std::get<GaussianModel>(d.model);
    CHECK(g.mean == Approx(0.0).margin(1e-15));
    CHECK(g.stddev == Approx(1.0));
    CHECK(d.sample_count == 2);
    CHECK(d.support_lo == -1.0);
    CHECK(d.support_hi == 1.0);
}

TEST_CASE("gaussian fit recovers a seeded generator") {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gen(5.0, 2.0);
    std::vector<double> xs(10000);
    for (auto& x : xs) {
        x = gen(rng);
    }
    const auto d = fit_distribution(xs, ModelKind::gaussian);
    const auto& g = std::get<GaussianModel>(d.model);
    CHECK(g.mean == Approx(5.0).margin(0.1));
    CHECK(g.stddev == Approx(2.0).margin(0.1));
}

TEST_CASE("degenerate and undersized sample sets are rejected") {
    const std::vector<double> constant(50, 3.25);
    CHECK_THROWS_WITH(fit_distribution(constant, ModelKind::gaussian),
                      Catch::Contains("zero variance"));
    const std::vector<double> few = {1.0, 2.0};
    CHECK_THROWS_WITH(fit_distribution(few, ModelKind::gaussian, 30), Catch::Contains("too few"));
    const std::vector<double> with_nan = {1.0, 2.0, std::nan("")};
    CHECK_THROWS_WITH(fit_distribution(with_nan, ModelKind::gaussian, 3),
                      Catch::Contains("non-finite"));
}

TEST_CASE("histogram fit integrates to one and covers the sample range") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> gen(2.0, 8.0);
    std::vector<double> xs(5000);
    for (auto& x : xs) {
        x = gen(rng);
    }
    const auto d = fit_distribution(xs, ModelKind::histogram);
    const auto& h = std::get<HistogramModel>(d.model);
    REQUIRE(h.edges.size() == h.densities.size() + 1);
    double mass = 0.0;
    for (std::size_t i = 0; i < h.densities.size(); ++i) {
        CHECK(h.densities[i] >= 0.0);
        mass += h.densities[i] * (h.edges[i + 1] - h.edges[i]);
    }
    CHECK(mass == Approx(1.0));
    CHECK(d.mass(d.support_lo, d.support_hi) == Approx(1.0));
    // a uniform sample should fit a roughly flat density near 1/6
    CHECK(d.pdf(5.0) == Approx(1.0 / 6.0).epsilon(0.25));
    CHECK(d.pdf(1.0) == 0.0);
    CHECK(d.pdf(9.0) == 0.0);
}

TEST_CASE("gaussian mass agrees with the erf oracle") {
    const auto d = gaussian_distribution(1.0, 2.0);
    CHECK(d.mass(-std::numeric_limits<double>::infinity(), 1.0) == Approx(0.5).margin(1e-9));
    CHECK(d.mass(-1.0, 3.0) == Approx(phi(1.0) - phi(-1.0)).margin(1e-9));
    CHECK(d.mass(1.0, std::numeric_limits<double>::infinity()) == Approx(0.5).margin(1e-9));
}

TEST_CASE("equal-variance gaussians cross at the midpoint of the means") {
    const auto tp = gaussian_distribution(0.0, 1.0);
    const auto fp = gaussian_distribution(3.0, 1.0);
    const auto r = intersect_bounds(tp, fp);
    CHECK(r.upper == Approx(1.5).margin(1e-6));
    CHECK(std::isinf(r.lower));
    CHECK(r.lower < 0.0);
    CHECK(r.p_tp == Approx(phi(1.5)).margin(1e-3));
}

TEST_CASE("mirror case: FP below TP yields a lower crossing only") {
    const auto tp = gaussian_distribution(0.0, 1.0);
    const auto fp = gaussian_distribution(-3.0, 1.0);
    const auto r = intersect_bounds(tp, fp);
    CHECK(r.lower == Approx(-1.5).margin(1e-6));
    CHECK(std::isinf(r.upper));
    CHECK(r.p_tp == Approx(1.0 - phi(-1.5)).margin(1e-3));
}

TEST_CASE("symmetric gaussian mixture brackets the TP mode") {
    // FP = 0.5 N(-3,1) + 0.5 N(3,1) against TP = N(0,1).
    // Analytic crossings: cosh(3x) = e^{4.5}, x = arccosh(e^{4.5})/3.
    const double expected = std::acosh(std::exp(4.5)) / 3.0;  // about 1.7309
    auto normal_pdf = [](double x, double m) {
        return std::exp(-0.5 * (x - m) * (x - m)) / std::sqrt(2.0 * M_PI);
    };
    const auto tp = gaussian_distribution(0.0, 1.0);
    const auto fp = tabulated(
        [&](double x) { return 0.5 * normal_pdf(x, -3.0) + 0.5 * normal_pdf(x, 3.0); }, -8.0, 8.0,
        2000);
    const auto r = intersect_bounds(tp, fp);
    CHECK(r.lower == Approx(-expected).margin(0.02));
    CHECK(r.upper == Approx(expected).margin(0.02));
    CHECK(r.p_tp == Approx(phi(expected) - phi(-expected)).margin(5e-3));
}

TEST_CASE("identical densities are uninformative") {
    const auto tp = gaussian_distribution(0.0, 1.0);
    const auto fp = gaussian_distribution(0.0, 1.0);
    CHECK_THROWS_WITH(intersect_bounds(tp, fp), Catch::Contains("uninformative"));
}

TEST_CASE("p_tp grows as the FP distribution moves away") {
    const auto tp = gaussian_distribution(0.0, 1.0);
    double prev = 0.0;
    for (double mean : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        const auto r = intersect_bounds(tp, gaussian_distribution(mean, 1.0));
        CHECK(r.p_tp > prev);
        prev = r.p_tp;
    }
    CHECK(prev > 0.97);
}

TEST_CASE("mismatched probe tags are rejected") {
    auto tp = gaussian_distribution(0.0, 1.0);
    auto fp = gaussian_distribution(3.0, 1.0);
    tp.probe = ProbeId::contrast;
    fp.probe = ProbeId::entropy_bits;
    CHECK_THROWS_WITH(intersect_bounds(tp, fp), Catch::Contains("different probes"));
}
