#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "simulate.hpp"
#include "spherestat/errors.hpp"
#include "spherestat/geostat.hpp"
#include "spherestat/sampling.hpp"

using namespace spherestat;
using spherestat::testing::TempDir;

namespace {

const auto kNested = healpix::Scheme::nested;

SkyFrame frameWith(std::int64_t nside, const std::function<double(std::int64_t, const UnitVector&)>& f) {
    const auto r = healpix::Resolution::fromNside(nside);
    std::vector<double> v;
    for (std::int64_t p = 1; p <= r.npix(); ++p) v.push_back(f(p, healpix::pixelCenter({p, kNested, r})));
    return SkyFrame::fullSky(r, kNested, {{"I", v}});
}

std::vector<UnitVector> randomPoints(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<UnitVector> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 2.0 * rng.uniform() - 1.0;
        const double phi = kTwoPi * rng.uniform();
        const double s = std::sqrt(1.0 - z * z);
        pts.push_back({s * std::cos(phi), s * std::sin(phi), z});
    }
    return pts;
}

EmpiricalCurve modelCurve(const CovarianceModel& m, double maxDist, int bins) {
    EmpiricalCurve c;
    c.kind = CurveKind::variogram;
    c.maxDist = maxDist;
    c.bins = bins;
    for (int b = 0; b <= bins; ++b) {
        const double h = b == 0 ? 0.0 : (b - 0.5) * maxDist / bins;
        c.lags.push_back(h);
        c.values.push_back(variogramModel(h, m));
        c.counts.push_back(100);
    }
    return c;
}

} // namespace

TEST_CASE("empirical curves match a brute-force pair loop") {
    const auto pts = randomPoints(300, 5);
    SplitMix64 rng(6);
    std::vector<double> y;
    for (std::size_t i = 0; i < pts.size(); ++i) y.push_back(rng.normal() + pts[i].z);
    const double maxDist = 1.2;
    const int bins = 7;
    const EmpiricalCurve cov = empiricalCovariance(pts, y, maxDist, bins);
    const EmpiricalCurve var = empiricalVariogram(pts, y, maxDist, bins);
    REQUIRE(cov.values.size() == 8);

    const double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    std::vector<double> cs(8, 0.0), vs(8, 0.0), ns(8, 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        cs[0] += (y[i] - ybar) * (y[i] - ybar);
        ns[0] += 1;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = std::acos(std::clamp(pts[i].dot(pts[j]), -1.0, 1.0));
            if (d > maxDist) continue;
            const int b = std::max(1, static_cast<int>(std::ceil(d / (maxDist / bins))));
            cs[static_cast<std::size_t>(b)] += (y[i] - ybar) * (y[j] - ybar);
            vs[static_cast<std::size_t>(b)] += 0.5 * (y[i] - y[j]) * (y[i] - y[j]);
            ns[static_cast<std::size_t>(b)] += 1;
        }
    }
    for (std::size_t b = 0; b < 8; ++b) {
        CAPTURE(b);
        CHECK(cov.counts[b] == static_cast<std::int64_t>(ns[b]));
        CHECK(cov.values[b] == doctest::Approx(cs[b] / ns[b]).epsilon(1e-10));
        if (b > 0) CHECK(var.values[b] == doctest::Approx(vs[b] / ns[b]).epsilon(1e-10));
        if (b > 0) CHECK(cov.lags[b] == doctest::Approx((b - 0.5) * maxDist / bins));
    }
    CHECK(var.values[0] == 0.0);
    CHECK(cov.lags[0] == 0.0);
}

TEST_CASE("frame curves have bins + 1 entries") {
    const SkyFrame f = frameWith(8, [](std::int64_t p, const UnitVector&) { return std::sin(static_cast<double>(p)); });
    const EmpiricalCurve c = empiricalCovariance(f, "I", kPi, 10);
    CHECK(c.values.size() == 11);
    CHECK(c.lags.size() == 11);
    CHECK(c.counts[0] == 768);
    const std::int64_t pairs = std::accumulate(c.counts.begin() + 1, c.counts.end(), std::int64_t{0});
    CHECK(pairs == 768 * 767 / 2);
}

TEST_CASE("constant field has a zero curve") {
    const SkyFrame f = frameWith(4, [](std::int64_t, const UnitVector&) { return 3.5; });
    for (const auto& c : {empiricalCovariance(f, "I", kPi, 6), empiricalVariogram(f, "I", kPi, 6)})
        for (std::size_t b = 0; b < c.values.size(); ++b)
            if (c.defined(b)) CHECK(c.values[b] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("antipodal pair") {
    const std::vector<UnitVector> pts{{0, 0, 1}, {0, 0, -1}};
    const double c = 1.7;
    const EmpiricalCurve cov = empiricalCovariance(pts, {c, -c}, kPi, 4);
    const EmpiricalCurve var = empiricalVariogram(pts, {c, -c}, kPi, 4);
    CHECK(cov.values[0] == doctest::Approx(c * c));
    CHECK(cov.values[4] == doctest::Approx(-c * c));
    CHECK(var.values[4] == doctest::Approx(2 * c * c));
    CHECK_FALSE(var.defined(1));
    CHECK(std::isnan(var.values[1]));
}

TEST_CASE("white noise has a flat variogram") {
    SplitMix64 rng(17);
    const SkyFrame f = frameWith(16, [&](std::int64_t, const UnitVector&) { return rng.normal(); });
    const EmpiricalCurve v = empiricalVariogram(f, "I", kPi, 10);
    const EmpiricalCurve c = empiricalCovariance(f, "I", kPi, 10);
    for (int b = 1; b <= 10; ++b) {
        CHECK(v.values[static_cast<std::size_t>(b)] == doctest::Approx(1.0).epsilon(0.05));
        CHECK(std::abs(c.values[static_cast<std::size_t>(b)]) < 0.02);
    }
    CHECK(c.values[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pair budget subsampling") {
    const auto pts = randomPoints(2000, 9);
    std::vector<double> y;
    for (const auto& p : pts) y.push_back(p.z);
    const EmpiricalCurve full = empiricalVariogram(pts, y, kPi, 6);
    const EmpiricalCurve sub = empiricalVariogram(pts, y, kPi, 6, {200000, 4});
    CHECK_FALSE(full.subsampled);
    CHECK(sub.subsampled);
    for (int b = 1; b <= 6; ++b) {
        const auto k = static_cast<std::size_t>(b);
        CHECK(sub.values[k] == doctest::Approx(full.values[k]).epsilon(0.05));
        CHECK(static_cast<double>(sub.counts[k]) == doctest::Approx(static_cast<double>(full.counts[k])).epsilon(0.05));
    }
    const EmpiricalCurve again = empiricalVariogram(pts, y, kPi, 6, {200000, 4});
    CHECK(again.values == sub.values);
}

TEST_CASE("curve argument checks") {
    const std::vector<UnitVector> pts{{0, 0, 1}, {1, 0, 0}};
    CHECK_THROWS_AS(empiricalVariogram(pts, {1.0}, 1.0, 3), DomainError);
    CHECK_THROWS_AS(empiricalVariogram(pts, {1.0, 2.0}, 0.0, 3), DomainError);
    CHECK_THROWS_AS(empiricalVariogram(pts, {1.0, 2.0}, 4.0, 3), DomainError);
    CHECK_THROWS_AS(empiricalVariogram(pts, {1.0, 2.0}, 1.0, 0), DomainError);
    CHECK_THROWS_AS(empiricalVariogram(pts, {1.0, std::numeric_limits<double>::quiet_NaN()}, 1.0, 3), DomainError);
}

TEST_CASE("fitting recovers generating parameters") {
    CovarianceModel truth;
    truth.family = CovFamily::askey;
    truth.sigmaSq = 1.3;
    truth.psi = 1.1;
    truth.kappa = 3.5;
    const FitResult fit = fitVariogram(modelCurve(truth, kPi, 20), CovFamily::askey);
    CHECK(fit.converged);
    CHECK(fit.model.sigmaSq == doctest::Approx(truth.sigmaSq).epsilon(1e-4));
    CHECK(fit.model.psi == doctest::Approx(truth.psi).epsilon(1e-4));
    CHECK(fit.model.kappa == doctest::Approx(truth.kappa).epsilon(1e-4));
    CHECK(fit.model.nugget == 0.0);

    CovarianceModel exp;
    exp.family = CovFamily::exponential;
    exp.sigmaSq = 0.8;
    exp.psi = 0.3;
    exp.nugget = 0.1;
    FitOptions opt;
    opt.fixNugget = false;
    opt.weights = FitWeights::npairs;
    const FitResult fe = fitVariogram(modelCurve(exp, 2.0, 25), CovFamily::exponential, opt);
    CHECK(fe.model.sigmaSq == doctest::Approx(0.8).epsilon(1e-4));
    CHECK(fe.model.psi == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(fe.model.nugget == doctest::Approx(0.1).epsilon(1e-3));

    const FitResult same = fitVariogram(modelCurve(exp, 2.0, 25), CovFamily::exponential, opt);
    CHECK(same.model.psi == fe.model.psi);
}

TEST_CASE("fitting edge cases") {
    CovarianceModel zero;
    zero.sigmaSq = 0.0;
    const FitResult z = fitVariogram(modelCurve(zero, kPi, 10), CovFamily::exponential);
    CHECK(z.model.sigmaSq == 0.0);
    CHECK(z.converged);

    CovarianceModel m;
    CHECK_THROWS_AS(fitVariogram(modelCurve(m, kPi, 2), CovFamily::gencauchy), ParameterError);
    CHECK(parseWeights("cressie") == FitWeights::cressie);
    CHECK(weightsName(FitWeights::npairs) == "npairs");
    CHECK_THROWS_AS(parseWeights("ols"), ParameterError);

    const CovarianceModel start = defaultFitStart(modelCurve(m, kPi, 9), CovFamily::askey);
    CHECK(start.kappa == 3.0);
    CHECK(start.psi == doctest::Approx(kPi / 2));
}

TEST_CASE("covariance from a power spectrum") {
    const std::vector<double> grid{-1.0, -0.3, 0.0, 0.45, 1.0};
    const auto c0 = covFromPowerSpectrum({{0}, {2.0}, SpectrumConvention::Cl}, 0, grid);
    for (double v : c0.values) CHECK(v == doctest::Approx(2.0 / (4 * kPi)));

    const auto c1 = covFromPowerSpectrum({{1}, {2.0}, SpectrumConvention::Cl}, 1, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(c1.values[i] == doctest::Approx(6.0 * grid[i] / (4 * kPi)));
    CHECK(c1.notes.size() == 1);

    PowerSpectrum ps;
    for (int l = 0; l <= 40; ++l) {
        ps.ell.push_back(l);
        ps.values.push_back(1.0 / (1.0 + l * l));
    }
    const auto cs = covFromPowerSpectrum(ps, 40, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = 0.0;
        for (unsigned l = 0; l <= 40; ++l) s += (2.0 * l + 1.0) * ps.values[l] * std::legendre(l, grid[i]);
        CHECK(cs.values[i] == doctest::Approx(s / (4 * kPi)).epsilon(1e-12));
    }
    CHECK(cs.notes.empty());

    const auto trunc = covFromPowerSpectrum(ps, 100, grid);
    CHECK(trunc.lMaxUsed == 40);
    CHECK(trunc.notes.size() == 1);
    CHECK(trunc.values == cs.values);

    PowerSpectrum gap{{0, 1, 2, 4}, {1, 1, 1, 1}, SpectrumConvention::Cl};
    CHECK_THROWS_AS(covFromPowerSpectrum(gap, 4, grid), GapError);
    CHECK_NOTHROW(covFromPowerSpectrum(gap, 2, grid));

    PowerSpectrum dl{{2, 3}, {6.0, 12.0}, SpectrumConvention::Dl};
    const auto cd = covFromPowerSpectrum(dl, 3, {1.0});
    CHECK(cd.values[0] == doctest::Approx((5.0 * kTwoPi + 7.0 * kTwoPi) / (4 * kPi)));
    CHECK(cd.notes.size() == 2);
    CHECK_THROWS_AS(covFromPowerSpectrum(dl, 3, {1.5}), DomainError);
}

TEST_CASE("power spectrum files") {
    TempDir dir("ps");
    const auto cl = dir.file("cl.csv");
    std::ofstream(cl) << "l,C_l\n0,1\n1,0.5\n2,0.25\n";
    const PowerSpectrum a = readPowerSpectrum(cl);
    CHECK(a.convention == SpectrumConvention::Cl);
    CHECK(a.ell == std::vector<int>{0, 1, 2});
    const auto dlPath = dir.file("dl.csv");
    std::ofstream(dlPath) << "ell,D_l\n2,100\n3,120\n";
    CHECK(readPowerSpectrum(dlPath).convention == SpectrumConvention::Dl);
    CHECK(readPowerSpectrum(dlPath, SpectrumConvention::Cl).convention == SpectrumConvention::Cl);
    const auto bad = dir.file("bad.csv");
    std::ofstream(bad) << "l,C_l\n2,1\n2.5,1\n";
    CHECK_THROWS_AS(readPowerSpectrum(bad), ParseError);
    const auto three = dir.file("three.csv");
    std::ofstream(three) << "l,C_l,x\n2,1,1\n";
    CHECK_THROWS_AS(readPowerSpectrum(three), SchemaError);
}

TEST_CASE("entropy") {
    SplitMix64 rng(3);
    std::vector<double> v;
    for (int i = 0; i < 1000; ++i) v.push_back(rng.normal());
    const int bins = static_cast<int>(std::ceil(1 + std::log2(1000.0)));
    const double mn = *std::min_element(v.begin(), v.end());
    const double mx = *std::max_element(v.begin(), v.end());
    std::vector<int> h(static_cast<std::size_t>(bins), 0);
    for (double x : v) {
        int b = static_cast<int>((x - mn) / (mx - mn) * bins);
        if (b == bins) b = bins - 1;
        ++h[static_cast<std::size_t>(b)];
    }
    double e = 0;
    for (int c : h)
        if (c > 0) e -= c / 1000.0 * std::log2(c / 1000.0);
    CHECK(entropy(v) == doctest::Approx(e).epsilon(1e-12));
    CHECK(entropy(v) <= std::log2(bins) + 1e-12);

    std::vector<double> uniform;
    for (int i = 0; i < 16; ++i) uniform.push_back(i);
    CHECK(entropy(uniform, 16) == doctest::Approx(4.0));
    CHECK(entropy({2.0, 2.0, 2.0}) == 0.0);
    CHECK(entropy({1.0, std::numeric_limits<double>::quiet_NaN(), 2.0}, 2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(entropy(std::vector<double>{}), DomainError);
}

TEST_CASE("first Minkowski functional") {
    const SkyFrame f = frameWith(2, [](std::int64_t p, const UnitVector&) { return static_cast<double>(p); });
    CHECK(firstMinkowski(f, "I", 40.0) == doctest::Approx(8 * kPi / 12));
    CHECK(firstMinkowski(f, "I", 100.0) == 0.0);
    CHECK(firstMinkowski(f, "I", 0.0) == doctest::Approx(kFourPi));
}

TEST_CASE("Renyi function") {
    const auto uniform = renyiFromMasses(std::vector<double>(48, 2.0), 1.5, 5.0, 8, 1);
    REQUIRE(uniform.size() == 8);
    for (const auto& p : uniform) CHECK(p.t == doctest::Approx(std::log2(48.0)));

    const auto single = renyiFromMasses({0.0, 3.0, 0.0}, 2.0, 4.0, 3, 2);
    for (const auto& p : single) CHECK(p.t == doctest::Approx(0.0));

    CHECK(renyiFromMasses({1, 2, 3}, 0.5, 1.5, 3, 1).size() == 2);
    CHECK_THROWS_AS(renyiFromMasses({0, 0}, 2, 3, 2, 1), DomainError);

    SplitMix64 rng(8);
    std::vector<double> m;
    for (int i = 0; i < 192; ++i) m.push_back(std::exp(2 * rng.normal()));
    const auto curve = renyiFromMasses(m, 1.01, 10.0, 20, 2);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].t <= curve[i - 1].t + 1e-12);

    const SkyFrame f = frameWith(4, [](std::int64_t p, const UnitVector&) { return p % 2 ? 1.0 : 3.0; });
    const auto fr = renyiFunction(f, "I", 2.0, 3.0, 2, 1);
    CHECK(fr[0].t == doctest::Approx(std::log2(48.0)));
    CHECK_THROWS_AS(renyiFunction(f, "I", 2.0, 3.0, 2, 3), DomainError);
}

TEST_CASE("Q statistic") {
    CHECK(*qStatistic({{1.0, 1.0}, {5.0, 5.0}}) == doctest::Approx(1.0));
    CHECK(*qStatistic({{1.0, 5.0}, {1.0, 5.0}}) == doctest::Approx(0.0));
    CHECK_FALSE(qStatistic({{2.0}, {2.0}}).has_value());
    CHECK_THROWS_AS(qStatistic({{1.0}, {}}), StratificationError);

    const WindowSet north{{Window::disc({0, 0}, kPi / 2)}};
    const SkyFrame f = frameWith(8, [&](std::int64_t, const UnitVector& c) { return north.contains(c) ? 1.0 : -1.0; });
    const WindowSet south{{Window::disc({0, 0}, kPi / 2, true)}};
    CHECK(*qStatistic(f, "I", {north, south}) == doctest::Approx(1.0));
    const WindowSet cap{{Window::disc({0, 0}, 2.0)}};
    CHECK_THROWS_AS(qStatistic(f, "I", {north, cap}), StratificationError);
}

TEST_CASE("QQ pairs") {
    std::vector<double> a, b;
    for (int i = 0; i < 101; ++i) {
        a.push_back(i);
        b.push_back(i + 10.0);
    }
    const auto qq = qqPairs(a, b, 11);
    REQUIRE(qq.size() == 11);
    for (std::size_t k = 0; k < qq.size(); ++k) {
        CHECK(qq[k].p == doctest::Approx(k / 10.0));
        CHECK(qq[k].a == doctest::Approx(10.0 * static_cast<double>(k)));
        CHECK(qq[k].b - qq[k].a == doctest::Approx(10.0));
    }
    const auto same = qqPairs(a, a, 5);
    for (const auto& p : same) CHECK(p.a == p.b);
    CHECK_THROWS_AS(qqPairs(a, {}, 5), DomainError);
}

TEST_CASE("angular marginals") {
    const SkyFrame f = frameWith(16, [](std::int64_t, const UnitVector& c) { return c.z; });
    const AngularMarginals m = angularMarginals(f, "I", 18, 12);
    REQUIRE(m.theta.size() == 18);
    for (const auto& b : m.theta) {
        REQUIRE(b.mean.has_value());
        CHECK(std::abs(*b.mean - std::cos(b.center)) < 0.02);
    }
    std::int64_t total = 0;
    for (const auto& b : m.phi) {
        total += b.count;
        CHECK(std::abs(*b.mean) < 1e-9);
    }
    CHECK(total == 3072);
}
