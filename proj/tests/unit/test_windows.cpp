#include <doctest.h>

#include <cmath>

#include "spherestat/errors.hpp"
#include "spherestat/healpix.hpp"
#include "spherestat/sampling.hpp"
#include "spherestat/window_json.hpp"
#include "spherestat/windows.hpp"

using namespace spherestat;

namespace {

UnitVector randomUnit(SplitMix64& rng) {
    const double z = 2 * rng.uniform() - 1;
    const double phi = kTwoPi * rng.uniform();
    const double s = std::sqrt(1 - z * z);
    return {s * std::cos(phi), s * std::sin(phi), z};
}

// Monte Carlo area of a region (oracle independent of the analytic formulas).
double monteCarloArea(const WindowSet& ws, int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    int hits = 0;
    for (int i = 0; i < n; ++i)
        if (ws.contains(randomUnit(rng))) ++hits;
    return kFourPi * hits / n;
}

} // namespace

TEST_CASE("disc areas") {
    const Window d = Window::disc({kPi / 2, 0}, 1.0);
    CHECK(d.area() == doctest::Approx(2.88836579751364).epsilon(1e-12));
    CHECK(d.typeName() == "disc");
    const Window c = Window::disc({kPi / 2, 0}, 0.5, true);
    CHECK(c.area() == doctest::Approx(11.797199165886196).epsilon(1e-12));
    CHECK(c.typeName() == "minus.disc");
    CHECK(d.complemented().area() == doctest::Approx(kFourPi - d.area()));
    CHECK_THROWS_AS(Window::disc({kPi / 2, 0}, 0.0), GeometryError);
    CHECK_THROWS_AS(Window::disc({kPi / 2, 0}, kPi), GeometryError);
}

TEST_CASE("discs are closed and complements flip membership") {
    const Window d = Window::disc({0, 0}, 0.5);
    CHECK(d.contains(toUnitVector({0.5, 1.0})));
    CHECK_FALSE(d.contains(toUnitVector({0.5 + 1e-9, 1.0})));
    const Window c = d.complemented();
    CHECK_FALSE(c.contains(toUnitVector({0.5, 1.0})));
    CHECK(c.contains(toUnitVector({0.5 + 1e-9, 1.0})));
    CHECK(c.contains(toUnitVector({2.0, 1.0})));
    CHECK_FALSE(c.contains(toUnitVector({0.1, 1.0})));
}

TEST_CASE("octant triangle") {
    const Window t = Window::polygon({{0, 0}, {kPi / 2, 0}, {kPi / 2, kPi / 2}});
    CHECK(t.area() == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(t.typeName() == "polygon");
    CHECK(t.contains(toUnitVector({0.5, 0.5})));
    CHECK_FALSE(t.contains(toUnitVector({0.5, 2.0})));
    // Clockwise input describes the same region.
    const Window cw = Window::polygon({{kPi / 2, kPi / 2}, {kPi / 2, 0}, {0, 0}});
    CHECK(cw.area() == doctest::Approx(kPi / 2));
    CHECK(Window::polygon({{0, 0}, {kPi / 2, 0}, {kPi / 2, kPi / 2}}, true).area() ==
          doctest::Approx(3.5 * kPi));
}

TEST_CASE("spherical triangle area formula") {
    CHECK(sphericalTriangleArea({1, 0, 0}, {0, 1, 0}, {0, 0, 1}) == doctest::Approx(kPi / 2));
    CHECK(sphericalTriangleArea({1, 0, 0}, {1, 0, 0}, {0, 0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("non-convex polygon area and triangulation") {
    // An L-shaped hexagon near the equator.
    const std::vector<SphericalPoint> v{{1.3, 0.0}, {1.3, 0.6}, {1.5, 0.6}, {1.5, 0.3}, {1.8, 0.3}, {1.8, 0.0}};
    const Window w = Window::polygon(v);
    const auto tris = triangulate(w);
    CHECK(tris.size() == 4);
    double sum = 0.0;
    for (const auto& t : tris) sum += t.area();
    CHECK(sum == doctest::Approx(w.area()).epsilon(1e-12));
    const double mc = monteCarloArea({{w}}, 400000, 5);
    CHECK(std::abs(mc - w.area()) < 4.0 * std::sqrt(w.area() * kFourPi / 400000));
    CHECK(w.contains(toUnitVector({1.4, 0.1})));
    CHECK_FALSE(w.contains(toUnitVector({1.7, 0.5}))); // the notch
    CHECK_THROWS_AS(Window::polygon(v, false, true), GeometryError);
}

TEST_CASE("degenerate and self-intersecting polygons") {
    CHECK_THROWS_AS(Window::polygon({{1, 0}, {1, 1}}), GeometryError);
    CHECK_THROWS_AS(Window::polygon({{kPi / 2, 0.0}, {kPi / 2, 0.5}, {kPi / 2, 1.0}}), DegenerateRegionError);
    // Bow tie.
    CHECK_THROWS_AS(Window::polygon({{1.0, 0.0}, {1.5, 0.5}, {1.0, 0.5}, {1.5, 0.0}}), GeometryError);
}

TEST_CASE("window set semantics and the annulus") {
    const SphericalPoint c{kPi / 2, 0};
    const WindowSet annulus{{Window::disc(c, 1.0), Window::disc(c, 0.5, true)}};
    const double analytic = kTwoPi * (std::cos(0.5) - std::cos(1.0));
    CHECK(analytic == doctest::Approx(2.1191943490406633).epsilon(1e-12));
    CHECK(annulus.contains(toUnitVector({kPi / 2, 0.75})));
    CHECK_FALSE(annulus.contains(toUnitVector({kPi / 2, 0.25})));
    CHECK_FALSE(annulus.contains(toUnitVector({kPi / 2, 1.25})));
    CHECK(std::abs(monteCarloArea(annulus, 400000, 9) - analytic) < 0.03);

    // Pixel-quantised coverage approaches the analytic area.
    const auto r = healpix::Resolution::fromNside(256);
    std::int64_t inside = 0;
    for (std::int64_t p = 1; p <= r.npix(); ++p)
        if (annulus.contains(healpix::pixelCenter({p, healpix::Scheme::nested, r}))) ++inside;
    CHECK(static_cast<double>(inside) * healpix::pixelArea(r) == doctest::Approx(analytic).epsilon(5e-3));

    const WindowSet onlyComplement{{Window::disc(c, 0.5, true)}};
    CHECK(onlyComplement.contains(toUnitVector({0.0, 0.0})));
    const WindowSet union2{{Window::disc({0, 0}, 0.3), Window::disc({kPi, 0}, 0.3)}};
    CHECK(union2.contains({0, 0, 1}));
    CHECK(union2.contains({0, 0, -1}));
    CHECK_FALSE(union2.contains({1, 0, 0}));
}

TEST_CASE("extremal distances") {
    const std::vector<UnitVector> pts{{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}};
    CHECK(extremalDistance(pts, std::nullopt, Extremum::max) == doctest::Approx(kPi));
    CHECK(extremalDistance(pts, std::nullopt, Extremum::min) == doctest::Approx(kPi / 2));
    CHECK(extremalDistance(pts, UnitVector{0, 0, 1}, Extremum::max) == doctest::Approx(kPi / 2));
}

TEST_CASE("window JSON round trip") {
    const WindowSet ws{{Window::disc({0.3, 1.0}, 0.2, true),
                        Window::polygon({{1.3, 0.0}, {1.3, 0.6}, {1.8, 0.0}}, false, true)}};
    const WindowSet back = windowSetFromJson(toJson(ws));
    REQUIRE(back.windows.size() == 2);
    CHECK(back.windows[0].typeName() == "minus.disc");
    CHECK(back.windows[0].radius() == doctest::Approx(0.2));
    CHECK(back.windows[1].area() == doctest::Approx(ws.windows[1].area()));
    const auto j = nlohmann::json::parse(R"({"kind":"disc","center":{"theta":90,"phi":0},"r":57.29577951308232})");
    const Window d = windowFromJson(j, kPi / 180.0);
    CHECK(d.radius() == doctest::Approx(1.0));
    CHECK_THROWS(windowFromJson(nlohmann::json::parse(R"({"kind":"square"})")));
}
