#include <doctest.h>

#include <cmath>

#include "spherestat/coords.hpp"
#include "spherestat/covariance.hpp"
#include "spherestat/errors.hpp"

using namespace spherestat;

namespace {

CovarianceModel model(CovFamily f, double psi, double kappa = 1.0, double kappa2 = 1.0) {
    CovarianceModel m;
    m.family = f;
    m.psi = psi;
    m.kappa = kappa;
    m.kappa2 = kappa2;
    return m;
}

CovarianceModel validDefault(CovFamily f) {
    switch (f) {
    case CovFamily::askey: return model(f, 1.0, 3.0);
    case CovFamily::c2wendland: return model(f, 1.0, 4.0);
    case CovFamily::c4wendland: return model(f, 1.0, 6.0);
    case CovFamily::multiquadric: return model(f, 0.5, 1.5);
    case CovFamily::gencauchy: return model(f, 1.0, 2.0, 1.5);
    case CovFamily::poweredExponential: return model(f, 1.0, 1.5);
    case CovFamily::matern: return model(f, 0.7, 2.5);
    default: return model(f, 1.0);
    }
}

} // namespace

TEST_CASE("family names round trip") {
    CHECK(allFamilies().size() == 12);
    for (CovFamily f : allFamilies()) CHECK(parseFamily(familyName(f)) == f);
    CHECK(familyName(CovFamily::poweredExponential) == "powered.exponential");
    CHECK(familyName(CovFamily::pureNugget) == "pure.nugget");
    CHECK_THROWS_AS(parseFamily("gaussian"), ParameterError);
}

TEST_CASE("askey reference value") {
    const CovarianceModel m = model(CovFamily::askey, 2.0, 4.0);
    CHECK(correlation(0.5, m) == doctest::Approx(0.31640625).epsilon(1e-12));
    CHECK(correlation(2.0, m) == 0.0);
    CHECK(correlation(2.5, m) == 0.0);
}

TEST_CASE("closed forms") {
    const double h = 0.4;
    const double psi = 0.8;
    const double t = h / psi;
    CHECK(correlation(h, model(CovFamily::exponential, psi)) == doctest::Approx(std::exp(-t)));
    CHECK(correlation(h, model(CovFamily::spherical, psi)) == doctest::Approx(1 - 1.5 * t + 0.5 * t * t * t));
    CHECK(correlation(h, model(CovFamily::poweredExponential, psi, 1.5)) == doctest::Approx(std::exp(-std::pow(t, 1.5))));
    CHECK(correlation(h, model(CovFamily::cauchy, psi, 2.0)) == doctest::Approx(std::pow(1 + t * t, -2.0)));
    CHECK(correlation(h, model(CovFamily::gencauchy, psi, 3.0, 1.5)) ==
          doctest::Approx(std::pow(1 + std::pow(t, 1.5), -2.0)));
    CHECK(correlation(h, model(CovFamily::c2wendland, psi, 4.0)) == doctest::Approx((1 + 4 * t) * std::pow(1 - t, 4)));
    CHECK(correlation(h, model(CovFamily::c4wendland, psi, 6.0)) ==
          doctest::Approx((1 + 6 * t + 35.0 / 3.0 * t * t) * std::pow(1 - t, 6)));
    CHECK(correlation(h, model(CovFamily::sinepower, psi, 1.0)) == doctest::Approx(1 - std::sin(t / 2)));
    const double d = 0.5;
    CHECK(correlation(h, model(CovFamily::multiquadric, d, 2.0)) ==
          doctest::Approx(std::pow((1 - d) * (1 - d) / (1 + d * d - 2 * d * std::cos(h)), 2.0)));
    CHECK(correlation(0.0, model(CovFamily::pureNugget, psi)) == 1.0);
    CHECK(correlation(h, model(CovFamily::pureNugget, psi)) == 0.0);
}

TEST_CASE("matern special cases") {
    for (double h : {0.01, 0.2, 0.9, 2.5}) {
        const double t = h / 0.6;
        CHECK(correlation(h, model(CovFamily::matern, 0.6, 0.5)) == doctest::Approx(std::exp(-t)).epsilon(1e-10));
        CHECK(correlation(h, model(CovFamily::matern, 0.6, 1.5)) ==
              doctest::Approx((1 + t) * std::exp(-t)).epsilon(1e-10));
        CHECK(correlation(h, model(CovFamily::matern, 0.6, 2.5)) ==
              doctest::Approx((1 + t + t * t / 3) * std::exp(-t)).epsilon(1e-10));
    }
    CHECK(correlation(0.0, model(CovFamily::matern, 0.6, 7.3)) == 1.0);
    CHECK(correlation(1e-9, model(CovFamily::matern, 0.6, 7.3)) == doctest::Approx(1.0));
}

TEST_CASE("besselK agrees with the standard library") {
    for (double nu : {0.0, 0.1, 0.5, 1.0, 1.7, 3.25, 8.0, 12.5, 20.0}) {
        for (double x : {1e-3, 0.05, 0.5, 1.0, 1.99, 2.01, 5.0, 17.0, 60.0}) {
            const double expected = std::cyl_bessel_k(nu, x);
            if (!std::isfinite(expected)) continue;
            CAPTURE(nu);
            CAPTURE(x);
            CHECK(besselK(nu, x) == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("every family is a bounded correlation") {
    for (CovFamily f : allFamilies()) {
        const CovarianceModel m = validDefault(f);
        CAPTURE(familyName(f));
        CHECK(correlation(0.0, m) == doctest::Approx(1.0));
        for (int i = 0; i <= 400; ++i) {
            const double rho = correlation(kPi * i / 400.0, m);
            CHECK(std::isfinite(rho));
            CHECK(std::abs(rho) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("compact support") {
    for (CovFamily f : {CovFamily::spherical, CovFamily::askey, CovFamily::c2wendland, CovFamily::c4wendland}) {
        CovarianceModel m = validDefault(f);
        m.psi = 0.5;
        CHECK(correlation(0.5, m) == 0.0);
        CHECK(correlation(1.0, m) == 0.0);
        CHECK(correlation(0.49, m) > 0.0);
    }
}

TEST_CASE("covariance and variogram with nugget") {
    CovarianceModel m = model(CovFamily::exponential, 0.5);
    m.sigmaSq = 2.0;
    m.nugget = 0.3;
    CHECK(covModel(0.0, m) == doctest::Approx(2.3));
    CHECK(covModel(0.5, m) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(variogramModel(0.0, m) == 0.0);
    CHECK(variogramModel(0.5, m) == doctest::Approx(2.3 - 2.0 * std::exp(-1.0)));
}

TEST_CASE("parameter domains") {
    CHECK_THROWS_AS(validate(model(CovFamily::matern, 1.0, 0.0)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::matern, 1.0, 20.5)), ParameterError);
    CHECK_NOTHROW(validate(model(CovFamily::matern, 1.0, 20.0)));
    CHECK_THROWS_AS(validate(model(CovFamily::poweredExponential, 1.0, 2.1)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::askey, 1.0, 1.5)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::c4wendland, 1.0, 0.5)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::gencauchy, 1.0, 1.0, 2.5)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::sinepower, 1.0, 2.5)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::multiquadric, 1.0, 1.0)), ParameterError);
    CHECK_THROWS_AS(validate(model(CovFamily::exponential, 0.0)), ParameterError);
    CovarianceModel neg = model(CovFamily::exponential, 1.0);
    neg.sigmaSq = -1.0;
    CHECK_THROWS_AS(validate(neg), ParameterError);
    neg.sigmaSq = 1.0;
    neg.nugget = -0.1;
    CHECK_THROWS_AS(validate(neg), ParameterError);
    CHECK_THROWS_AS(correlation(-0.1, model(CovFamily::exponential, 1.0)), DomainError);
    CHECK_THROWS_AS(correlation(3.2, model(CovFamily::exponential, 1.0)), DomainError);
}
