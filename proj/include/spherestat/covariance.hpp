#pragma once

#include <string>
#include <string_view>
#include <vector>

// Parametric covariance families on the sphere. With t = h / psi:
//   exponential          exp(-t)
//   spherical            1 - 1.5 t + 0.5 t^3 for t < 1, else 0
//   powered.exponential  exp(-t^kappa), 0 < kappa <= 2
//   cauchy               (1 + t^2)^(-kappa)
//   gencauchy            (1 + t^kappa2)^(-kappa / kappa2), 0 < kappa2 <= 2
//   pure.nugget          1 at h = 0, else 0
//   matern               2^(1-kappa) / Gamma(kappa) t^kappa K_kappa(t), 0 < kappa <= 20
//   askey                (1 - t)_+^kappa, kappa >= 2
//   c2wendland           (1 + kappa t)(1 - t)_+^kappa
//   c4wendland           (1 + kappa t + (kappa^2 - 1)/3 t^2)(1 - t)_+^kappa, kappa >= 1
//   sinepower            1 - |sin(t / 2)|^kappa, 0 < kappa <= 2
//   multiquadric         ((1 - d)^2 / (1 + d^2 - 2 d cos h))^kappa with d = psi in (0, 1)
// Gamma(h) = sigmaSq rho(h) plus nugget at h = 0.
namespace spherestat {

enum class CovFamily {
    matern,
    exponential,
    spherical,
    poweredExponential,
    cauchy,
    gencauchy,
    pureNugget,
    askey,
    c2wendland,
    c4wendland,
    sinepower,
    multiquadric,
};

const std::vector<CovFamily>& allFamilies();
std::string_view familyName(CovFamily f);
CovFamily parseFamily(std::string_view name);

bool familyUsesPsi(CovFamily f);
bool familyUsesKappa(CovFamily f);
bool familyUsesKappa2(CovFamily f);

struct CovarianceModel {
    CovFamily family = CovFamily::exponential;
    double sigmaSq = 1.0;
    double psi = 1.0;
    double kappa = 1.0;
    double kappa2 = 1.0;
    double nugget = 0.0;
};

/// Throws ParameterError when a parameter lies outside the family domain.
void validate(const CovarianceModel& m);

/// Family correlation rho(h), no nugget. h in [0, pi].
double correlation(double h, const CovarianceModel& m);
/// Gamma(h) = sigmaSq rho(h) (+ nugget at h = 0).
double covModel(double h, const CovarianceModel& m);
/// gamma(h) = Gamma(0) - Gamma(h).
double variogramModel(double h, const CovarianceModel& m);

/// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
/// Temme's series for x <= 2, Steed's continued fraction above, then
/// forward recurrence in the order.
double besselK(double nu, double x);

} // namespace spherestat
