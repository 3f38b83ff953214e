#include "spherestat/covariance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "spherestat/coords.hpp"
#include "spherestat/errors.hpp"

namespace spherestat {

namespace {

struct FamilyInfo {
    CovFamily family;
    std::string_view name;
    bool psi;
    bool kappa;
    bool kappa2;
};

constexpr std::array<FamilyInfo, 12> kFamilies{{
    {CovFamily::matern, "matern", true, true, false},
    {CovFamily::exponential, "exponential", true, false, false},
    {CovFamily::spherical, "spherical", true, false, false},
    {CovFamily::poweredExponential, "powered.exponential", true, true, false},
    {CovFamily::cauchy, "cauchy", true, true, false},
    {CovFamily::gencauchy, "gencauchy", true, true, true},
    {CovFamily::pureNugget, "pure.nugget", false, false, false},
    {CovFamily::askey, "askey", true, true, false},
    {CovFamily::c2wendland, "c2wendland", true, true, false},
    {CovFamily::c4wendland, "c4wendland", true, true, false},
    {CovFamily::sinepower, "sinepower", true, true, false},
    {CovFamily::multiquadric, "multiquadric", true, true, false},
}};

const FamilyInfo& info(CovFamily f) {
    for (const auto& i : kFamilies)
        if (i.family == f) return i;
    throw ParameterError("unknown covariance family");
}

// Taylor coefficients of 1/Gamma(z) = sum c[k] z^(k+1).
constexpr std::array<double, 26> kRecipGamma{
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
void temmeGammas(double mu, double& gam1, double& gam2) {
    const double mu2 = mu * mu;
    gam1 = 0.0;
    gam2 = 0.0;
    for (int k = 25; k >= 0; --k) {
        if (k % 2 == 1)
            gam1 = gam1 * mu2 - kRecipGamma[static_cast<std::size_t>(k)];
        else
            gam2 = gam2 * mu2 + kRecipGamma[static_cast<std::size_t>(k)];
    }
}

double powPositive(double base, double e) { return base <= 0.0 ? 0.0 : std::pow(base, e); }

} // namespace

const std::vector<CovFamily>& allFamilies() {
    static const std::vector<CovFamily> all = [] {
        std::vector<CovFamily> v;
        for (const auto& i : kFamilies) v.push_back(i.family);
        return v;
    }();
    return all;
}

std::string_view familyName(CovFamily f) { return info(f).name; }

CovFamily parseFamily(std::string_view name) {
    for (const auto& i : kFamilies)
        if (i.name == name) return i.family;
    throw ParameterError("unknown covariance family '" + std::string(name) + "'");
}

bool familyUsesPsi(CovFamily f) { return info(f).psi; }
bool familyUsesKappa(CovFamily f) { return info(f).kappa; }
bool familyUsesKappa2(CovFamily f) { return info(f).kappa2; }

double besselK(double nu, double x) {
    if (!(x > 0.0) || !(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("besselK needs nu >= 0 and x > 0");
    if (std::isinf(x)) return 0.0;
    constexpr double eps = 1e-16;
    constexpr int maxIter = 10000;
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl;
    const double mu2 = mu * mu;
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    double kmu = 0.0;
    double k1 = 0.0;
    if (x <= 2.0) {
        const double x2 = 0.5 * x;
        const double pimu = kPi * mu;
        const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        double d = -std::log(x2);
        double e = mu * d;
        const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
        double gam1 = 0.0;
        double gam2 = 0.0;
        temmeGammas(mu, gam1, gam2);
        const double gampl = gam2 - mu * gam1; // 1/Gamma(1+mu)
        const double gammi = gam2 + mu * gam1; // 1/Gamma(1-mu)
        double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / gampl;
        double q = 0.5 / (e * gammi);
        double c = 1.0;
        d = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i <= maxIter; ++i) {
            ff = (i * ff + p + q) / (i * i - mu2);
            c *= d / i;
            p /= i - mu;
            q /= i + mu;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        if (i > maxIter) throw DomainError("besselK series failed to converge");
        kmu = sum;
        k1 = sum1 * xi2;
    } else {
        double b = 2.0 * (1.0 + x);
        double d = 1.0 / b;
        double h = d;
        double delh = d;
        double q1 = 0.0;
        double q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1;
        double c = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 2;
        for (; i <= maxIter; ++i) {
            a -= 2 * (i - 1);
            c = -a * c / i;
            const double qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh = (b * d - 1.0) * delh;
            h += delh;
            const double dels = q * delh;
            s += dels;
            if (std::abs(dels / s) < eps) break;
        }
        if (i > maxIter) throw DomainError("besselK continued fraction failed to converge");
        h = a1 * h;
        kmu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
        k1 = kmu * (mu + x + 0.5 - h) * xi;
    }
    for (int i = 1; i <= nl; ++i) {
        const double next = (mu + i) * xi2 * k1 + kmu;
        kmu = k1;
        k1 = next;
    }
    return kmu;
}

void validate(const CovarianceModel& m) {
    auto bad = [&](const std::string& what) {
        throw ParameterError(std::string(familyName(m.family)) + ": " + what);
    };
    if (!(m.sigmaSq >= 0.0) || !std::isfinite(m.sigmaSq)) bad("sigmaSq must be finite and >= 0");
    if (!(m.nugget >= 0.0) || !std::isfinite(m.nugget)) bad("nugget must be finite and >= 0");
    if (familyUsesPsi(m.family) && (!(m.psi > 0.0) || !std::isfinite(m.psi))) bad("psi must be > 0");
    const double k = m.kappa;
    if (familyUsesKappa(m.family) && !std::isfinite(k)) bad("kappa must be finite");
    switch (m.family) {
    case CovFamily::matern:
        if (!(k > 0.0 && k <= 20.0)) bad("kappa must lie in (0, 20]");
        break;
    case CovFamily::poweredExponential:
    case CovFamily::sinepower:
        if (!(k > 0.0 && k <= 2.0)) bad("kappa must lie in (0, 2]");
        break;
    case CovFamily::cauchy:
    case CovFamily::c2wendland:
        if (!(k > 0.0)) bad("kappa must be > 0");
        break;
    case CovFamily::gencauchy:
        if (!(k > 0.0)) bad("kappa must be > 0");
        if (!(m.kappa2 > 0.0 && m.kappa2 <= 2.0)) bad("kappa2 must lie in (0, 2]");
        break;
    case CovFamily::askey:
        if (!(k >= 2.0)) bad("kappa must be >= 2");
        break;
    case CovFamily::c4wendland:
        if (!(k >= 1.0)) bad("kappa must be >= 1");
        break;
    case CovFamily::multiquadric:
        if (!(m.psi > 0.0 && m.psi < 1.0)) bad("psi (the shape delta) must lie in (0, 1)");
        if (!(k > 0.0)) bad("kappa must be > 0");
        break;
    default:
        break;
    }
}

double correlation(double h, const CovarianceModel& m) {
    if (!(h >= 0.0 && h <= kPi * (1.0 + 1e-12))) throw DomainError("lag must lie in [0, pi]");
    validate(m);
    if (h == 0.0) return 1.0;
    const double t = familyUsesPsi(m.family) ? h / m.psi : h;
    const double k = m.kappa;
    switch (m.family) {
    case CovFamily::exponential:
        return std::exp(-t);
    case CovFamily::spherical:
        return t < 1.0 ? 1.0 - 1.5 * t + 0.5 * t * t * t : 0.0;
    case CovFamily::poweredExponential:
        return std::exp(-std::pow(t, k));
    case CovFamily::cauchy:
        return std::pow(1.0 + t * t, -k);
    case CovFamily::gencauchy:
        return std::pow(1.0 + std::pow(t, m.kappa2), -k / m.kappa2);
    case CovFamily::pureNugget:
        return 0.0;
    case CovFamily::matern: {
        const double kv = besselK(k, t);
        if (!std::isfinite(kv)) return 1.0;
        const double logv = (1.0 - k) * std::log(2.0) - std::lgamma(k) + k * std::log(t) + std::log(kv);
        return std::min(1.0, std::exp(logv));
    }
    case CovFamily::askey:
        return powPositive(1.0 - t, k);
    case CovFamily::c2wendland:
        return (1.0 + k * t) * powPositive(1.0 - t, k);
    case CovFamily::c4wendland:
        return t >= 1.0 ? 0.0 : (1.0 + k * t + (k * k - 1.0) / 3.0 * t * t) * std::pow(1.0 - t, k);
    case CovFamily::sinepower:
        return 1.0 - std::pow(std::abs(std::sin(0.5 * t)), k);
    case CovFamily::multiquadric: {
        const double d = m.psi;
        return std::pow((1.0 - d) * (1.0 - d) / (1.0 + d * d - 2.0 * d * std::cos(h)), k);
    }
    }
    throw ParameterError("unknown covariance family");
}

double covModel(double h, const CovarianceModel& m) {
    const double c = m.sigmaSq * correlation(h, m);
    return h == 0.0 ? c + m.nugget : c;
}

double variogramModel(double h, const CovarianceModel& m) {
    if (h == 0.0) {
        validate(m);
        return 0.0;
    }
    return m.nugget + m.sigmaSq * (1.0 - correlation(h, m));
}

} // namespace spherestat
