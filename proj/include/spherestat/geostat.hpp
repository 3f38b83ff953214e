#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spherestat/covariance.hpp"
#include "spherestat/sky_frame.hpp"
#include "spherestat/windows.hpp"

namespace spherestat {

enum class CurveKind { covariance, variogram };

/// bins + 1 entries. Entry 0 is the zero lag (each row paired with itself
/// and with coincident rows); entry i >= 1 collects pairs at geodesic
/// separation in ((i-1) w, i w], w = maxDist / bins, reported at (i - 0.5) w.
struct EmpiricalCurve {
    CurveKind kind = CurveKind::variogram;
    std::vector<double> lags;
    std::vector<double> values; // NaN where count == 0
    std::vector<std::int64_t> counts;
    double maxDist = 0.0;
    int bins = 0;
    bool subsampled = false;

    bool defined(std::size_t i) const { return counts[i] > 0; }
};

struct PairOptions {
    /// Above this many distinct pairs, pairs are drawn uniformly at random
    /// (with replacement) up to the budget and counts are rescaled.
    std::int64_t pairBudget = 50'000'000;
    std::uint64_t seed = 0;
};

EmpiricalCurve empiricalCovariance(const std::vector<UnitVector>& points, const std::vector<double>& values,
                                   double maxDist, int bins, const PairOptions& opt = {});
EmpiricalCurve empiricalVariogram(const std::vector<UnitVector>& points, const std::vector<double>& values,
                                  double maxDist, int bins, const PairOptions& opt = {});
EmpiricalCurve empiricalCovariance(const SkyFrame& frame, const std::string& column, double maxDist, int bins,
                                   const PairOptions& opt = {});
EmpiricalCurve empiricalVariogram(const SkyFrame& frame, const std::string& column, double maxDist, int bins,
                                  const PairOptions& opt = {});

enum class FitWeights { equal, npairs, cressie };
FitWeights parseWeights(std::string_view name);
std::string_view weightsName(FitWeights w);

struct FitOptions {
    FitWeights weights = FitWeights::equal;
    bool fixNugget = true;  // nugget held at init.nugget
    bool fixKappa = false;  // kappa (and kappa2) held at their init values
    /// Starting point; family and any unset field are filled with defaults.
    std::optional<CovarianceModel> init;
    int restarts = 3;
    int maxIterations = 10000;
    double tolerance = 1e-10;
    std::uint64_t seed = 1;
};

struct FitResult {
    CovarianceModel model;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    std::vector<std::string> notes;
};

/// Automatic starting point: plateau of the upper third of the lags for
/// sigmaSq, half of maxDist for psi, family default shapes, zero nugget.
CovarianceModel defaultFitStart(const EmpiricalCurve& curve, CovFamily family);

/// Weighted least squares of the model variogram against the curve's
/// populated bins with lag > 0 (Nelder-Mead with box constraints).
FitResult fitVariogram(const EmpiricalCurve& curve, CovFamily family, const FitOptions& opt = {});

enum class SpectrumConvention { Cl, Dl };

struct PowerSpectrum {
    std::vector<int> ell;
    std::vector<double> values;
    SpectrumConvention convention = SpectrumConvention::Cl;
};

/// Two-column CSV "l,<C_l|D_l>"; the header of the second column names the
/// convention unless `convention` overrides it.
PowerSpectrum readPowerSpectrum(const std::string& path, std::optional<SpectrumConvention> convention = {});

struct SpectrumCovariance {
    std::vector<double> cosTheta;
    std::vector<double> values;
    int lMaxUsed = 0;
    std::vector<std::string> notes;
};

/// (1/4pi) sum_{l <= lMax} (2l + 1) C_l P_l(x) at every grid point.
SpectrumCovariance covFromPowerSpectrum(const PowerSpectrum& ps, int lMax, const std::vector<double>& grid);

/// Equal-width histogram entropy in bits over [min, max]. NaNs are ignored.
/// binCount defaults to ceil(1 + log2 n).
double entropy(const std::vector<double>& values, std::optional<int> binCount = {});
double entropy(const SkyFrame& frame, const std::string& column, std::optional<int> binCount = {});

/// Pixel area times the number of rows whose value exceeds alpha (cmb frames).
double firstMinkowski(const SkyFrame& frame, const std::string& column, double alpha);

struct RenyiPoint {
    double q = 0.0;
    double t = 0.0;
};

/// Boxes are the nested ancestors at level boxLevel (1 <= boxLevel <= frame
/// order); masses are value - min(value). Zero-mass boxes are left out.
/// q == 1 is removed from the grid.
std::vector<RenyiPoint> renyiFunction(const SkyFrame& frame, const std::string& column, double qMin, double qMax,
                                      int n, int boxLevel);
/// Same estimator on explicit box masses (level boxLevel).
std::vector<RenyiPoint> renyiFromMasses(const std::vector<double>& masses, double qMin, double qMax, int n,
                                        int boxLevel);

/// 1 - sum_h N_h var_h / (N var) with strata selected by pixel centre.
/// nullopt when the total variance is zero.
std::optional<double> qStatistic(const SkyFrame& frame, const std::string& column,
                                 const std::vector<WindowSet>& strata);
std::optional<double> qStatistic(const std::vector<std::vector<double>>& strata);

struct QQPoint {
    double p = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Type-7 quantiles at probabilities (k - 1) / (n - 1), k = 1..n.
std::vector<QQPoint> qqPairs(const std::vector<double>& a, const std::vector<double>& b, int nQuantiles);
std::vector<QQPoint> qqPairs(const SkyFrame& frame, const std::string& column, const WindowSet& regionA,
                             const WindowSet& regionB, int nQuantiles);

struct MarginalBin {
    double center = 0.0;
    std::optional<double> mean;
    std::int64_t count = 0;
};

struct AngularMarginals {
    std::vector<MarginalBin> theta; // bins over [0, pi]
    std::vector<MarginalBin> phi;   // bins over [0, 2 pi)
};

AngularMarginals angularMarginals(const SkyFrame& frame, const std::string& column, int thetaBins, int phiBins);

} // namespace spherestat
