#include "spherestat/geostat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "spherestat/errors.hpp"
#include "spherestat/frame_io.hpp"
#include "spherestat/sampling.hpp"
#include "spherestat/stats.hpp"

namespace spherestat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> columnValues(const SkyFrame& frame, const std::string& column) {
    return frame.column(column).values;
}

EmpiricalCurve pairCurve(CurveKind kind, const std::vector<UnitVector>& pts, const std::vector<double>& y,
                         double maxDist, int bins, const PairOptions& opt) {
    const std::size_t n = pts.size();
    if (y.size() != n) throw DomainError("points and values differ in length");
    if (n < 2) throw DomainError("empirical curves need at least 2 rows");
    if (!(maxDist > 0.0 && maxDist <= kPi)) throw DomainError("maxDist must lie in (0, pi]");
    if (bins < 1) throw DomainError("bins must be positive");
    for (double v : y)
        if (!std::isfinite(v)) throw DomainError("values must be finite");

    const double ybar = stats::mean(y);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - ybar;

    const double w = maxDist / bins;
    const double cosMax = std::cos(maxDist);
    std::vector<double> sums(static_cast<std::size_t>(bins) + 1, 0.0);
    std::vector<double> counts(static_cast<std::size_t>(bins) + 1, 0.0);

    auto addPair = [&](std::size_t i, std::size_t j) {
        const UnitVector& a = pts[i];
        const UnitVector& b = pts[j];
        std::size_t bin = 0;
        if (!(a.x == b.x && a.y == b.y && a.z == b.z)) {
            if (a.dot(b) < cosMax - 1e-12) return;
            const double d = geodesicDistance(a, b);
            if (d > maxDist) return;
            if (d > 0.0) bin = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(d / w)), 1, bins);
        }
        const double term = kind == CurveKind::covariance ? r[i] * r[j] : 0.5 * (y[i] - y[j]) * (y[i] - y[j]);
        sums[bin] += term;
        counts[bin] += 1.0;
    };

    EmpiricalCurve c;
    c.kind = kind;
    c.maxDist = maxDist;
    c.bins = bins;

    const double totalPairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (totalPairs <= static_cast<double>(opt.pairBudget)) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) addPair(i, j);
    } else {
        c.subsampled = true;
        SplitMix64 rng(opt.seed);
        for (std::int64_t k = 0; k < opt.pairBudget; ++k) {
            const auto i = static_cast<std::size_t>(rng.below(n));
            auto j = static_cast<std::size_t>(rng.below(n - 1));
            if (j >= i) ++j;
            addPair(i, j);
        }
        const double scale = totalPairs / static_cast<double>(opt.pairBudget);
        for (auto& v : counts) v *= scale;
        for (auto& v : sums) v *= scale;
    }
    // Every row paired with itself belongs to the zero lag.
    for (std::size_t i = 0; i < n; ++i) {
        sums[0] += kind == CurveKind::covariance ? r[i] * r[i] : 0.0;
        counts[0] += 1.0;
    }

    for (int b = 0; b <= bins; ++b) {
        const auto k = static_cast<std::size_t>(b);
        c.lags.push_back(b == 0 ? 0.0 : (b - 0.5) * w);
        c.counts.push_back(static_cast<std::int64_t>(std::llround(counts[k])));
        c.values.push_back(counts[k] > 0.0 ? sums[k] / counts[k] : kNaN);
    }
    return c;
}

// Nelder-Mead on coordinates scaled by `scale`, with every vertex projected
// into the box [lo, hi].
struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;
};

struct NmOutcome {
    std::vector<double> best;
    double fbest = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

template <class F>
NmOutcome nelderMead(F&& objective, std::vector<double> start, const std::vector<double>& step,
                     const std::vector<double>& lo, const std::vector<double>& hi, int maxIter, double tol) {
    const std::size_t d = start.size();
    auto project = [&](std::vector<double>& p) {
        for (std::size_t i = 0; i < d; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    };
    NmOutcome out;
    auto eval = [&](const std::vector<double>& p) {
        ++out.evaluations;
        const double v = objective(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    Simplex s;
    project(start);
    s.x.push_back(start);
    for (std::size_t i = 0; i < d; ++i) {
        auto p = start;
        p[i] += step[i];
        if (p[i] > hi[i]) p[i] = start[i] - step[i];
        project(p);
        if (p[i] == start[i]) p[i] = std::min(hi[i], start[i] + 0.5 * (hi[i] - lo[i]));
        s.x.push_back(p);
    }
    for (const auto& p : s.x) s.f.push_back(eval(p));

    std::vector<std::size_t> order(d + 1);
    for (int it = 0; it < maxIter; ++it) {
        out.iterations = it + 1;
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
        const std::size_t ib = order.front();
        const std::size_t iw = order.back();
        const std::size_t isw = order[d - 1];
        const double fb = s.f[ib];
        const double fw = s.f[iw];

        double diameter = 0.0;
        for (std::size_t k = 0; k <= d; ++k)
            for (std::size_t i = 0; i < d; ++i)
                diameter = std::max(diameter, std::abs(s.x[k][i] - s.x[ib][i]) / std::max(1e-300, step[i]));
        if (fw - fb <= tol * std::abs(fb) || fw == fb || diameter < 1e-14) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t k = 0; k <= d; ++k) {
            if (k == iw) continue;
            for (std::size_t i = 0; i < d; ++i) centroid[i] += s.x[k][i] / static_cast<double>(d);
        }
        auto along = [&](double coef) {
            std::vector<double> p(d);
            for (std::size_t i = 0; i < d; ++i) p[i] = centroid[i] + coef * (s.x[iw][i] - centroid[i]);
            project(p);
            return p;
        };

        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fb) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                s.x[iw] = xe;
                s.f[iw] = fe;
            } else {
                s.x[iw] = xr;
                s.f[iw] = fr;
            }
            continue;
        }
        if (fr < s.f[isw]) {
            s.x[iw] = xr;
            s.f[iw] = fr;
            continue;
        }
        const bool outside = fr < fw;
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : fw)) {
            s.x[iw] = xc;
            s.f[iw] = fc;
            continue;
        }
        for (std::size_t k = 0; k <= d; ++k) {
            if (k == ib) continue;
            for (std::size_t i = 0; i < d; ++i) s.x[k][i] = s.x[ib][i] + 0.5 * (s.x[k][i] - s.x[ib][i]);
            project(s.x[k]);
            s.f[k] = eval(s.x[k]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(s.f.begin(), s.f.end()) - s.f.begin());
    out.best = s.x[best];
    out.fbest = s.f[best];
    return out;
}

double defaultKappa(CovFamily f) {
    switch (f) {
    case CovFamily::askey:
        return 3.0;
    case CovFamily::c2wendland:
        return 4.0;
    case CovFamily::c4wendland:
        return 6.0;
    default:
        return 1.0;
    }
}

std::pair<double, double> kappaBounds(CovFamily f) {
    switch (f) {
    case CovFamily::matern:
        return {1e-3, 20.0};
    case CovFamily::poweredExponential:
    case CovFamily::sinepower:
        return {1e-3, 2.0};
    case CovFamily::askey:
        return {2.0, 100.0};
    case CovFamily::c4wendland:
        return {1.0, 100.0};
    default:
        return {1e-3, 100.0};
    }
}

enum class Param { sigmaSq, psi, kappa, kappa2, nugget };

double& field(CovarianceModel& m, Param p) {
    switch (p) {
    case Param::sigmaSq:
        return m.sigmaSq;
    case Param::psi:
        return m.psi;
    case Param::kappa:
        return m.kappa;
    case Param::kappa2:
        return m.kappa2;
    case Param::nugget:
        return m.nugget;
    }
    return m.sigmaSq;
}

} // namespace

EmpiricalCurve empiricalCovariance(const std::vector<UnitVector>& points, const std::vector<double>& values,
                                   double maxDist, int bins, const PairOptions& opt) {
    return pairCurve(CurveKind::covariance, points, values, maxDist, bins, opt);
}

EmpiricalCurve empiricalVariogram(const std::vector<UnitVector>& points, const std::vector<double>& values,
                                  double maxDist, int bins, const PairOptions& opt) {
    return pairCurve(CurveKind::variogram, points, values, maxDist, bins, opt);
}

EmpiricalCurve empiricalCovariance(const SkyFrame& frame, const std::string& column, double maxDist, int bins,
                                   const PairOptions& opt) {
    return pairCurve(CurveKind::covariance, frame.positions(), columnValues(frame, column), maxDist, bins, opt);
}

EmpiricalCurve empiricalVariogram(const SkyFrame& frame, const std::string& column, double maxDist, int bins,
                                  const PairOptions& opt) {
    return pairCurve(CurveKind::variogram, frame.positions(), columnValues(frame, column), maxDist, bins, opt);
}

FitWeights parseWeights(std::string_view name) {
    if (name == "equal") return FitWeights::equal;
    if (name == "npairs") return FitWeights::npairs;
    if (name == "cressie") return FitWeights::cressie;
    throw ParameterError("unknown weighting '" + std::string(name) + "' (equal, npairs, cressie)");
}

std::string_view weightsName(FitWeights w) {
    switch (w) {
    case FitWeights::equal:
        return "equal";
    case FitWeights::npairs:
        return "npairs";
    case FitWeights::cressie:
        return "cressie";
    }
    return "equal";
}

CovarianceModel defaultFitStart(const EmpiricalCurve& curve, CovFamily family) {
    std::vector<double> g;
    for (std::size_t i = 0; i < curve.values.size(); ++i)
        if (curve.lags[i] > 0.0 && curve.defined(i) && std::isfinite(curve.values[i])) g.push_back(curve.values[i]);
    CovarianceModel m;
    m.family = family;
    m.nugget = 0.0;
    m.kappa = defaultKappa(family);
    m.kappa2 = 1.0;
    m.psi = family == CovFamily::multiquadric ? 0.5 : std::max(curve.maxDist, 1e-3) / 2.0;
    double top = 0.0;
    std::size_t k = 0;
    for (std::size_t i = g.size() - g.size() / 3; i < g.size(); ++i, ++k) top += g[i];
    m.sigmaSq = k > 0 ? std::max(top / static_cast<double>(k), 0.0) : 1.0;
    return m;
}

FitResult fitVariogram(const EmpiricalCurve& curve, CovFamily family, const FitOptions& opt) {
    std::vector<double> h, g, n;
    for (std::size_t i = 0; i < curve.values.size(); ++i) {
        if (curve.lags[i] <= 0.0 || !curve.defined(i) || !std::isfinite(curve.values[i])) continue;
        h.push_back(std::min(curve.lags[i], kPi));
        g.push_back(curve.values[i]);
        n.push_back(static_cast<double>(curve.counts[i]));
    }

    CovarianceModel start = opt.init ? *opt.init : defaultFitStart(curve, family);
    start.family = family;

    std::vector<Param> free{Param::sigmaSq};
    if (familyUsesPsi(family)) free.push_back(Param::psi);
    if (familyUsesKappa(family) && !opt.fixKappa) free.push_back(Param::kappa);
    if (familyUsesKappa2(family) && !opt.fixKappa) free.push_back(Param::kappa2);
    if (!opt.fixNugget) free.push_back(Param::nugget);

    if (g.size() < free.size())
        throw ParameterError("curve has " + std::to_string(g.size()) + " populated bins but the fit has " +
                             std::to_string(free.size()) + " free parameters");

    FitResult res;
    res.model = start;

    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax == 0.0) {
        res.model.sigmaSq = 0.0;
        res.model.nugget = 0.0;
        res.converged = true;
        res.notes.push_back("all lag values are zero: zero-variance model");
        return res;
    }

    const double sigmaHi = std::max(10.0 * gmax, 2.0 * start.sigmaSq);
    std::vector<double> lo, hi, x0, step;
    for (Param p : free) {
        double l = 0.0, u = sigmaHi;
        if (p == Param::psi) {
            l = 1e-6;
            u = family == CovFamily::multiquadric ? 1.0 - 1e-6 : 100.0 * kPi;
        } else if (p == Param::kappa) {
            std::tie(l, u) = kappaBounds(family);
        } else if (p == Param::kappa2) {
            l = 1e-3;
            u = 2.0;
        }
        const double v = std::clamp(field(start, p), l, u);
        lo.push_back(l);
        hi.push_back(u);
        x0.push_back(v);
        step.push_back(v != 0.0 ? 0.1 * std::abs(v) : 0.05 * (u - l));
    }

    auto modelAt = [&](const std::vector<double>& x) {
        CovarianceModel m = start;
        for (std::size_t i = 0; i < free.size(); ++i) field(m, free[i]) = x[i];
        return m;
    };
    auto objective = [&](const std::vector<double>& x) {
        const CovarianceModel m = modelAt(x);
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double gm = variogramModel(h[i], m);
            double w = 1.0;
            if (opt.weights == FitWeights::npairs) w = n[i];
            if (opt.weights == FitWeights::cressie) w = n[i] / std::max(gm * gm, 1e-300);
            const double r = g[i] - gm;
            s += w * r * r;
        }
        return s;
    };

    NmOutcome best = nelderMead(objective, x0, step, lo, hi, opt.maxIterations, opt.tolerance);
    res.iterations = best.iterations;
    res.evaluations = best.evaluations;
    bool converged = best.converged;
    SplitMix64 rng(opt.seed);
    for (int r = 0; r < opt.restarts; ++r) {
        std::vector<double> seedPoint = best.best;
        std::vector<double> rstep(seedPoint.size());
        for (std::size_t i = 0; i < seedPoint.size(); ++i) {
            const double jitter = 1.0 + 0.2 * (2.0 * rng.uniform() - 1.0);
            rstep[i] = seedPoint[i] != 0.0 ? 0.05 * std::abs(seedPoint[i]) * jitter : 0.01 * (hi[i] - lo[i]);
        }
        NmOutcome o = nelderMead(objective, seedPoint, rstep, lo, hi, opt.maxIterations, opt.tolerance);
        res.iterations += o.iterations;
        res.evaluations += o.evaluations;
        if (o.fbest <= best.fbest) {
            best = o;
            converged = o.converged;
        }
    }

    res.model = modelAt(best.best);
    res.objective = best.fbest;
    res.converged = converged;
    if (!converged) res.notes.push_back("iteration limit reached; parameters are the best found");
    for (std::size_t i = 0; i < free.size(); ++i)
        if (free[i] != Param::sigmaSq && free[i] != Param::nugget && (best.best[i] == lo[i] || best.best[i] == hi[i]))
            res.notes.push_back("a shape or range parameter sits on its search bound");
    return res;
}

PowerSpectrum readPowerSpectrum(const std::string& path, std::optional<SpectrumConvention> convention) {
    const CsvTable t = readCsv(path);
    if (t.header.size() != 2) throw SchemaError("power spectrum CSV needs exactly two columns (l, value)");
    PowerSpectrum ps;
    if (convention) {
        ps.convention = *convention;
    } else {
        std::string name = t.header[1];
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (name == "d_l" || name == "dl" || name == "d_ell" || name == "dell")
            ps.convention = SpectrumConvention::Dl;
        else if (name == "c_l" || name == "cl" || name == "c_ell" || name == "cell")
            ps.convention = SpectrumConvention::Cl;
        else
            throw SchemaError("second column header must be C_l or D_l, got '" + t.header[1] + "'");
    }
    for (const auto& row : t.rows) {
        const double l = row[0];
        if (!(l >= 0.0) || l != std::floor(l) || l > 1e7) throw ParseError("multipole index must be a non-negative integer");
        if (!ps.ell.empty() && static_cast<int>(l) <= ps.ell.back())
            throw ParseError("multipole indices must be strictly increasing");
        if (!std::isfinite(row[1])) throw ParseError("spectrum value at l=" + std::to_string(static_cast<int>(l)) + " is not finite");
        ps.ell.push_back(static_cast<int>(l));
        ps.values.push_back(row[1]);
    }
    if (ps.ell.empty()) throw ParseError("power spectrum file has no rows");
    return ps;
}

SpectrumCovariance covFromPowerSpectrum(const PowerSpectrum& ps, int lMax, const std::vector<double>& grid) {
    if (lMax < 0) throw DomainError("lMax must be >= 0");
    if (ps.ell.size() != ps.values.size()) throw DomainError("spectrum ell and values differ in length");
    for (std::size_t i = 1; i < ps.ell.size(); ++i)
        if (ps.ell[i] <= ps.ell[i - 1]) throw DomainError("spectrum multipoles must be strictly increasing");
    for (double x : grid)
        if (!(x >= -1.0 && x <= 1.0)) throw DomainError("grid points must lie in [-1, 1]");

    SpectrumCovariance out;
    int lTop = lMax;
    const int lData = ps.ell.empty() ? -1 : ps.ell.back();
    if (lMax > lData) {
        lTop = std::max(lData, 0);
        out.notes.push_back("lMax " + std::to_string(lMax) + " exceeds the data; series truncated at l=" +
                            std::to_string(lTop));
    }
    std::vector<double> cl(static_cast<std::size_t>(lTop) + 1, 0.0);
    std::vector<bool> have(cl.size(), false);
    for (std::size_t i = 0; i < ps.ell.size(); ++i) {
        const int l = ps.ell[i];
        if (l < 0) throw DomainError("negative multipole");
        if (l > lTop) break;
        double v = ps.values[i];
        if (ps.convention == SpectrumConvention::Dl) {
            if (l == 0) {
                out.notes.push_back("D_l at l=0 has no C_l equivalent; C_0 taken as 0");
                v = 0.0;
            } else {
                v = 2.0 * kPi * v / (static_cast<double>(l) * (l + 1.0));
            }
        }
        cl[static_cast<std::size_t>(l)] = v;
        have[static_cast<std::size_t>(l)] = true;
    }
    for (int l = 0; l <= lTop; ++l) {
        if (have[static_cast<std::size_t>(l)]) continue;
        if (l <= 1) {
            out.notes.push_back("C_" + std::to_string(l) + " absent; taken as 0");
            continue;
        }
        throw GapError("power spectrum has no value at l=" + std::to_string(l));
    }
    out.lMaxUsed = lTop;
    out.cosTheta = grid;
    out.values.reserve(grid.size());
    for (double x : grid) {
        double pPrev = 1.0;
        double pCur = x;
        double s = cl[0];
        if (lTop >= 1) s += 3.0 * cl[1] * x;
        for (int l = 1; l < lTop; ++l) {
            const double pNext = ((2.0 * l + 1.0) * x * pCur - l * pPrev) / (l + 1.0);
            pPrev = pCur;
            pCur = pNext;
            s += (2.0 * (l + 1) + 1.0) * cl[static_cast<std::size_t>(l) + 1] * pCur;
        }
        out.values.push_back(s / (4.0 * kPi));
    }
    return out;
}

double entropy(const std::vector<double>& values, std::optional<int> binCount) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values)
        if (!std::isnan(x)) v.push_back(x);
    if (v.empty()) throw DomainError("entropy needs at least one value");
    const int bins = binCount ? *binCount
                              : static_cast<int>(std::ceil(1.0 + std::log2(static_cast<double>(v.size()))));
    if (bins < 1) throw DomainError("binCount must be >= 1");
    const auto [mnIt, mxIt] = std::minmax_element(v.begin(), v.end());
    const double mn = *mnIt;
    const double range = *mxIt - mn;
    if (!(range > 0.0)) return 0.0;
    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    for (double x : v) {
        auto b = static_cast<std::int64_t>(std::floor((x - mn) / range * bins));
        b = std::clamp<std::int64_t>(b, 0, bins - 1);
        ++hist[static_cast<std::size_t>(b)];
    }
    const double total = static_cast<double>(v.size());
    double e = 0.0;
    for (auto c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        e -= p * std::log2(p);
    }
    return e;
}

double entropy(const SkyFrame& frame, const std::string& column, std::optional<int> binCount) {
    return entropy(columnValues(frame, column), binCount);
}

double firstMinkowski(const SkyFrame& frame, const std::string& column, double alpha) {
    if (frame.mode() != FrameMode::cmb) throw DomainError("firstMinkowski needs a cmb-mode frame");
    const auto& v = frame.column(column).values;
    const auto above = std::count_if(v.begin(), v.end(), [&](double x) { return x > alpha; });
    return static_cast<double>(above) * healpix::pixelArea(frame.resolution());
}

std::vector<RenyiPoint> renyiFromMasses(const std::vector<double>& masses, double qMin, double qMax, int n,
                                        int boxLevel) {
    if (boxLevel < 1) throw DomainError("box level must be >= 1");
    if (n < 1) throw DomainError("grid size must be >= 1");
    if (!(qMin <= qMax)) throw DomainError("qMin must not exceed qMax");
    double total = 0.0;
    for (double m : masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("box masses must be finite and >= 0");
        total += m;
    }
    if (!(total > 0.0)) throw DomainError("degenerate measure: total mass is zero");
    std::vector<double> mu;
    for (double m : masses)
        if (m > 0.0) mu.push_back(m / total);

    std::vector<RenyiPoint> out;
    for (int i = 0; i < n; ++i) {
        const double q = n == 1 ? qMin : qMin + (qMax - qMin) * i / (n - 1);
        if (std::abs(q - 1.0) < 1e-12) continue;
        // Sum mu^q scaled by the largest term to avoid under/overflow.
        double logMax = -std::numeric_limits<double>::infinity();
        for (double m : mu) logMax = std::max(logMax, q * std::log2(m));
        double s = 0.0;
        for (double m : mu) s += std::exp2(q * std::log2(m) - logMax);
        const double logSum = logMax + std::log2(s);
        out.push_back({q, logSum / ((q - 1.0) * -static_cast<double>(boxLevel))});
    }
    return out;
}

std::vector<RenyiPoint> renyiFunction(const SkyFrame& frame, const std::string& column, double qMin, double qMax,
                                      int n, int boxLevel) {
    const int order = frame.resolution().order();
    if (boxLevel < 1 || boxLevel > order)
        throw DomainError("box level must lie in [1, " + std::to_string(order) + "]");
    const auto& v = frame.column(column).values;
    if (v.empty()) throw DomainError("renyiFunction needs at least one row");
    const double mn = *std::min_element(v.begin(), v.end());
    std::map<std::int64_t, double> boxes;
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::int64_t p = frame.pixels()[i];
        if (frame.scheme() == healpix::Scheme::ring) p = healpix::ringToNest(p, frame.resolution());
        boxes[healpix::ancestor(p, order - boxLevel)] += v[i] - mn;
    }
    std::vector<double> masses;
    masses.reserve(boxes.size());
    for (const auto& [k, m] : boxes) masses.push_back(m);
    return renyiFromMasses(masses, qMin, qMax, n, boxLevel);
}

std::optional<double> qStatistic(const std::vector<std::vector<double>>& strata) {
    if (strata.empty()) throw StratificationError("qStatistic needs at least one stratum");
    std::vector<double> all;
    double within = 0.0;
    for (const auto& s : strata) {
        if (s.empty()) throw StratificationError("empty stratum");
        within += static_cast<double>(s.size()) * stats::populationVariance(s);
        all.insert(all.end(), s.begin(), s.end());
    }
    const double total = static_cast<double>(all.size()) * stats::populationVariance(all);
    if (!(total > 0.0)) return std::nullopt;
    return std::clamp(1.0 - within / total, 0.0, 1.0);
}

std::optional<double> qStatistic(const SkyFrame& frame, const std::string& column,
                                 const std::vector<WindowSet>& strata) {
    const auto& v = frame.column(column).values;
    std::vector<int> owner(frame.size(), -1);
    std::vector<std::vector<double>> groups(strata.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const UnitVector c = frame.pixelCenter(i);
        for (std::size_t s = 0; s < strata.size(); ++s) {
            if (!strata[s].contains(c)) continue;
            if (owner[i] >= 0)
                throw StratificationError("strata " + std::to_string(owner[i] + 1) + " and " + std::to_string(s + 1) +
                                          " overlap at row " + std::to_string(i + 1));
            owner[i] = static_cast<int>(s);
            groups[s].push_back(v[i]);
        }
    }
    for (std::size_t s = 0; s < groups.size(); ++s)
        if (groups[s].empty()) throw StratificationError("stratum " + std::to_string(s + 1) + " selects no rows");
    return qStatistic(groups);
}

std::vector<QQPoint> qqPairs(const std::vector<double>& a, const std::vector<double>& b, int nQuantiles) {
    if (a.empty() || b.empty()) throw DomainError("qqPairs needs two non-empty samples");
    if (nQuantiles < 1) throw DomainError("nQuantiles must be >= 1");
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<QQPoint> out;
    for (int k = 0; k < nQuantiles; ++k) {
        const double p = nQuantiles == 1 ? 0.5 : static_cast<double>(k) / (nQuantiles - 1);
        out.push_back({p, stats::quantileSorted(sa, p), stats::quantileSorted(sb, p)});
    }
    return out;
}

std::vector<QQPoint> qqPairs(const SkyFrame& frame, const std::string& column, const WindowSet& regionA,
                             const WindowSet& regionB, int nQuantiles) {
    const auto& v = frame.column(column).values;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const UnitVector c = frame.pixelCenter(i);
        if (regionA.contains(c)) a.push_back(v[i]);
        if (regionB.contains(c)) b.push_back(v[i]);
    }
    if (a.empty()) throw DomainError("region A selects no rows");
    if (b.empty()) throw DomainError("region B selects no rows");
    return qqPairs(a, b, nQuantiles);
}

AngularMarginals angularMarginals(const SkyFrame& frame, const std::string& column, int thetaBins, int phiBins) {
    if (frame.empty()) throw DomainError("angularMarginals needs at least one row");
    if (thetaBins < 1 || phiBins < 1) throw DomainError("bin counts must be >= 1");
    const auto& v = frame.column(column).values;
    std::vector<double> ts(static_cast<std::size_t>(thetaBins), 0.0), ps(static_cast<std::size_t>(phiBins), 0.0);
    std::vector<std::int64_t> tc(ts.size(), 0), pc(ps.size(), 0);
    const double tw = kPi / thetaBins;
    const double pw = kTwoPi / phiBins;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const SphericalPoint sp = toSpherical(frame.position(i));
        const auto tb = std::clamp<std::int64_t>(static_cast<std::int64_t>(sp.theta / tw), 0, thetaBins - 1);
        const auto pb = std::clamp<std::int64_t>(static_cast<std::int64_t>(wrapTwoPi(sp.phi) / pw), 0, phiBins - 1);
        ts[static_cast<std::size_t>(tb)] += v[i];
        ++tc[static_cast<std::size_t>(tb)];
        ps[static_cast<std::size_t>(pb)] += v[i];
        ++pc[static_cast<std::size_t>(pb)];
    }
    AngularMarginals out;
    for (std::size_t b = 0; b < ts.size(); ++b)
        out.theta.push_back({(static_cast<double>(b) + 0.5) * tw,
                             tc[b] > 0 ? std::optional(ts[b] / static_cast<double>(tc[b])) : std::nullopt, tc[b]});
    for (std::size_t b = 0; b < ps.size(); ++b)
        out.phi.push_back({(static_cast<double>(b) + 0.5) * pw,
                           pc[b] > 0 ? std::optional(ps[b] / static_cast<double>(pc[b])) : std::nullopt, pc[b]});
    return out;
}

} // namespace spherestat
