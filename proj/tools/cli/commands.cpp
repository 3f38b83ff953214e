#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "download.hpp"
#include "spherestat/errors.hpp"
#include "spherestat/fits.hpp"
#include "spherestat/frame_io.hpp"
#include "spherestat/geostat.hpp"
#include "spherestat/sampling.hpp"
#include "spherestat/sky_frame.hpp"
#include "spherestat/svg.hpp"
#include "spherestat/window_json.hpp"

namespace spherestat::cli {

namespace {

using nlohmann::json;

constexpr double kDeg = kPi / 180.0;

// Tracks which step is running so failures can name it.
struct Stage {
    std::string name = "startup";
};

bool isFits(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char head[9] = {0};
    in.read(head, 9);
    return in.gcount() == 9 && std::string(head, 9) == "SIMPLE  =";
}

class Output {
  public:
    Output(const std::string& path, std::ostream& fallback) : path_(path), stream_(&fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::trunc);
            if (!file_) throw IoError("cannot create '" + path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }
    void close() {
        if (file_.is_open()) {
            file_.close();
            if (!file_) throw IoError("write to '" + path_ + "' failed");
        }
    }

  private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_;
};

std::string jsonNumberText(double v) { return formatNumber(v); }

json optionalNumber(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct FrameInput {
    std::string path;
    std::vector<std::string> columns;
    std::int64_t sample = 0; // 0: every row
    std::uint64_t seed = 0;
};

SkyFrame loadFrame(const FrameInput& in, const Config& cfg) {
    if (isFits(in.path)) {
        const auto src = fits::openMap(in.path);
        const auto cols = in.columns.empty() ? src.columnNames() : in.columns;
        const auto cards = cfg.list("summary.cards");
        if (in.sample > 0) return frameFromMap(src, SampleSpec{in.sample, in.seed}, cols, cards);
        return frameFromMap(src, AllRows{}, cols, cards);
    }
    SkyFrame f = readFrameCsv(in.path);
    if (in.sample > 0) f = sampleFrame(f, in.sample, in.seed);
    return f;
}

void writeCurve(const EmpiricalCurve& c, const std::string& format, std::ostream& o) {
    const std::string kind = c.kind == CurveKind::covariance ? "covariance" : "variogram";
    if (format == "json") {
        json j;
        j["kind"] = kind;
        j["max_dist"] = c.maxDist;
        j["bins"] = c.bins;
        j["subsampled"] = c.subsampled;
        j["lags"] = c.lags;
        json vals = json::array();
        for (double v : c.values) vals.push_back(optionalNumber(v));
        j["values"] = vals;
        j["counts"] = c.counts;
        o << j.dump(2) << '\n';
        return;
    }
    o << "# kind=" << kind << " max_dist=" << formatNumber(c.maxDist) << " bins=" << c.bins
      << " subsampled=" << (c.subsampled ? 1 : 0) << '\n';
    o << "lag,value,count\n";
    for (std::size_t i = 0; i < c.lags.size(); ++i)
        o << formatNumber(c.lags[i]) << ',' << formatNumber(c.values[i]) << ',' << c.counts[i] << '\n';
}

EmpiricalCurve readCurve(const std::string& path) {
    EmpiricalCurve c;
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open '" + path + "'");
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind('#', 0) != 0) break;
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
                if (k == "kind") c.kind = v == "covariance" ? CurveKind::covariance : CurveKind::variogram;
                if (k == "max_dist") c.maxDist = std::stod(v);
                if (k == "bins") c.bins = std::stoi(v);
                if (k == "subsampled") c.subsampled = v == "1";
            }
        }
    }
    const CsvTable t = readCsv(path);
    const auto il = t.columnIndex("lag"), iv = t.columnIndex("value"), ic = t.columnIndex("count");
    for (const auto& row : t.rows) {
        c.lags.push_back(row[il]);
        c.values.push_back(row[iv]);
        c.counts.push_back(std::isfinite(row[ic]) ? static_cast<std::int64_t>(std::llround(row[ic])) : 0);
    }
    if (c.lags.empty()) throw ParseError("curve file '" + path + "' has no rows");
    if (c.bins == 0) c.bins = static_cast<int>(c.lags.size()) - 1;
    if (c.maxDist == 0.0) {
        const double w = c.lags.size() > 2 ? c.lags[2] - c.lags[1] : 2.0 * c.lags.back();
        c.maxDist = c.lags.back() + 0.5 * w;
    }
    return c;
}

json modelJson(const CovarianceModel& m) {
    json j;
    j["family"] = std::string(familyName(m.family));
    j["sigma2"] = m.sigmaSq;
    if (familyUsesPsi(m.family)) j["psi"] = m.psi;
    if (familyUsesKappa(m.family)) j["kappa"] = m.kappa;
    if (familyUsesKappa2(m.family)) j["kappa2"] = m.kappa2;
    j["nugget"] = m.nugget;
    return j;
}

CovarianceModel modelFromJson(const json& j) {
    CovarianceModel m;
    m.family = parseFamily(j.at("family").get<std::string>());
    m.sigmaSq = j.value("sigma2", 1.0);
    m.psi = j.value("psi", 1.0);
    m.kappa = j.value("kappa", 1.0);
    m.kappa2 = j.value("kappa2", 1.0);
    m.nugget = j.value("nugget", 0.0);
    return m;
}

json readJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void writeScalar(const std::string& name, std::optional<double> v, const std::string& format, std::ostream& o) {
    if (format == "json") {
        json j;
        j[name] = v ? json(*v) : json(nullptr);
        o << j.dump(2) << '\n';
    } else {
        o << (v ? jsonNumberText(*v) : std::string("NA")) << '\n';
    }
}

json mapInfo(const fits::MapSource& src, const std::string& path) {
    json j;
    j["kind"] = "map";
    j["file"] = path;
    j["nside"] = src.resolution().nside();
    j["ordering"] = std::string(healpix::schemeName(src.scheme()));
    j["rows"] = src.rowCount();
    json cols = json::array();
    for (const auto& c : src.columns()) cols.push_back({{"name", c.name}, {"type", std::string(fits::typeName(c.type))}});
    j["columns"] = cols;
    j["full_sky"] = src.fullSky();
    j["resolution_arcmin"] = healpix::resolutionArcmin(src.resolution());
    j["covered_area"] = static_cast<double>(src.rowCount()) * healpix::pixelArea(src.resolution());
    return j;
}

json frameInfo(const SkyFrame& f, const std::string& path) {
    const FrameSummary s = summarize(f);
    json j;
    j["kind"] = "frame";
    j["file"] = path;
    j["nside"] = f.resolution().nside();
    j["ordering"] = std::string(healpix::schemeName(f.scheme()));
    j["mode"] = std::string(modeName(s.mode));
    j["rows"] = s.rows;
    j["resolution_arcmin"] = healpix::resolutionArcmin(f.resolution());
    j["covered_area"] = s.coveredArea;
    json ws = json::array();
    for (const auto& w : s.windows) ws.push_back({{"type", w.type}, {"area", w.area}});
    j["windows"] = ws;
    json cols = json::array();
    for (const auto& c : s.columns)
        cols.push_back({{"name", c.name},
                        {"min", c.min},
                        {"q1", c.q1},
                        {"median", c.median},
                        {"mean", c.mean},
                        {"q3", c.q3},
                        {"max", c.max}});
    j["columns"] = cols;
    j["cards"] = s.cards;
    return j;
}

std::vector<std::string> splitList(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

fits::ColumnType parseTypeCode(const std::string& code) {
    if (code == "E") return fits::ColumnType::float32;
    if (code == "D") return fits::ColumnType::float64;
    if (code == "J") return fits::ColumnType::int32;
    if (code == "I") return fits::ColumnType::int16;
    throw ParseError("unknown column type code '" + code + "' (E, D, J, I)");
}

std::string fileNameOf(const std::string& url) {
    const auto slash = url.find_last_of('/');
    std::string name = slash == std::string::npos ? url : url.substr(slash + 1);
    const auto q = name.find('?');
    if (q != std::string::npos) name = name.substr(0, q);
    return name.empty() ? "download.bin" : name;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"spherestat: HEALPix maps, spherical windows and geostatistics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "spherestat 0.1.0");

    std::optional<std::string> configPath;
    app.add_option("--config", configPath, "Key/value configuration file (else $SPHERESTAT_CONFIG)");

    Stage stage;
    std::function<void()> action;

    // Shared option holders.
    FrameInput fin;
    std::string output;
    std::string format;
    std::string columnsText;
    std::string column;
    bool degrees = false;

    auto addFrameInput = [&](CLI::App* sub, bool withSample) {
        sub->add_option("input", fin.path, "Map FITS file or frame CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--columns", columnsText, "Comma-separated map columns to read (default: all)");
        if (withSample) {
            sub->add_option("--sample", fin.sample, "Random sample of this many rows before estimating")
                ->check(CLI::NonNegativeNumber);
            sub->add_option("--seed", fin.seed, "Seed for every random choice");
        }
    };
    std::map<const CLI::App*, std::string> defaultFormat;
    auto addOutput = [&](CLI::App* sub, const std::string& fallback, std::vector<std::string> formats) {
        sub->add_option("-o,--output", output, "Output file (default: standard output)");
        defaultFormat[sub] = fallback;
        sub->add_option("--format", format, "Output format (default: " + fallback + ")")
            ->check(CLI::IsMember(formats));
    };
    auto config = [&] { return Config::resolve(configPath); };
    auto frame = [&] {
        stage.name = "reading input";
        fin.columns = splitList(columnsText);
        return loadFrame(fin, config());
    };

    // info
    auto* info = app.add_subcommand("info", "Report header facts of a map or the summary of a frame");
    std::string infoPath;
    info->add_option("input", infoPath, "Map FITS file or frame CSV")->required();
    addOutput(info, "json", {"json", "text"});
    info->callback([&] {
        action = [&] {
            stage.name = "reading input";
            if (!std::filesystem::exists(infoPath)) throw IoError("no such file '" + infoPath + "'");
            Output o(output, out);
            if (isFits(infoPath)) {
                const auto src = fits::openMap(infoPath);
                const json j = mapInfo(src, infoPath);
                if (format == "json") {
                    o.get() << j.dump(2) << '\n';
                } else {
                    o.get() << "nside: " << j["nside"] << "\nordering: " << healpix::schemeName(src.scheme()) << "\nrows: " << j["rows"]
                            << "\nresolution_arcmin: " << formatNumber(j["resolution_arcmin"].get<double>()) << '\n';
                    for (const auto& c : src.columns())
                        o.get() << "column " << c.name << ": " << fits::typeName(c.type) << '\n';
                }
            } else {
                const SkyFrame f = readFrameCsv(infoPath);
                if (format == "json")
                    o.get() << frameInfo(f, infoPath).dump(2) << '\n';
                else
                    o.get() << formatSummary(summarize(f));
            }
            o.close();
        };
    });

    // sample
    auto* sample = app.add_subcommand("sample", "Draw a seeded simple random sample of rows into a frame CSV");
    addFrameInput(sample, false);
    std::int64_t sampleSize = 0;
    sample->add_option("--size", sampleSize, "Number of rows")->required()->check(CLI::NonNegativeNumber);
    sample->add_option("--seed", fin.seed, "Seed");
    sample->add_option("-o,--output", output, "Frame CSV to write")->required();
    sample->callback([&] {
        action = [&] {
            fin.sample = sampleSize;
            if (sampleSize == 0) throw DomainError("--size must be positive");
            const SkyFrame f = frame();
            stage.name = "writing output";
            writeFrameCsv(f, output);
        };
    });

    // window
    auto* window = app.add_subcommand("window", "Keep the rows whose pixel centre lies in a region");
    addFrameInput(window, false);
    std::string specPath;
    window->add_option("--spec", specPath, "Window specification JSON")->required()->check(CLI::ExistingFile);
    window->add_flag("--degrees", degrees, "Angles in the specification are degrees");
    window->add_option("-o,--output", output, "Frame CSV to write")->required();
    window->callback([&] {
        action = [&] {
            stage.name = "reading window specification";
            const WindowSet region = loadWindowSet(specPath, degrees ? kDeg : 1.0);
            stage.name = "reading input";
            SkyFrame f = SkyFrame::fullSky(healpix::Resolution::fromOrder(0), healpix::Scheme::nested);
            if (isFits(fin.path)) {
                // Select by pixel centre first so only the kept rows are read.
                const auto src = fits::openMap(fin.path);
                if (!src.fullSky()) throw FormatError("window on a FITS input needs a full-sky map");
                std::vector<std::int64_t> rows;
                for (std::int64_t r = 1; r <= src.rowCount(); ++r)
                    if (region.contains(healpix::pixelCenter(healpix::PixelId{r, src.scheme(), src.resolution()})))
                        rows.push_back(r);
                const auto cols = columnsText.empty() ? src.columnNames() : splitList(columnsText);
                f = frameFromMap(src, rows, cols, config().list("summary.cards")).withWindows(region.windows);
            } else {
                stage.name = "extracting window";
                f = extractWindow(readFrameCsv(fin.path), region);
            }
            stage.name = "writing output";
            writeFrameCsv(f, output);
        };
    });

    // cov / variogram
    double maxDist = 0.0;
    int bins = 10;
    std::int64_t pairBudget = PairOptions{}.pairBudget;
    auto addCurveOptions = [&](CLI::App* sub) {
        addFrameInput(sub, true);
        sub->add_option("--column", column, "Data column")->required();
        sub->add_option("--max-dist", maxDist, "Largest lag (radians unless --degrees)")->required();
        sub->add_option("--bins", bins, "Number of lag bins")->check(CLI::PositiveNumber);
        sub->add_option("--pair-budget", pairBudget, "Pairs above this count are subsampled")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--degrees", degrees, "--max-dist is in degrees");
        addOutput(sub, "csv", {"csv", "json"});
    };
    auto curveAction = [&](CurveKind kind) {
        return [&, kind] {
            const SkyFrame f = frame();
            stage.name = kind == CurveKind::covariance ? "empirical covariance" : "empirical variogram";
            const PairOptions po{pairBudget, fin.seed};
            const double md = degrees ? maxDist * kDeg : maxDist;
            const EmpiricalCurve c = kind == CurveKind::covariance ? empiricalCovariance(f, column, md, bins, po)
                                                                   : empiricalVariogram(f, column, md, bins, po);
            stage.name = "writing output";
            Output o(output, out);
            writeCurve(c, format, o.get());
            o.close();
        };
    };
    auto* cov = app.add_subcommand("cov", "Empirical covariance by geodesic lag bins");
    addCurveOptions(cov);
    cov->callback([&] { action = curveAction(CurveKind::covariance); });
    auto* vario = app.add_subcommand("variogram", "Empirical variogram by geodesic lag bins");
    addCurveOptions(vario);
    vario->callback([&] { action = curveAction(CurveKind::variogram); });

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a parametric variogram model to an empirical curve");
    std::string curvePath, familyText = "exponential", weightsText = "equal";
    bool freeNugget = false, fixKappa = false;
    std::optional<double> initSigma, initPsi, initKappa, initKappa2, initNugget;
    std::uint64_t fitSeed = 1;
    fit->add_option("curve", curvePath, "Curve CSV written by cov or variogram")->required()->check(CLI::ExistingFile);
    fit->add_option("--family", familyText, "Covariance family");
    fit->add_option("--weights", weightsText, "equal, npairs or cressie")
        ->check(CLI::IsMember({"equal", "npairs", "cressie"}));
    fit->add_flag("--free-nugget", freeNugget, "Estimate the nugget too");
    fit->add_flag("--fix-kappa", fixKappa, "Hold the shape parameter(s) at their initial values");
    fit->add_option("--sigma2", initSigma, "Initial variance");
    fit->add_option("--psi", initPsi, "Initial range");
    fit->add_option("--kappa", initKappa, "Initial shape");
    fit->add_option("--kappa2", initKappa2, "Initial second shape (gencauchy)");
    fit->add_option("--nugget", initNugget, "Initial (or fixed) nugget");
    fit->add_option("--seed", fitSeed, "Seed for restart perturbations");
    fit->add_option("-o,--output", output, "JSON file to write (default: standard output)");
    fit->callback([&] {
        action = [&] {
            stage.name = "reading curve";
            EmpiricalCurve c = readCurve(curvePath);
            const CovFamily family = parseFamily(familyText);
            FitOptions opt;
            opt.weights = parseWeights(weightsText);
            opt.fixNugget = !freeNugget;
            opt.fixKappa = fixKappa;
            opt.seed = fitSeed;
            if (initSigma || initPsi || initKappa || initKappa2 || initNugget) {
                CovarianceModel m = defaultFitStart(c, family);
                if (initSigma) m.sigmaSq = *initSigma;
                if (initPsi) m.psi = *initPsi;
                if (initKappa) m.kappa = *initKappa;
                if (initKappa2) m.kappa2 = *initKappa2;
                m.nugget = initNugget.value_or(0.0);
                opt.init = m;
            }
            stage.name = "fitting";
            const FitResult r = fitVariogram(c, family, opt);
            json j = modelJson(r.model);
            j["weights"] = std::string(weightsName(opt.weights));
            j["objective"] = r.objective;
            j["converged"] = r.converged;
            j["iterations"] = r.iterations;
            j["notes"] = r.notes;
            stage.name = "writing output";
            Output o(output, out);
            o.get() << j.dump(2) << '\n';
            o.close();
        };
    });

    // covps
    auto* covps = app.add_subcommand("covps", "Covariance from an angular power spectrum");
    std::string psPath, conventionText;
    int lMax = 0, gridSize = 181;
    covps->add_option("spectrum", psPath, "CSV with columns l and C_l or D_l")->required()->check(CLI::ExistingFile);
    covps->add_option("--lmax", lMax, "Highest multipole")->required()->check(CLI::NonNegativeNumber);
    covps->add_option("--grid-size", gridSize, "Number of angles, equally spaced on [0, pi]")->check(CLI::Range(2, 1000000));
    covps->add_option("--convention", conventionText, "Override the header: C_l or D_l")
        ->check(CLI::IsMember({"C_l", "D_l"}));
    addOutput(covps, "csv", {"csv", "json"});
    covps->callback([&] {
        action = [&] {
            stage.name = "reading spectrum";
            std::optional<SpectrumConvention> conv;
            if (!conventionText.empty())
                conv = conventionText == "D_l" ? SpectrumConvention::Dl : SpectrumConvention::Cl;
            const PowerSpectrum ps = readPowerSpectrum(psPath, conv);
            std::vector<double> theta, grid;
            for (int i = 0; i < gridSize; ++i) {
                theta.push_back(kPi * i / (gridSize - 1));
                grid.push_back(i == 0 ? 1.0 : i == gridSize - 1 ? -1.0 : std::cos(theta.back()));
            }
            stage.name = "summing the Legendre series";
            const SpectrumCovariance sc = covFromPowerSpectrum(ps, lMax, grid);
            for (const auto& n : sc.notes) err << "note: " << n << '\n';
            stage.name = "writing output";
            Output o(output, out);
            if (format == "json") {
                json j;
                j["lmax_used"] = sc.lMaxUsed;
                j["theta"] = theta;
                j["cos_theta"] = sc.cosTheta;
                j["covariance"] = sc.values;
                j["notes"] = sc.notes;
                o.get() << j.dump(2) << '\n';
            } else {
                o.get() << "theta,cos_theta,covariance\n";
                for (std::size_t i = 0; i < grid.size(); ++i)
                    o.get() << formatNumber(theta[i]) << ',' << formatNumber(sc.cosTheta[i]) << ','
                            << formatNumber(sc.values[i]) << '\n';
            }
            o.close();
        };
    });

    // entropy
    auto* ent = app.add_subcommand("entropy", "Histogram entropy of a column, in bits");
    addFrameInput(ent, true);
    std::optional<int> entBins;
    ent->add_option("--column", column, "Data column")->required();
    ent->add_option("--bins", entBins, "Histogram bins (default: Sturges)")->check(CLI::PositiveNumber);
    addOutput(ent, "text", {"text", "json"});
    ent->callback([&] {
        action = [&] {
            const SkyFrame f = frame();
            stage.name = "entropy";
            const double e = entropy(f, column, entBins);
            Output o(output, out);
            writeScalar("entropy", e, format, o.get());
            o.close();
        };
    });

    // fmf
    auto* fmf = app.add_subcommand("fmf", "First Minkowski functional: area above a threshold");
    addFrameInput(fmf, true);
    double alpha = 0.0;
    fmf->add_option("--column", column, "Data column")->required();
    fmf->add_option("--alpha", alpha, "Threshold")->required();
    addOutput(fmf, "text", {"text", "json"});
    fmf->callback([&] {
        action = [&] {
            const SkyFrame f = frame();
            stage.name = "first Minkowski functional";
            const double a = firstMinkowski(f, column, alpha);
            Output o(output, out);
            writeScalar("area", a, format, o.get());
            o.close();
        };
    });

    // renyi
    auto* renyi = app.add_subcommand("renyi", "Sample Renyi function on a grid of q");
    addFrameInput(renyi, true);
    double qMin = 1.01, qMax = 10.0;
    int qCount = 20, boxLevel = 1;
    renyi->add_option("--column", column, "Data column")->required();
    renyi->add_option("--qmin", qMin, "Smallest q");
    renyi->add_option("--qmax", qMax, "Largest q");
    renyi->add_option("--n", qCount, "Grid size")->check(CLI::PositiveNumber);
    renyi->add_option("--box-level", boxLevel, "HEALPix order of the boxes")->check(CLI::PositiveNumber);
    addOutput(renyi, "csv", {"csv", "json"});
    renyi->callback([&] {
        action = [&] {
            const SkyFrame f = frame();
            stage.name = "Renyi function";
            const auto pts = renyiFunction(f, column, qMin, qMax, qCount, boxLevel);
            Output o(output, out);
            if (format == "json") {
                json j = json::array();
                for (const auto& p : pts) j.push_back({{"q", p.q}, {"T", p.t}});
                o.get() << j.dump(2) << '\n';
            } else {
                o.get() << "q,T\n";
                for (const auto& p : pts) o.get() << formatNumber(p.q) << ',' << formatNumber(p.t) << '\n';
            }
            o.close();
        };
    });

    // qstat
    auto* qstat = app.add_subcommand("qstat", "Stratified heterogeneity q-statistic");
    addFrameInput(qstat, true);
    std::vector<std::string> strataPaths;
    qstat->add_option("--column", column, "Data column")->required();
    qstat->add_option("--strata", strataPaths, "Window specification JSON per stratum")
        ->required()
        ->check(CLI::ExistingFile);
    qstat->add_flag("--degrees", degrees, "Angles in the specifications are degrees");
    addOutput(qstat, "text", {"text", "json"});
    qstat->callback([&] {
        action = [&] {
            stage.name = "reading strata";
            std::vector<WindowSet> strata;
            for (const auto& p : strataPaths) strata.push_back(loadWindowSet(p, degrees ? kDeg : 1.0));
            const SkyFrame f = frame();
            stage.name = "q-statistic";
            const auto q = qStatistic(f, column, strata);
            if (!q) err << "note: total variance is zero; q is undefined\n";
            Output o(output, out);
            writeScalar("q", q, format, o.get());
            o.close();
        };
    });

    // qq
    auto* qq = app.add_subcommand("qq", "Matched quantiles of a column inside two regions");
    addFrameInput(qq, true);
    std::string regionA, regionB;
    int nQuant = 100;
    qq->add_option("--column", column, "Data column")->required();
    qq->add_option("--region-a", regionA, "Window specification JSON")->required()->check(CLI::ExistingFile);
    qq->add_option("--region-b", regionB, "Window specification JSON")->required()->check(CLI::ExistingFile);
    qq->add_option("--n", nQuant, "Number of probability points")->check(CLI::PositiveNumber);
    qq->add_flag("--degrees", degrees, "Angles in the specifications are degrees");
    addOutput(qq, "csv", {"csv", "json"});
    qq->callback([&] {
        action = [&] {
            stage.name = "reading regions";
            const double scale = degrees ? kDeg : 1.0;
            const WindowSet a = loadWindowSet(regionA, scale), b = loadWindowSet(regionB, scale);
            const SkyFrame f = frame();
            stage.name = "quantiles";
            const auto pts = qqPairs(f, column, a, b, nQuant);
            Output o(output, out);
            if (format == "json") {
                json j = json::array();
                for (const auto& p : pts) j.push_back({{"p", p.p}, {"quantile_a", p.a}, {"quantile_b", p.b}});
                o.get() << j.dump(2) << '\n';
            } else {
                o.get() << "p,quantile_a,quantile_b\n";
                for (const auto& p : pts)
                    o.get() << formatNumber(p.p) << ',' << formatNumber(p.a) << ',' << formatNumber(p.b) << '\n';
            }
            o.close();
        };
    });

    // angdist
    auto* ang = app.add_subcommand("angdist", "Column means over theta and phi bins");
    addFrameInput(ang, true);
    int thetaBins = 18, phiBins = 36;
    ang->add_option("--column", column, "Data column")->required();
    ang->add_option("--theta-bins", thetaBins, "Bins over [0, pi]")->check(CLI::PositiveNumber);
    ang->add_option("--phi-bins", phiBins, "Bins over [0, 2 pi)")->check(CLI::PositiveNumber);
    addOutput(ang, "csv", {"csv", "json"});
    ang->callback([&] {
        action = [&] {
            const SkyFrame f = frame();
            stage.name = "angular marginals";
            const AngularMarginals m = angularMarginals(f, column, thetaBins, phiBins);
            Output o(output, out);
            if (format == "json") {
                auto table = [](const std::vector<MarginalBin>& bins) {
                    json t = json::array();
                    for (const auto& b : bins)
                        t.push_back({{"center", b.center},
                                     {"mean", b.mean ? json(*b.mean) : json(nullptr)},
                                     {"count", b.count}});
                    return t;
                };
                o.get() << json{{"theta", table(m.theta)}, {"phi", table(m.phi)}}.dump(2) << '\n';
            } else {
                o.get() << "axis,center,mean,count\n";
                auto rows = [&](const char* axis, const std::vector<MarginalBin>& bins) {
                    for (const auto& b : bins)
                        o.get() << axis << ',' << formatNumber(b.center) << ','
                                << formatNumber(b.mean.value_or(std::nan(""))) << ',' << b.count << '\n';
                };
                rows("theta", m.theta);
                rows("phi", m.phi);
            }
            o.close();
        };
    });

    // plot
    auto* plot = app.add_subcommand("plot", "Render an SVG chart");
    std::string plotKind, plotInput, fitPath, axis = "theta", title;
    std::int64_t plotSample = 0;
    plot->add_option("kind", plotKind, "variogram, renyi, angdist, qq, covps or map")
        ->required()
        ->check(CLI::IsMember({"variogram", "renyi", "angdist", "qq", "covps", "map"}));
    plot->add_option("input", plotInput, "CSV produced by the matching subcommand, or a map/frame for 'map'")
        ->required()
        ->check(CLI::ExistingFile);
    plot->add_option("--fit", fitPath, "Fitted model JSON to overlay (variogram)")->check(CLI::ExistingFile);
    plot->add_option("--axis", axis, "Marginal to draw (angdist)")->check(CLI::IsMember({"theta", "phi"}));
    plot->add_option("--column", column, "Data column (map)");
    plot->add_option("--sample", plotSample, "Points to draw (map; default: up to 50000)");
    plot->add_option("--seed", fin.seed, "Seed for the map sample");
    plot->add_option("--title", title, "Chart title");
    plot->add_option("-o,--output", output, "SVG file to write")->required();
    plot->callback([&] {
        action = [&] {
            stage.name = "reading input";
            std::string svgText;
            svg::Chart chart;
            chart.title = title;
            if (plotKind == "variogram") {
                const EmpiricalCurve c = readCurve(plotInput);
                const bool isCov = c.kind == CurveKind::covariance;
                svg::Series pts{isCov ? "empirical covariance" : "empirical variogram", c.lags, c.values,
                                svg::Style::points, ""};
                chart.series.push_back(pts);
                if (!fitPath.empty()) {
                    const CovarianceModel m = modelFromJson(readJsonFile(fitPath));
                    svg::Series line{"fitted " + std::string(familyName(m.family)), {}, {}, svg::Style::line, ""};
                    for (int i = 1; i <= 200; ++i) {
                        const double h = std::min(kPi, c.maxDist * i / 200.0);
                        line.x.push_back(h);
                        line.y.push_back(isCov ? covModel(h, m) : variogramModel(h, m));
                    }
                    chart.series.push_back(line);
                }
                chart.xLabel = "lag (radians)";
                chart.yLabel = isCov ? "covariance" : "semivariance";
                svgText = svg::render(chart);
            } else if (plotKind == "renyi" || plotKind == "qq" || plotKind == "covps") {
                const CsvTable t = readCsv(plotInput);
                const std::size_t ix = plotKind == "renyi" ? t.columnIndex("q")
                                       : plotKind == "qq"  ? t.columnIndex("quantile_a")
                                                           : t.columnIndex("theta");
                const std::size_t iy = plotKind == "renyi" ? t.columnIndex("T")
                                       : plotKind == "qq"  ? t.columnIndex("quantile_b")
                                                           : t.columnIndex("covariance");
                svg::Series s{"", {}, {}, plotKind == "qq" ? svg::Style::points : svg::Style::line, ""};
                for (const auto& row : t.rows) {
                    s.x.push_back(row[ix]);
                    s.y.push_back(row[iy]);
                }
                if (plotKind == "qq" && !s.x.empty()) {
                    const auto [lo, hi] = std::minmax_element(s.x.begin(), s.x.end());
                    chart.series.push_back({"y = x", {*lo, *hi}, {*lo, *hi}, svg::Style::line, "#999999"});
                }
                chart.series.push_back(s);
                chart.xLabel = plotKind == "renyi" ? "q" : plotKind == "qq" ? "quantiles, region A" : "theta (radians)";
                chart.yLabel = plotKind == "renyi" ? "T(q)" : plotKind == "qq" ? "quantiles, region B" : "covariance";
                svgText = svg::render(chart);
            } else if (plotKind == "angdist") {
                // axis column is text, so parse by hand.
                std::ifstream in(plotInput);
                if (!in) throw IoError("cannot open '" + plotInput + "'");
                std::string line;
                std::getline(in, line);
                if (line.rfind("axis,center,mean,count", 0) != 0) throw SchemaError("not an angdist CSV");
                svg::Series s{"", {}, {}, svg::Style::bars, ""};
                while (std::getline(in, line)) {
                    std::stringstream ls(line);
                    std::string a, c, m;
                    std::getline(ls, a, ',');
                    std::getline(ls, c, ',');
                    std::getline(ls, m, ',');
                    if (a != axis) continue;
                    s.x.push_back(std::stod(c));
                    s.y.push_back(m == "nan" ? std::nan("") : std::stod(m));
                }
                chart.series.push_back(s);
                chart.xLabel = axis + " (radians)";
                chart.yLabel = "mean";
                svgText = svg::render(chart);
            } else {
                if (column.empty()) throw DomainError("plot map needs --column");
                fin.path = plotInput;
                fin.columns = {column};
                SkyFrame f = loadFrame({plotInput, {column}, 0, fin.seed}, config());
                const std::int64_t limit = plotSample > 0 ? plotSample : 50000;
                if (static_cast<std::int64_t>(f.size()) > limit) f = sampleFrame(f, limit, fin.seed);
                std::vector<SphericalPoint> pts;
                for (std::size_t i = 0; i < f.size(); ++i) pts.push_back(toSpherical(f.position(i)));
                svgText = svg::renderMollweide(pts, f.column(column).values, title);
            }
            stage.name = "writing output";
            svg::writeFile(output, svgText);
        };
    });

    // download
    auto* dl = app.add_subcommand("download", "Fetch a Planck map or power spectrum");
    std::string product, foreground = "smica";
    int nside = 1024, link = 1;
    bool offline = false, quiet = false;
    dl->add_option("product", product, "map or powerspectrum")
        ->required()
        ->check(CLI::IsMember({"map", "powerspectrum"}));
    dl->add_option("--foreground", foreground, "Component separation method")
        ->check(CLI::IsMember({"commander", "nilc", "sevem", "smica"}));
    dl->add_option("--nside", nside, "Map resolution")->check(CLI::IsMember({1024, 2048}));
    dl->add_option("--link", link, "Spectrum product number (config keys download.ps_url_<n>)")
        ->check(CLI::PositiveNumber);
    dl->add_flag("--offline", offline, "Never touch the network (cache hits only)");
    dl->add_flag("--quiet", quiet, "No progress output");
    dl->add_option("-o,--output", output, "Destination (default: cache directory)");
    dl->callback([&] {
        action = [&] {
            stage.name = "configuration";
            const Config cfg = config();
            std::string url;
            if (product == "map") {
                url = expandTemplate(cfg.getOr("download.map_url", ""),
                                     {{"foreground", foreground}, {"nside", std::to_string(nside)}});
            } else {
                const auto u = cfg.get("download.ps_url_" + std::to_string(link));
                if (!u) throw ParseError("no spectrum URL configured for link " + std::to_string(link));
                url = *u;
            }
            std::string fileName = fileNameOf(url);
            if (product == "powerspectrum") fileName = std::filesystem::path(fileName).stem().string() + ".csv";
            const std::string dest = output.empty() ? (std::filesystem::path(cfg.cacheDir()) / fileName).string() : output;
            if (std::filesystem::exists(dest)) {
                err << "using cached " << dest << '\n';
            } else {
                if (offline) throw NetworkError("offline mode: " + url + " is not cached at " + dest);
                stage.name = "downloading";
                if (!quiet) err << "downloading " << url << '\n';
                if (product == "map") {
                    fetchUrl(url, dest, quiet ? nullptr : &err);
                } else {
                    const std::string raw = dest + ".txt";
                    fetchUrl(url, raw, quiet ? nullptr : &err);
                    try {
                        reduceSpectrumText(raw, dest);
                    } catch (...) {
                        std::filesystem::remove(raw);
                        throw;
                    }
                    std::filesystem::remove(raw);
                }
            }
            stage.name = "verifying download";
            try {
                if (product == "map")
                    (void)fits::openMap(dest);
                else
                    (void)readPowerSpectrum(dest);
            } catch (...) {
                std::filesystem::remove(dest);
                throw;
            }
            out << dest << '\n';
        };
    });

    // mkfits
    auto* mk = app.add_subcommand("mkfits", "Write a synthetic full-sky HEALPix map");
    std::string orderingText = "nested", field = "gaussian", mkColumns = "I:E";
    int mkNside = 16;
    double constant = 1.0;
    std::uint64_t mkSeed = 0;
    mk->add_option("--nside", mkNside, "Resolution (power of two)")->check(CLI::PositiveNumber);
    mk->add_option("--ordering", orderingText, "nested or ring");
    mk->add_option("--columns", mkColumns, "name:type list, type one of E, D, J, I");
    mk->add_option("--field", field, "gaussian, costheta, ramp or constant")
        ->check(CLI::IsMember({"gaussian", "costheta", "ramp", "constant"}));
    mk->add_option("--value", constant, "Value for --field constant");
    mk->add_option("--seed", mkSeed, "Seed for --field gaussian");
    mk->add_option("-o,--output", output, "FITS file to write")->required();
    mk->callback([&] {
        action = [&] {
            stage.name = "building map";
            const auto res = healpix::Resolution::fromNside(mkNside);
            const auto scheme = healpix::parseScheme(orderingText);
            fits::Table t;
            t.rowCount = static_cast<std::size_t>(res.npix());
            std::uint64_t k = 0;
            for (const auto& spec : splitList(mkColumns)) {
                const auto colon = spec.find(':');
                fits::Column c;
                c.name = spec.substr(0, colon);
                c.type = parseTypeCode(colon == std::string::npos ? "E" : spec.substr(colon + 1));
                SplitMix64 rng(mkSeed + k++);
                c.values.resize(t.rowCount);
                for (std::size_t i = 0; i < t.rowCount; ++i) {
                    double v = constant;
                    if (field == "gaussian")
                        v = rng.normal();
                    else if (field == "costheta")
                        v = healpix::pixelCenter({static_cast<std::int64_t>(i) + 1, scheme, res}).z;
                    else if (field == "ramp")
                        v = static_cast<double>(i + 1);
                    if (c.type == fits::ColumnType::float32) v = static_cast<float>(v);
                    if (c.type == fits::ColumnType::int32 || c.type == fits::ColumnType::int16) v = std::round(v);
                    c.values[i] = v;
                }
                t.columns.push_back(std::move(c));
            }
            if (t.columns.empty()) throw DomainError("--columns names no column");
            stage.name = "writing output";
            fits::writeFits(t, {res, scheme, {}}, output);
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "usage error: " << e.what() << '\n';
        for (const auto* sub : app.get_subcommands()) err << sub->help();
        if (app.get_subcommands().empty()) err << "run with --help for the list of subcommands\n";
        return kExitUsage;
    }
    if (format.empty()) {
        for (const auto* sub : app.get_subcommands()) {
            const auto it = defaultFormat.find(sub);
            if (it != defaultFormat.end()) format = it->second;
        }
    }

    try {
        if (action) action();
        return kExitOk;
    } catch (const NetworkError& e) {
        err << "error (" << stage.name << "): " << e.what() << '\n';
        return kExitNetwork;
    } catch (const FormatError& e) {
        err << "error (" << stage.name << "): " << e.what() << '\n';
        return kExitUsage;
    } catch (const SchemaError& e) {
        err << "error (" << stage.name << "): " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "error (" << stage.name << "): " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error (" << stage.name << "): " << e.what() << '\n';
        return kExitCompute;
    }
}

} // namespace spherestat::cli
