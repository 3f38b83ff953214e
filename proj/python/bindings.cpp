#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spherestat/coords.hpp"
#include "spherestat/covariance.hpp"
#include "spherestat/errors.hpp"
#include "spherestat/fits.hpp"
#include "spherestat/frame_io.hpp"
#include "spherestat/geostat.hpp"
#include "spherestat/healpix.hpp"
#include "spherestat/sky_frame.hpp"
#include "spherestat/windows.hpp"

namespace py = pybind11;
using namespace spherestat;

namespace {

healpix::Resolution res(std::int64_t nside) { return healpix::Resolution::fromNside(nside); }

healpix::PixelId pix(std::int64_t index, std::int64_t nside, const std::string& ordering) {
    return healpix::makePixel(index, healpix::parseScheme(ordering), res(nside));
}

py::tuple spherical(const UnitVector& v) {
    const auto s = toSpherical(v);
    return py::make_tuple(s.theta, s.phi);
}

UnitVector vec(double theta, double phi) { return toUnitVector(SphericalPoint{theta, phi}); }

CovarianceModel model(const std::string& family, double sigma2, double psi, double kappa, double kappa2,
                      double nugget) {
    return CovarianceModel{parseFamily(family), sigma2, psi, kappa, kappa2, nugget};
}

py::dict curveDict(const EmpiricalCurve& c) {
    py::dict d;
    d["kind"] = c.kind == CurveKind::covariance ? "covariance" : "variogram";
    d["lags"] = c.lags;
    d["values"] = c.values;
    d["counts"] = c.counts;
    d["max_dist"] = c.maxDist;
    d["bins"] = c.bins;
    return d;
}

WindowSet windowSet(const std::vector<Window>& ws) { return WindowSet{ws}; }

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "HEALPix pixelation, spherical windows, FITS maps and geostatistics on the sphere";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> base;
    base.call_once_and_store_result([&] { return py::exception<Error>(m, "Error"); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DomainError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const ParameterError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            py::set_error(base.get_stored(), e.what());
        }
    });

    // HEALPix
    m.def("npix", [](std::int64_t nside) { return res(nside).npix(); });
    m.def("pixel_area", [](std::int64_t nside) { return healpix::pixelArea(res(nside)); });
    m.def("resolution_arcmin", [](std::int64_t nside) { return healpix::resolutionArcmin(res(nside)); });
    m.def("nest_to_ring", [](std::int64_t i, std::int64_t nside) { return healpix::nestToRing(i, res(nside)); });
    m.def("ring_to_nest", [](std::int64_t i, std::int64_t nside) { return healpix::ringToNest(i, res(nside)); });
    m.def("ancestor", py::overload_cast<std::int64_t, int>(&healpix::ancestor), py::arg("index"), py::arg("k"));
    m.def("pixel_window", &healpix::pixelWindow, py::arg("j1"), py::arg("j2"), py::arg("pixel"));
    m.def(
        "pixel_center",
        [](std::int64_t i, std::int64_t nside, const std::string& ordering) {
            return spherical(healpix::pixelCenter(pix(i, nside, ordering)));
        },
        py::arg("index"), py::arg("nside"), py::arg("ordering") = "nested");
    m.def(
        "pixel_containing",
        [](double theta, double phi, std::int64_t nside, const std::string& ordering) {
            return healpix::pixelContaining(vec(theta, phi), res(nside), healpix::parseScheme(ordering)).index;
        },
        py::arg("theta"), py::arg("phi"), py::arg("nside"), py::arg("ordering") = "nested");
    m.def(
        "neighbours",
        [](std::int64_t i, std::int64_t nside, const std::string& ordering) {
            std::vector<std::int64_t> out;
            for (const auto& p : healpix::neighbours(pix(i, nside, ordering))) out.push_back(p.index);
            return out;
        },
        py::arg("index"), py::arg("nside"), py::arg("ordering") = "nested");
    m.def(
        "nest_search",
        [](double theta, double phi, std::int64_t nside) {
            const auto r = healpix::nestSearch(vec(theta, phi), res(nside));
            py::dict d;
            d["pixel"] = r.pixel.index;
            d["visited"] = r.visited;
            d["distance"] = r.distance;
            return d;
        },
        py::arg("theta"), py::arg("phi"), py::arg("nside"));
    m.def(
        "pixel_boundary",
        [](std::int64_t i, std::int64_t nside, const std::string& ordering, int step) {
            std::vector<py::tuple> out;
            for (const auto& v : healpix::pixelBoundary(pix(i, nside, ordering), step)) out.push_back(spherical(v));
            return out;
        },
        py::arg("index"), py::arg("nside"), py::arg("ordering") = "nested", py::arg("step") = 1);

    // Geometry
    m.def(
        "geodesic_distance",
        [](double t1, double p1, double t2, double p2) { return geodesicDistance(vec(t1, p1), vec(t2, p2)); },
        py::arg("theta1"), py::arg("phi1"), py::arg("theta2"), py::arg("phi2"));
    m.def("hms_to_degrees", &hmsToDegrees, py::arg("h"), py::arg("m"), py::arg("s"));

    py::class_<Window>(m, "Window")
        .def_static(
            "disc", [](double theta, double phi, double r, bool complement) {
                return Window::disc({theta, phi}, r, complement);
            },
            py::arg("theta"), py::arg("phi"), py::arg("r"), py::arg("complement") = false)
        .def_static(
            "polygon",
            [](const std::vector<std::pair<double, double>>& vertices, bool complement, bool assumedConvex) {
                std::vector<SphericalPoint> v;
                for (const auto& [t, p] : vertices) v.push_back({t, p});
                return Window::polygon(v, complement, assumedConvex);
            },
            py::arg("vertices"), py::arg("complement") = false, py::arg("assumed_convex") = false)
        .def_property_readonly("area", &Window::area)
        .def_property_readonly("type", [](const Window& w) { return std::string(w.typeName()); })
        .def("contains", [](const Window& w, double theta, double phi) { return w.contains(vec(theta, phi)); })
        .def("complemented", &Window::complemented);

    m.def(
        "region_contains",
        [](const std::vector<Window>& ws, double theta, double phi) { return windowSet(ws).contains(vec(theta, phi)); },
        py::arg("windows"), py::arg("theta"), py::arg("phi"));

    // FITS
    py::class_<fits::MapSource>(m, "MapSource")
        .def_property_readonly("nside", [](const fits::MapSource& s) { return s.resolution().nside(); })
        .def_property_readonly("ordering",
                               [](const fits::MapSource& s) { return std::string(healpix::schemeName(s.scheme())); })
        .def_property_readonly("rows", &fits::MapSource::rowCount)
        .def_property_readonly("columns", &fits::MapSource::columnNames)
        .def(
            "read_rows",
            [](const fits::MapSource& s, const std::vector<std::int64_t>& rows, const std::vector<std::string>& cols) {
                const auto t = fits::readRows(s, rows, cols);
                py::dict d;
                for (const auto& c : t.columns) d[py::str(c.name)] = c.values;
                return d;
            },
            py::arg("rows"), py::arg("columns"));
    m.def("open_map", py::overload_cast<const std::string&>(&fits::openMap), py::arg("path"));
    m.def(
        "write_fits",
        [](const std::string& path, std::int64_t nside, const std::string& ordering,
           const std::map<std::string, std::vector<double>>& columns) {
            fits::Table t;
            for (const auto& [name, values] : columns) {
                t.rowCount = values.size();
                t.columns.push_back({name, fits::ColumnType::float64, values});
            }
            fits::writeFits(t, {res(nside), healpix::parseScheme(ordering), {}}, path);
        },
        py::arg("path"), py::arg("nside"), py::arg("ordering"), py::arg("columns"));

    // Frames
    py::class_<SkyFrame>(m, "SkyFrame")
        .def_static(
            "full_sky",
            [](std::int64_t nside, const std::string& ordering, const std::map<std::string, std::vector<double>>& cols) {
                std::vector<DataColumn> dc;
                for (const auto& [k, v] : cols) dc.push_back({k, v});
                return SkyFrame::fullSky(res(nside), healpix::parseScheme(ordering), dc);
            },
            py::arg("nside"), py::arg("ordering") = "nested",
            py::arg("columns") = std::map<std::string, std::vector<double>>{})
        .def_static(
            "from_map",
            [](const fits::MapSource& src, std::optional<std::vector<std::int64_t>> rows,
               const std::vector<std::string>& cols) {
                if (rows) return frameFromMap(src, *rows, cols);
                return frameFromMap(src, AllRows{}, cols);
            },
            py::arg("source"), py::arg("rows") = py::none(), py::arg("columns") = std::vector<std::string>{})
        .def_static("read_csv", &readFrameCsv, py::arg("path"))
        .def("write_csv", [](const SkyFrame& f, const std::string& path) { writeFrameCsv(f, path); })
        .def("__len__", &SkyFrame::size)
        .def_property_readonly("nside", [](const SkyFrame& f) { return f.resolution().nside(); })
        .def_property_readonly("mode", [](const SkyFrame& f) { return std::string(modeName(f.mode())); })
        .def_property_readonly("pixels", &SkyFrame::pixels)
        .def_property_readonly("column_names",
                               [](const SkyFrame& f) {
                                   std::vector<std::string> n;
                                   for (const auto& c : f.columns()) n.push_back(c.name);
                                   return n;
                               })
        .def("column", [](const SkyFrame& f, const std::string& name) { return f.column(name).values; })
        .def("extract_window",
             [](const SkyFrame& f, const std::vector<Window>& ws) { return extractWindow(f, windowSet(ws)); })
        .def("sample", &sampleFrame, py::arg("size"), py::arg("seed") = 0)
        .def("geo_area", &geoArea)
        .def("summary", [](const SkyFrame& f) { return formatSummary(summarize(f)); });
    m.def(
        "assign_pixels",
        [](const std::vector<std::pair<double, double>>& points, const std::map<std::string, std::vector<double>>& cols,
           std::int64_t nside, bool requireUnique) {
            std::vector<SphericalPoint> pts;
            for (const auto& [t, p] : points) pts.push_back({t, p});
            std::vector<DataColumn> dc;
            for (const auto& [k, v] : cols) dc.push_back({k, v});
            return assignPixels(pts, dc, res(nside), requireUnique);
        },
        py::arg("points"), py::arg("columns"), py::arg("nside"), py::arg("require_unique") = false);

    // Geostatistics
    m.def(
        "cov_model",
        [](double h, const std::string& family, double sigma2, double psi, double kappa, double kappa2, double nugget) {
            return covModel(h, model(family, sigma2, psi, kappa, kappa2, nugget));
        },
        py::arg("h"), py::arg("family"), py::arg("sigma2") = 1.0, py::arg("psi") = 1.0, py::arg("kappa") = 1.0,
        py::arg("kappa2") = 1.0, py::arg("nugget") = 0.0);
    m.def("bessel_k", &besselK, py::arg("nu"), py::arg("x"));
    m.def(
        "empirical_covariance",
        [](const SkyFrame& f, const std::string& column, double maxDist, int bins) {
            return curveDict(empiricalCovariance(f, column, maxDist, bins));
        },
        py::arg("frame"), py::arg("column"), py::arg("max_dist"), py::arg("bins"));
    m.def(
        "empirical_variogram",
        [](const SkyFrame& f, const std::string& column, double maxDist, int bins) {
            return curveDict(empiricalVariogram(f, column, maxDist, bins));
        },
        py::arg("frame"), py::arg("column"), py::arg("max_dist"), py::arg("bins"));
    m.def(
        "fit_variogram",
        [](const std::vector<double>& lags, const std::vector<double>& values, const std::vector<std::int64_t>& counts,
           double maxDist, const std::string& family, const std::string& weights, bool fixNugget, bool fixKappa) {
            EmpiricalCurve c;
            c.lags = lags;
            c.values = values;
            c.counts = counts;
            c.maxDist = maxDist;
            c.bins = static_cast<int>(lags.size()) - 1;
            FitOptions opt;
            opt.weights = parseWeights(weights);
            opt.fixNugget = fixNugget;
            opt.fixKappa = fixKappa;
            const auto r = fitVariogram(c, parseFamily(family), opt);
            py::dict d;
            d["family"] = std::string(familyName(r.model.family));
            d["sigma2"] = r.model.sigmaSq;
            d["psi"] = r.model.psi;
            d["kappa"] = r.model.kappa;
            d["kappa2"] = r.model.kappa2;
            d["nugget"] = r.model.nugget;
            d["objective"] = r.objective;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("lags"), py::arg("values"), py::arg("counts"), py::arg("max_dist"), py::arg("family"),
        py::arg("weights") = "equal", py::arg("fix_nugget") = true, py::arg("fix_kappa") = false);
    m.def(
        "cov_from_power_spectrum",
        [](const std::vector<int>& ell, const std::vector<double>& values, const std::string& convention, int lMax,
           const std::vector<double>& grid) {
            PowerSpectrum ps{ell, values, convention == "D_l" ? SpectrumConvention::Dl : SpectrumConvention::Cl};
            return covFromPowerSpectrum(ps, lMax, grid).values;
        },
        py::arg("ell"), py::arg("values"), py::arg("convention"), py::arg("lmax"), py::arg("grid"));
    m.def(
        "entropy", [](const std::vector<double>& v, std::optional<int> bins) { return entropy(v, bins); },
        py::arg("values"), py::arg("bins") = py::none());
    m.def("first_minkowski", &firstMinkowski, py::arg("frame"), py::arg("column"), py::arg("alpha"));
    m.def(
        "renyi_function",
        [](const SkyFrame& f, const std::string& column, double qMin, double qMax, int n, int boxLevel) {
            std::vector<std::pair<double, double>> out;
            for (const auto& p : renyiFunction(f, column, qMin, qMax, n, boxLevel)) out.emplace_back(p.q, p.t);
            return out;
        },
        py::arg("frame"), py::arg("column"), py::arg("q_min"), py::arg("q_max"), py::arg("n"), py::arg("box_level"));
    m.def(
        "q_statistic", [](const std::vector<std::vector<double>>& strata) { return qStatistic(strata); },
        py::arg("strata"));
    m.def(
        "qq_pairs",
        [](const std::vector<double>& a, const std::vector<double>& b, int n) {
            std::vector<std::tuple<double, double, double>> out;
            for (const auto& p : qqPairs(a, b, n)) out.emplace_back(p.p, p.a, p.b);
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("n"));
}
