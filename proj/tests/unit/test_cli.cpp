#ifdef SPHERESTAT_HAVE_CLI

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "simulate.hpp"
#include "spherestat/errors.hpp"
#include "spherestat/frame_io.hpp"
#include "spherestat/geostat.hpp"

using namespace spherestat;
using spherestat::testing::TempDir;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config grammar") {
    cli::Config c = cli::Config::defaults();
    CHECK(c.get("download.map_url").has_value());
    CHECK(c.list("summary.cards") == std::vector<std::string>{"METHOD"});
    c.parse("# comment\ntop = 1\n[download]\nmap_url = \"a \\\"b\\\"\"  # note\nextra=  x y \n", "test");
    CHECK(c.get("top") == "1");
    CHECK(c.get("download.map_url") == "a \"b\"");
    CHECK(c.get("download.extra") == "x y");
    CHECK_THROWS_AS(c.parse("novalue\n", "test"), ParseError);
    CHECK(cli::expandTemplate("m_{a}_{b}.fits", {{"a", "x"}, {"b", "1"}}) == "m_x_1.fits");
    CHECK_THROWS_AS(cli::expandTemplate("{zzz}", {}), ParseError);
}

TEST_CASE("mkfits, info and window") {
    TempDir dir("cli");
    const auto map = dir.file("m.fits");
    REQUIRE(invoke({"mkfits", "--nside", "16", "--field", "costheta", "--columns", "I:E,Q:D", "-o", map}).code == 0);

    const Result info = invoke({"info", map});
    REQUIRE(info.code == 0);
    const json j = json::parse(info.out);
    CHECK(j["nside"] == 16);
    CHECK(j["ordering"] == "nested");
    CHECK(j["rows"] == 3072);
    CHECK(j["columns"].size() == 2);
    CHECK(j["full_sky"] == true);
    CHECK(j["resolution_arcmin"].get<double>() == doctest::Approx(219.87).epsilon(1e-3));

    const auto spec = dir.file("cap.json");
    std::ofstream(spec) << R"({"kind": "disc", "center": {"theta": 0, "phi": 0}, "r": 61})";
    const auto capCsv = dir.file("cap.csv");
    REQUIRE(invoke({"window", map, "--spec", spec, "--degrees", "-o", capCsv}).code == 0);
    const json fj = json::parse(invoke({"info", capCsv}).out);
    CHECK(fj["kind"] == "frame");
    const double cap = kTwoPi * (1.0 - std::cos(61.0 * kPi / 180.0));
    CHECK(fj["covered_area"].get<double>() == doctest::Approx(cap).epsilon(0.03));
    CHECK(fj["windows"][0]["area"].get<double>() == doctest::Approx(cap).epsilon(1e-9));
    CHECK(invoke({"info", capCsv, "--format", "text"}).out.find("disc") != std::string::npos);
}

TEST_CASE("estimators through the command line") {
    TempDir dir("cli-est");
    const auto map = dir.file("g.fits");
    REQUIRE(invoke({"mkfits", "--nside", "8", "--field", "gaussian", "--seed", "3", "-o", map}).code == 0);

    const auto curve = dir.file("v.csv");
    REQUIRE(invoke({"variogram", map, "--column", "I", "--max-dist", "180", "--degrees", "--bins", "10", "-o", curve})
                .code == 0);
    const CsvTable t = readCsv(curve);
    CHECK(t.header == std::vector<std::string>{"lag", "value", "count"});
    CHECK(t.rows.size() == 11);

    const Result ent = invoke({"entropy", map, "--column", "I"});
    CHECK(ent.code == 0);
    CHECK_FALSE(ent.out.empty());

    const auto fitJson = dir.file("fit.json");
    CHECK(invoke({"fit", curve, "--family", "exponential", "-o", fitJson}).code == 0);
    const json fj = json::parse(slurp(fitJson));
    CHECK(fj["family"] == "exponential");

    const auto rcsv = dir.file("r.csv");
    CHECK(invoke({"renyi", map, "--column", "I", "--box-level", "2", "-o", rcsv}).code == 0);
    CHECK(readCsv(rcsv).rows.size() == 20);

    const auto svg = dir.file("v.svg");
    CHECK(invoke({"plot", "variogram", curve, "--fit", fitJson, "-o", svg}).code == 0);
    CHECK(slurp(svg).find("<svg") != std::string::npos);
    const auto msvg = dir.file("m.svg");
    CHECK(invoke({"plot", "map", map, "--column", "I", "-o", msvg}).code == 0);
    CHECK(slurp(msvg).find("</svg>") != std::string::npos);
}

TEST_CASE("fit recovers an exact askey curve") {
    TempDir dir("cli-fit");
    const auto curve = dir.file("a.csv");
    CovarianceModel m;
    m.family = CovFamily::askey;
    m.sigmaSq = 2.0;
    m.psi = 1.2;
    m.kappa = 3.0;
    {
        std::ofstream o(curve);
        o << "# kind=variogram max_dist=3.14159 bins=20 subsampled=0\nlag,value,count\n0,0,100\n";
        for (int b = 1; b <= 20; ++b) {
            const double h = (b - 0.5) * kPi / 20;
            o << formatNumber(h) << ',' << formatNumber(variogramModel(h, m)) << ",100\n";
        }
    }
    const Result r = invoke({"fit", curve, "--family", "askey"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["sigma2"].get<double>() == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(j["psi"].get<double>() == doctest::Approx(1.2).epsilon(1e-4));
    CHECK(j["kappa"].get<double>() == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("exit codes") {
    TempDir dir("cli-exit");
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"info", dir.file("missing.fits")}).code == 2);
    CHECK(invoke({"bogus"}).code == 2);

    const auto junk = dir.file("junk.fits");
    std::ofstream(junk) << std::string(2880, 'x');
    const Result bad = invoke({"info", junk});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("reading input") != std::string::npos);

    const auto cfg = dir.file("c.cfg");
    std::ofstream(cfg) << "[cache]\ndir = " << dir.file("cache") << "\n";
    const Result off = invoke({"--config", cfg, "download", "map", "--offline"});
    CHECK(off.code == 3);

    const auto map = dir.file("c.fits");
    REQUIRE(invoke({"mkfits", "--nside", "2", "--field", "constant", "-o", map}).code == 0);
    const Result compute = invoke({"renyi", map, "--column", "I", "--box-level", "1"});
    CHECK(compute.code == 4);
    CHECK(compute.err.find("error (") != std::string::npos);
}

TEST_CASE("outputs are deterministic") {
    TempDir dir("cli-det");
    const auto map = dir.file("g.fits");
    REQUIRE(invoke({"mkfits", "--nside", "16", "--seed", "11", "-o", map}).code == 0);
    const auto a = dir.file("a.csv");
    const auto b = dir.file("b.csv");
    for (const auto& o : {a, b})
        REQUIRE(invoke({"cov", map, "--column", "I", "--max-dist", "1", "--bins", "8", "--sample", "500", "--seed", "4",
                     "--pair-budget", "20000", "-o", o})
                    .code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find("subsampled=1") != std::string::npos);
}

TEST_CASE("download from a file URL") {
    TempDir dir("cli-dl");
    const auto map = dir.file("src_smica_1024.fits");
    REQUIRE(invoke({"mkfits", "--nside", "4", "-o", map}).code == 0);
    const auto spec = dir.file("spec.txt");
    std::ofstream(spec) << "# l Dl -dDl +dDl\n2 100.0 1 1\n3 200.0 1 1\n4 300.0 1 1\n";
    const auto cfg = dir.file("c.cfg");
    std::ofstream(cfg) << "[download]\nmap_url = file://" << dir.path().string() << "/src_{foreground}_{nside}.fits\n"
                       << "ps_url_1 = file://" << spec << "\n[cache]\ndir = " << dir.file("cache") << "\n";

    const Result m = invoke({"--config", cfg, "download", "map", "--quiet"});
    REQUIRE(m.code == 0);
    const std::string cached = m.out.substr(0, m.out.find('\n'));
    CHECK(slurp(cached) == slurp(map));
    CHECK(invoke({"--config", cfg, "download", "map", "--offline"}).code == 0);

    const Result p = invoke({"--config", cfg, "download", "powerspectrum", "--quiet"});
    REQUIRE(p.code == 0);
    const auto ps = readPowerSpectrum(p.out.substr(0, p.out.find('\n')));
    CHECK(ps.convention == SpectrumConvention::Dl);
    CHECK(ps.ell == std::vector<int>{2, 3, 4});

    std::ofstream(cfg, std::ios::app) << "[download]\nps_url_2 = file://" << dir.file("none.txt") << "\n";
    CHECK(invoke({"--config", cfg, "download", "powerspectrum", "--link", "2", "--quiet"}).code == 3);
}

#endif
