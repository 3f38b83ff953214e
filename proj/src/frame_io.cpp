#include "spherestat/frame_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spherestat/errors.hpp"
#include "spherestat/window_json.hpp"

namespace spherestat {

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t b = 0;
        while (b < cell.size() && cell[b] == ' ') ++b;
        out.push_back(cell.substr(b));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parseCell(const std::string& cell, std::size_t lineNo) {
    if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
        throw ParseError("line " + std::to_string(lineNo) + ": '" + cell + "' is not a number");
    return v;
}

} // namespace

std::string sidecarPath(const std::string& csvPath) { return csvPath + ".json"; }

std::string formatNumber(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t CsvTable::columnIndex(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw SchemaError("CSV has no column '" + name + "'");
}

CsvTable readCsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    std::size_t lineNo = 0;
    bool haveHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        auto cells = splitCsvLine(line);
        if (!haveHeader) {
            t.header = std::move(cells);
            haveHeader = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError("line " + std::to_string(lineNo) + " of '" + path + "' has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(t.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parseCell(c, lineNo));
        t.rows.push_back(std::move(row));
    }
    if (!haveHeader) throw ParseError("'" + path + "' has no CSV header");
    return t;
}

void writeFrameCsv(const SkyFrame& frame, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot create '" + path + "'");
    out << "pix,theta,phi";
    for (const auto& c : frame.columns()) out << ',' << c.name;
    out << '\n';
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const SphericalPoint p = frame.coordinates() ? (*frame.coordinates())[i] : toSpherical(frame.pixelCenter(i));
        out << frame.pixels()[i] << ',' << formatNumber(p.theta) << ',' << formatNumber(p.phi);
        for (const auto& c : frame.columns()) out << ',' << formatNumber(c.values[i]);
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");

    nlohmann::json meta;
    meta["nside"] = frame.resolution().nside();
    meta["ordering"] = std::string(healpix::schemeName(frame.scheme()));
    meta["mode"] = std::string(modeName(frame.mode()));
    meta["coordinates"] = frame.coordinates() ? "explicit" : "pixel";
    WindowSet ws{frame.windows()};
    meta["windows"] = toJson(ws);
    meta["metadata"] = frame.metadata();
    std::ofstream side(sidecarPath(path), std::ios::trunc);
    if (!side) throw IoError("cannot create '" + sidecarPath(path) + "'");
    side << meta.dump(2) << '\n';
}

SkyFrame readFrameCsv(const std::string& path) {
    std::ifstream side(sidecarPath(path));
    if (!side) throw IoError("missing metadata sidecar '" + sidecarPath(path) + "'");
    nlohmann::json meta;
    try {
        side >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("sidecar '" + sidecarPath(path) + "' is not valid JSON: " + e.what());
    }

    const CsvTable csv = readCsv(path);
    if (csv.header.size() < 3 || csv.header[0] != "pix" || csv.header[1] != "theta" || csv.header[2] != "phi")
        throw SchemaError("frame CSV must start with columns pix,theta,phi");

    try {
        const auto res = healpix::Resolution::fromNside(meta.at("nside").get<std::int64_t>());
        const auto scheme = healpix::parseScheme(meta.at("ordering").get<std::string>());
        const auto mode = parseMode(meta.at("mode").get<std::string>());
        const bool explicitCoords = meta.value("coordinates", std::string("pixel")) == "explicit";

        std::vector<std::int64_t> pixels;
        std::vector<SphericalPoint> coords;
        std::vector<DataColumn> cols;
        for (std::size_t c = 3; c < csv.header.size(); ++c) cols.push_back({csv.header[c], {}});
        for (const auto& row : csv.rows) {
            pixels.push_back(static_cast<std::int64_t>(std::llround(row[0])));
            coords.push_back({row[1], row[2]});
            for (std::size_t c = 3; c < row.size(); ++c) cols[c - 3].values.push_back(row[c]);
        }
        SkyFrame f = SkyFrame::make(res, scheme, mode, std::move(pixels), std::move(cols),
                                    explicitCoords ? std::optional(std::move(coords)) : std::nullopt);
        if (meta.contains("windows")) f = f.withWindows(windowSetFromJson(meta.at("windows")).windows);
        if (meta.contains("metadata"))
            f = f.withMetadata(meta.at("metadata").get<std::map<std::string, std::string>>());
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("sidecar '" + sidecarPath(path) + "' is malformed: " + e.what());
    }
}

} // namespace spherestat
