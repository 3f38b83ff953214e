#include "spherestat/sky_frame.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "spherestat/errors.hpp"
#include "spherestat/sampling.hpp"
#include "spherestat/stats.hpp"

namespace spherestat {

namespace {

bool hasDuplicates(const std::vector<std::int64_t>& pixels) {
    std::vector<std::int64_t> sorted = pixels;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

} // namespace

std::string_view modeName(FrameMode m) { return m == FrameMode::cmb ? "cmb" : "hp"; }

FrameMode parseMode(std::string_view name) {
    if (name == "cmb") return FrameMode::cmb;
    if (name == "hp") return FrameMode::hp;
    throw FormatError("unknown frame mode '" + std::string(name) + "'");
}

SkyFrame SkyFrame::make(healpix::Resolution res, healpix::Scheme scheme, FrameMode mode,
                        std::vector<std::int64_t> pixels, std::vector<DataColumn> columns,
                        std::optional<std::vector<SphericalPoint>> coordinates) {
    const std::int64_t np = res.npix();
    for (auto p : pixels)
        if (p < 1 || p > np) throw AddressingError("pixel index " + std::to_string(p) + " outside the resolution");
    std::unordered_set<std::string> names;
    for (const auto& c : columns) {
        if (c.values.size() != pixels.size())
            throw SchemaError("column '" + c.name + "' has " + std::to_string(c.values.size()) + " values for " +
                              std::to_string(pixels.size()) + " rows");
        if (!names.insert(c.name).second) throw SchemaError("duplicate column name '" + c.name + "'");
    }
    if (coordinates && coordinates->size() != pixels.size())
        throw SchemaError("coordinate count differs from row count");
    if (mode == FrameMode::cmb && hasDuplicates(pixels))
        throw UniquenessError("cmb-mode frame requires unique pixel indices");

    SkyFrame f;
    f.resolution_ = res;
    f.scheme_ = scheme;
    f.mode_ = mode;
    f.pixels_ = std::move(pixels);
    f.columns_ = std::move(columns);
    f.coordinates_ = std::move(coordinates);
    return f;
}

SkyFrame SkyFrame::fullSky(healpix::Resolution res, healpix::Scheme scheme, std::vector<DataColumn> columns) {
    std::vector<std::int64_t> pixels(static_cast<std::size_t>(res.npix()));
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = static_cast<std::int64_t>(i) + 1;
    return make(res, scheme, FrameMode::cmb, std::move(pixels), std::move(columns));
}

const DataColumn& SkyFrame::column(std::string_view name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw SchemaError("frame has no column named '" + std::string(name) + "'");
}

bool SkyFrame::hasColumn(std::string_view name) const {
    return std::any_of(columns_.begin(), columns_.end(), [&](const DataColumn& c) { return c.name == name; });
}

UnitVector SkyFrame::pixelCenter(std::size_t row) const {
    return healpix::pixelCenter({pixels_.at(row), scheme_, resolution_});
}

UnitVector SkyFrame::position(std::size_t row) const {
    if (coordinates_) return toUnitVector((*coordinates_)[row]);
    return pixelCenter(row);
}

std::vector<UnitVector> SkyFrame::positions() const {
    std::vector<UnitVector> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(position(i));
    return out;
}

SkyFrame SkyFrame::withWindows(std::vector<Window> windows) const {
    SkyFrame f = *this;
    f.windows_ = std::move(windows);
    return f;
}

SkyFrame SkyFrame::withMetadata(std::map<std::string, std::string> metadata) const {
    SkyFrame f = *this;
    f.metadata_ = std::move(metadata);
    return f;
}

SkyFrame SkyFrame::selectRows(const std::vector<std::size_t>& rows) const {
    SkyFrame f;
    f.resolution_ = resolution_;
    f.scheme_ = scheme_;
    f.mode_ = mode_;
    f.windows_ = windows_;
    f.metadata_ = metadata_;
    f.demoted_ = demoted_;
    f.pixels_.reserve(rows.size());
    for (auto r : rows) f.pixels_.push_back(pixels_.at(r));
    for (const auto& c : columns_) {
        DataColumn nc{c.name, {}};
        nc.values.reserve(rows.size());
        for (auto r : rows) nc.values.push_back(c.values[r]);
        f.columns_.push_back(std::move(nc));
    }
    if (coordinates_) {
        std::vector<SphericalPoint> cs;
        cs.reserve(rows.size());
        for (auto r : rows) cs.push_back((*coordinates_)[r]);
        f.coordinates_ = std::move(cs);
    }
    return f;
}

SkyFrame frameFromMap(const fits::MapSource& src, const RowSelection& rows, const std::vector<std::string>& columns,
                      const std::vector<std::string>& cardWhitelist) {
    if (src.rowCount() > src.resolution().npix())
        throw FormatError("map has more rows than pixels at its NSIDE");

    std::vector<std::int64_t> index;
    fits::Table table;
    if (std::holds_alternative<AllRows>(rows)) {
        table = fits::readAll(src, columns);
        index.resize(static_cast<std::size_t>(src.rowCount()));
        for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<std::int64_t>(i) + 1;
    } else if (const auto* explicitRows = std::get_if<std::vector<std::int64_t>>(&rows)) {
        index = *explicitRows;
        table = fits::readRows(src, index, columns);
    } else {
        const auto& spec = std::get<SampleSpec>(rows);
        auto sample = fits::sampleRows(src, spec.size, spec.seed, columns);
        index = std::move(sample.rows);
        table = std::move(sample.table);
    }

    std::vector<DataColumn> cols;
    for (auto& c : table.columns) cols.push_back({c.name, std::move(c.values)});
    SkyFrame frame = SkyFrame::make(src.resolution(), src.scheme(), FrameMode::cmb, std::move(index), std::move(cols));

    std::map<std::string, std::string> meta;
    for (const auto& key : cardWhitelist) {
        if (src.header().find(key))
            meta[key] = src.header().text(key);
        else if (src.primaryHeader().find(key))
            meta[key] = src.primaryHeader().text(key);
    }
    return frame.withMetadata(std::move(meta));
}

SkyFrame assignPixels(const std::vector<SphericalPoint>& points, std::vector<DataColumn> columns,
                      healpix::Resolution res, bool requireUnique) {
    std::vector<std::int64_t> pixels;
    pixels.reserve(points.size());
    for (const auto& p : points) pixels.push_back(healpix::nestSearch(toUnitVector(p), res).pixel.index);

    if (requireUnique) {
        std::unordered_map<std::int64_t, std::vector<std::size_t>> byPixel;
        for (std::size_t i = 0; i < pixels.size(); ++i) byPixel[pixels[i]].push_back(i + 1);
        std::vector<std::int64_t> keys;
        for (const auto& [pix, rows] : byPixel)
            if (rows.size() > 1) keys.push_back(pix);
        if (!keys.empty()) {
            std::sort(keys.begin(), keys.end());
            std::ostringstream msg;
            msg << "points share pixels at nside " << res.nside() << ":";
            for (auto k : keys) {
                msg << " pixel " << k << " <- rows";
                for (auto r : byPixel[k]) msg << ' ' << r;
                msg << ';';
            }
            throw UniquenessError(msg.str());
        }
    }
    return SkyFrame::make(res, healpix::Scheme::nested, requireUnique ? FrameMode::cmb : FrameMode::hp,
                          std::move(pixels), std::move(columns), points);
}

SkyFrame extractWindow(const SkyFrame& frame, const WindowSet& region) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < frame.size(); ++i)
        if (region.contains(frame.pixelCenter(i))) keep.push_back(i);
    SkyFrame out = frame.selectRows(keep);
    std::vector<Window> ws = frame.windows();
    ws.insert(ws.end(), region.windows.begin(), region.windows.end());
    return out.withWindows(std::move(ws));
}

SkyFrame sampleFrame(const SkyFrame& frame, std::int64_t sampleSize, std::uint64_t seed) {
    if (sampleSize < 0) throw DomainError("sample size must be non-negative");
    const auto picks = sampleWithoutReplacement(static_cast<std::int64_t>(frame.size()), sampleSize, seed);
    std::vector<std::size_t> rows;
    rows.reserve(picks.size());
    for (auto p : picks) rows.push_back(static_cast<std::size_t>(p - 1));
    return frame.selectRows(rows);
}

double geoArea(const SkyFrame& frame) {
    std::size_t distinct = frame.size();
    if (frame.mode() == FrameMode::hp) {
        std::vector<std::int64_t> sorted = frame.pixels();
        std::sort(sorted.begin(), sorted.end());
        distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    }
    return static_cast<double>(distinct) * healpix::pixelArea(frame.resolution());
}

SkyFrame bindFrames(const std::vector<SkyFrame>& frames, BindAxis axis) {
    if (frames.empty()) throw DomainError("bindFrames needs at least one frame");
    const SkyFrame& first = frames.front();
    for (const auto& f : frames) {
        if (f.resolution() != first.resolution() || f.scheme() != first.scheme())
            throw AddressingError("frames differ in resolution or ordering scheme");
    }

    if (axis == BindAxis::columns) {
        std::vector<DataColumn> cols;
        std::unordered_set<std::string> names;
        for (const auto& f : frames) {
            if (f.pixels() != first.pixels()) throw SchemaError("column bind needs identical pixel key sequences");
            for (const auto& c : f.columns()) {
                if (!names.insert(c.name).second) throw SchemaError("column '" + c.name + "' appears twice");
                cols.push_back(c);
            }
        }
        SkyFrame out = SkyFrame::make(first.resolution(), first.scheme(), first.mode(), first.pixels(),
                                      std::move(cols), first.coordinates());
        out.windows_ = first.windows_;
        out.metadata_ = first.metadata_;
        return out;
    }

    for (const auto& f : frames) {
        if (f.columns().size() != first.columns().size())
            throw SchemaError("row bind needs identical column schemas");
        for (std::size_t c = 0; c < f.columns().size(); ++c)
            if (f.columns()[c].name != first.columns()[c].name)
                throw SchemaError("row bind needs identical column schemas");
    }

    std::vector<std::int64_t> pixels;
    std::vector<DataColumn> cols;
    for (const auto& c : first.columns()) cols.push_back({c.name, {}});
    const bool anyCoords = std::any_of(frames.begin(), frames.end(), [](const SkyFrame& f) { return f.coordinates().has_value(); });
    std::vector<SphericalPoint> coords;
    bool allCmb = true;
    std::vector<Window> windows;
    std::map<std::string, std::string> meta;
    for (const auto& f : frames) {
        pixels.insert(pixels.end(), f.pixels().begin(), f.pixels().end());
        for (std::size_t c = 0; c < cols.size(); ++c)
            cols[c].values.insert(cols[c].values.end(), f.columns()[c].values.begin(), f.columns()[c].values.end());
        if (anyCoords)
            for (std::size_t i = 0; i < f.size(); ++i)
                coords.push_back(f.coordinates() ? (*f.coordinates())[i] : toSpherical(f.pixelCenter(i)));
        allCmb = allCmb && f.mode() == FrameMode::cmb;
        windows.insert(windows.end(), f.windows().begin(), f.windows().end());
        meta.insert(f.metadata().begin(), f.metadata().end());
    }

    const bool collision = hasDuplicates(pixels);
    const FrameMode mode = allCmb && !collision ? FrameMode::cmb : FrameMode::hp;
    SkyFrame out = SkyFrame::make(first.resolution(), first.scheme(), mode, std::move(pixels), std::move(cols),
                                  anyCoords ? std::optional(std::move(coords)) : std::nullopt);
    out.demoted_ = allCmb && collision;
    out.windows_ = std::move(windows);
    out.metadata_ = std::move(meta);
    return out;
}

FrameSummary summarize(const SkyFrame& frame) {
    FrameSummary s;
    s.rows = frame.size();
    s.mode = frame.mode();
    s.empty = frame.empty();
    for (const auto& w : frame.windows()) s.windows.push_back({w.typeName(), w.area()});
    s.coveredArea = geoArea(frame);
    s.cards = frame.metadata();
    if (frame.empty()) return s;
    for (const auto& c : frame.columns()) {
        std::vector<double> sorted = c.values;
        std::sort(sorted.begin(), sorted.end());
        ColumnSummary cs;
        cs.name = c.name;
        cs.min = sorted.front();
        cs.q1 = stats::quantileSorted(sorted, 0.25);
        cs.median = stats::quantileSorted(sorted, 0.5);
        cs.mean = stats::mean(c.values);
        cs.q3 = stats::quantileSorted(sorted, 0.75);
        cs.max = sorted.back();
        s.columns.push_back(cs);
    }
    return s;
}

std::string formatSummary(const FrameSummary& s) {
    std::ostringstream out;
    char buf[256];
    out << "SkyFrame (" << modeName(s.mode) << " mode), " << s.rows << " rows\n";
    out << "Number of windows: " << s.windows.size() << "\n";
    for (const auto& w : s.windows) {
        std::snprintf(buf, sizeof buf, "  Window type: %-13s Window area: %.6g\n", w.type.c_str(), w.area);
        out << buf;
    }
    for (const auto& [k, v] : s.cards) out << k << " = '" << v << "'\n";
    std::snprintf(buf, sizeof buf, "Total area covered by all pixels: %.6g\n", s.coveredArea);
    out << buf;
    if (s.empty) {
        out << "(empty frame)\n";
        return out.str();
    }
    for (const auto& c : s.columns) {
        out << "Column " << c.name << " quartiles\n";
        std::snprintf(buf, sizeof buf, "  %11s %11s %11s %11s %11s %11s\n", "Min.", "1st Qu.", "Median", "Mean",
                      "3rd Qu.", "Max.");
        out << buf;
        std::snprintf(buf, sizeof buf, "  %11.4e %11.4e %11.4e %11.4e %11.4e %11.4e\n", c.min, c.q1, c.median, c.mean,
                      c.q3, c.max);
        out << buf;
    }
    return out.str();
}

} // namespace spherestat
