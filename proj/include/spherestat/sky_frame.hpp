#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spherestat/fits.hpp"
#include "spherestat/healpix.hpp"
#include "spherestat/windows.hpp"

namespace spherestat {

/// cmb: pixel keys are unique. hp: repeated keys allowed.
enum class FrameMode { cmb, hp };

std::string_view modeName(FrameMode m);
FrameMode parseMode(std::string_view name);

enum class BindAxis { rows, columns };

struct DataColumn {
    std::string name;
    std::vector<double> values;
};

/// Pixel-indexed columnar table. Immutable: every operation returns a new
/// frame. All pixels share one scheme and resolution.
class SkyFrame {
  public:
    /// Validating constructor. `coordinates`, when given, holds one explicit
    /// position per row (hp frames built from raw points).
    static SkyFrame make(healpix::Resolution res, healpix::Scheme scheme, FrameMode mode,
                         std::vector<std::int64_t> pixels, std::vector<DataColumn> columns,
                         std::optional<std::vector<SphericalPoint>> coordinates = std::nullopt);

    /// Every pixel of the sphere in index order, cmb mode.
    static SkyFrame fullSky(healpix::Resolution res, healpix::Scheme scheme, std::vector<DataColumn> columns = {});

    healpix::Resolution resolution() const { return resolution_; }
    healpix::Scheme scheme() const { return scheme_; }
    FrameMode mode() const { return mode_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    const std::vector<std::int64_t>& pixels() const { return pixels_; }
    const std::vector<DataColumn>& columns() const { return columns_; }
    const DataColumn& column(std::string_view name) const;
    bool hasColumn(std::string_view name) const;
    const std::optional<std::vector<SphericalPoint>>& coordinates() const { return coordinates_; }

    /// Centre of the row's pixel.
    UnitVector pixelCenter(std::size_t row) const;
    /// Explicit coordinate when the frame carries one, else the pixel centre.
    UnitVector position(std::size_t row) const;
    std::vector<UnitVector> positions() const;

    /// Windows this frame was extracted through, in application order.
    const std::vector<Window>& windows() const { return windows_; }
    /// Header cards carried over from the source map.
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    /// Set when a cmb-mode bind produced repeated keys and the result fell
    /// back to hp mode.
    bool demoted() const { return demoted_; }

    SkyFrame withWindows(std::vector<Window> windows) const;
    SkyFrame withMetadata(std::map<std::string, std::string> metadata) const;
    /// Rows at the given 0-based positions, in that order.
    SkyFrame selectRows(const std::vector<std::size_t>& rows) const;

  private:
    SkyFrame() = default;

    healpix::Resolution resolution_ = healpix::Resolution::fromOrder(0);
    healpix::Scheme scheme_ = healpix::Scheme::nested;
    FrameMode mode_ = FrameMode::cmb;
    std::vector<std::int64_t> pixels_;
    std::vector<DataColumn> columns_;
    std::optional<std::vector<SphericalPoint>> coordinates_;
    std::vector<Window> windows_;
    std::map<std::string, std::string> metadata_;
    bool demoted_ = false;

    friend SkyFrame bindFrames(const std::vector<SkyFrame>& frames, BindAxis axis);
};

struct AllRows {};
struct SampleSpec {
    std::int64_t size = 0;
    std::uint64_t seed = 0;
};
using RowSelection = std::variant<AllRows, std::vector<std::int64_t>, SampleSpec>;

/// cmb-mode frame keyed by the selected row numbers under the map's
/// ordering. Cards named in cardWhitelist are copied into the metadata.
SkyFrame frameFromMap(const fits::MapSource& src, const RowSelection& rows, const std::vector<std::string>& columns,
                      const std::vector<std::string>& cardWhitelist = {});

/// Keys each point by nestSearch at `res` (nested scheme). With
/// requireUnique the result is a cmb frame and collisions raise
/// UniquenessError; otherwise an hp frame.
SkyFrame assignPixels(const std::vector<SphericalPoint>& points, std::vector<DataColumn> columns,
                      healpix::Resolution res, bool requireUnique);

/// Rows whose pixel centre lies in the region. Records the windows.
SkyFrame extractWindow(const SkyFrame& frame, const WindowSet& region);

SkyFrame sampleFrame(const SkyFrame& frame, std::int64_t sampleSize, std::uint64_t seed);

/// Distinct pixel count times the pixel area.
double geoArea(const SkyFrame& frame);

SkyFrame bindFrames(const std::vector<SkyFrame>& frames, BindAxis axis);

struct WindowSummary {
    std::string type;
    double area = 0.0;
};

struct ColumnSummary {
    std::string name;
    double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

struct FrameSummary {
    bool empty = true;
    std::size_t rows = 0;
    FrameMode mode = FrameMode::cmb;
    std::vector<WindowSummary> windows;
    double coveredArea = 0.0;
    std::vector<ColumnSummary> columns;
    std::map<std::string, std::string> cards;
};

FrameSummary summarize(const SkyFrame& frame);
/// Human-readable report of a summary.
std::string formatSummary(const FrameSummary& s);

} // namespace spherestat
