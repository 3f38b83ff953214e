#pragma once

#include <string>
#include <vector>

#include "spherestat/sky_frame.hpp"

// CSV exchange for frames: columns pix, theta, phi, then data columns, all
// numbers at full (17 significant digit) precision. A JSON sidecar named
// "<csv path>.json" carries {nside, ordering, mode, coordinates, windows,
// metadata}.
namespace spherestat {

std::string sidecarPath(const std::string& csvPath);

void writeFrameCsv(const SkyFrame& frame, const std::string& path);
SkyFrame readFrameCsv(const std::string& path);

/// Minimal CSV table: one header row of names, numeric cells ("nan" and
/// empty cells read as NaN). Lines starting with '#' are skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t columnIndex(const std::string& name) const;
};

CsvTable readCsv(const std::string& path);
std::string formatNumber(double v);

} // namespace spherestat
