#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "spherestat/windows.hpp"

// Window specification text format:
//   {"kind": "disc", "complement": false, "center": {"theta": t, "phi": p}, "r": r}
//   {"kind": "polygon", "complement": false, "assumedConvex": false,
//    "vertices": [{"theta": t, "phi": p}, ...]}
// A window set is a JSON array of windows, {"windows": [...]}, or a single
// window object. Angles are radians; angleScale converts on ingress.
namespace spherestat {

Window windowFromJson(const nlohmann::json& j, double angleScale = 1.0);
WindowSet windowSetFromJson(const nlohmann::json& j, double angleScale = 1.0);
nlohmann::json toJson(const Window& w);
nlohmann::json toJson(const WindowSet& ws);

WindowSet loadWindowSet(const std::string& path, double angleScale = 1.0);

} // namespace spherestat
