#include "spherestat/window_json.hpp"

#include <fstream>

#include "spherestat/errors.hpp"

namespace spherestat {

namespace {

SphericalPoint pointFromJson(const nlohmann::json& j, double scale) {
    if (!j.is_object() || !j.contains("theta") || !j.contains("phi"))
        throw ParseError("window point needs numeric 'theta' and 'phi'");
    return {j.at("theta").get<double>() * scale, j.at("phi").get<double>() * scale};
}

nlohmann::json pointToJson(const SphericalPoint& p) { return {{"theta", p.theta}, {"phi", p.phi}}; }

} // namespace

Window windowFromJson(const nlohmann::json& j, double angleScale) {
    try {
        if (!j.is_object()) throw ParseError("window spec must be a JSON object");
        const std::string kind = j.value("kind", std::string{});
        const bool complement = j.value("complement", false);
        if (kind == "disc") {
            if (!j.contains("center") || !j.contains("r")) throw ParseError("disc window needs 'center' and 'r'");
            return Window::disc(pointFromJson(j.at("center"), angleScale), j.at("r").get<double>() * angleScale,
                                complement);
        }
        if (kind == "polygon") {
            if (!j.contains("vertices") || !j.at("vertices").is_array())
                throw ParseError("polygon window needs a 'vertices' array");
            std::vector<SphericalPoint> vs;
            for (const auto& v : j.at("vertices")) vs.push_back(pointFromJson(v, angleScale));
            return Window::polygon(vs, complement, j.value("assumedConvex", false));
        }
        throw ParseError("window 'kind' must be \"disc\" or \"polygon\"");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed window spec: ") + e.what());
    }
}

WindowSet windowSetFromJson(const nlohmann::json& j, double angleScale) {
    WindowSet ws;
    const nlohmann::json* list = &j;
    if (j.is_object() && j.contains("windows")) list = &j.at("windows");
    if (list->is_array()) {
        for (const auto& w : *list) ws.windows.push_back(windowFromJson(w, angleScale));
    } else {
        ws.windows.push_back(windowFromJson(*list, angleScale));
    }
    return ws;
}

nlohmann::json toJson(const Window& w) {
    nlohmann::json j;
    j["complement"] = w.complement();
    if (w.kind() == WindowKind::disc) {
        j["kind"] = "disc";
        j["center"] = pointToJson(w.center());
        j["r"] = w.radius();
    } else {
        j["kind"] = "polygon";
        j["assumedConvex"] = w.assumedConvex();
        auto vs = nlohmann::json::array();
        for (const auto& v : w.vertices()) vs.push_back(pointToJson(v));
        j["vertices"] = std::move(vs);
    }
    return j;
}

nlohmann::json toJson(const WindowSet& ws) {
    auto arr = nlohmann::json::array();
    for (const auto& w : ws.windows) arr.push_back(toJson(w));
    return arr;
}

WindowSet loadWindowSet(const std::string& path, double angleScale) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open window spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("window spec '" + path + "' is not valid JSON: " + e.what());
    }
    return windowSetFromJson(j, angleScale);
}

} // namespace spherestat
