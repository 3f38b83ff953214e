#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spherestat/errors.hpp"

namespace spherestat::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

constexpr const char* kPsBase = "https://irsa.ipac.caltech.edu/data/Planck/release_3/ancillary-data/cosmoparams/";

} // namespace

Config Config::defaults() {
    Config c;
    c.set("download.map_url",
          "http://irsa.ipac.caltech.edu/data/Planck/release_2/all-sky-maps/maps/component-maps/cmb/"
          "COM_CMB_IQU-{foreground}_{nside}_R2.02_full.fits");
    const char* spectra[] = {"TT-full", "TE-full", "EE-full", "TT-binned", "TE-binned", "EE-binned", "TT-low"};
    for (int i = 0; i < 7; ++i)
        c.set("download.ps_url_" + std::to_string(i + 1),
              std::string(kPsBase) + "COM_PowerSpect_CMB-" + spectra[i] + "_R3.01.txt");
    c.set("summary.cards", "METHOD");
    return c;
}

void Config::parse(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string where = origin + ":" + std::to_string(lineNo);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t[0] == '[') {
            if (t.back() != ']') throw ParseError(where + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ParseError(where + ": empty key");
        std::string rest = trim(t.substr(eq + 1));
        std::string value;
        if (!rest.empty() && rest[0] == '"') {
            std::size_t i = 1;
            bool closed = false;
            for (; i < rest.size(); ++i) {
                if (rest[i] == '\\' && i + 1 < rest.size()) {
                    value += rest[++i];
                } else if (rest[i] == '"') {
                    closed = true;
                    break;
                } else {
                    value += rest[i];
                }
            }
            if (!closed) throw ParseError(where + ": unterminated string");
            const std::string tail = trim(rest.substr(i + 1));
            if (!tail.empty() && tail[0] != '#') throw ParseError(where + ": text after quoted value");
        } else {
            const auto hash = rest.find(" #");
            value = trim(hash == std::string::npos ? rest : rest.substr(0, hash));
        }
        values_[section.empty() ? key : section + "." + key] = value;
    }
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Config c = defaults();
    c.parse(ss.str(), path);
    return c;
}

Config Config::resolve(const std::optional<std::string>& explicitPath) {
    if (explicitPath) return load(*explicitPath);
    if (const char* env = std::getenv("SPHERESTAT_CONFIG"); env && *env) return load(env);
    return defaults();
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::getOr(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::vector<std::string> Config::list(const std::string& key) const {
    std::vector<std::string> out;
    const auto v = get(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

std::string Config::cacheDir() const {
    if (const char* env = std::getenv("SPHERESTAT_CACHE_DIR"); env && *env) return env;
    return getOr("cache.dir", "spherestat-cache");
}

std::string expandTemplate(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') {
            out += tmpl[i];
            continue;
        }
        const auto close = tmpl.find('}', i);
        if (close == std::string::npos) throw ParseError("unterminated placeholder in '" + tmpl + "'");
        const std::string name = tmpl.substr(i + 1, close - i - 1);
        const auto it = vars.find(name);
        if (it == vars.end()) throw ParseError("unknown placeholder {" + name + "} in '" + tmpl + "'");
        out += it->second;
        i = close;
    }
    return out;
}

} // namespace spherestat::cli
