#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

// Key/value configuration.
//
//   # comment                 (also after a value: key = v  # note)
//   [download]                section header; following keys become download.<key>
//   key = value               bare value, trimmed
//   key = "value"             quoted value, \" and \\ escapes
//
// Later assignments override earlier ones. Unknown keys are kept and ignored.
namespace spherestat::cli {

class Config {
  public:
    /// Built-in defaults (archive URL templates, summary card whitelist).
    static Config defaults();
    /// Defaults overlaid with the file at `path`. Throws ParseError/IoError.
    static Config load(const std::string& path);
    /// `explicitPath`, else $SPHERESTAT_CONFIG, else defaults only.
    static Config resolve(const std::optional<std::string>& explicitPath);

    void parse(const std::string& text, const std::string& origin);

    std::optional<std::string> get(const std::string& key) const;
    std::string getOr(const std::string& key, const std::string& fallback) const;
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    std::vector<std::string> list(const std::string& key) const; // comma separated

    /// $SPHERESTAT_CACHE_DIR, else cache.dir, else ./spherestat-cache.
    std::string cacheDir() const;

  private:
    std::map<std::string, std::string> values_;
};

/// Replaces every "{name}" in `tmpl` with vars[name]. Throws ParseError on an
/// unknown placeholder.
std::string expandTemplate(const std::string& tmpl, const std::map<std::string, std::string>& vars);

} // namespace spherestat::cli
