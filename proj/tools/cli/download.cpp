#include "download.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <curl/curl.h>

#include "spherestat/frame_io.hpp"

namespace spherestat::cli {

namespace {

struct Progress {
    std::ostream* out = nullptr;
    int lastPercent = -1;
};

std::size_t writeChunk(char* data, std::size_t size, std::size_t n, void* user) {
    return std::fwrite(data, size, n, static_cast<std::FILE*>(user)) * size;
}

int onProgress(void* user, curl_off_t total, curl_off_t now, curl_off_t, curl_off_t) {
    auto* p = static_cast<Progress*>(user);
    if (p->out == nullptr || total <= 0) return 0;
    const int pct = static_cast<int>(100 * now / total);
    if (pct / 10 != p->lastPercent / 10) {
        *p->out << "  " << pct << "% of " << total << " bytes\n";
        p->lastPercent = pct;
    }
    return 0;
}

struct CurlGlobal {
    CurlGlobal() { curl_global_init(CURL_GLOBAL_DEFAULT); }
    ~CurlGlobal() { curl_global_cleanup(); }
};

} // namespace

void fetchUrl(const std::string& url, const std::string& dest, std::ostream* progress) {
    static CurlGlobal global;
    const std::filesystem::path destPath(dest);
    if (destPath.has_parent_path()) std::filesystem::create_directories(destPath.parent_path());
    const std::string partial = dest + ".part";
    std::FILE* f = std::fopen(partial.c_str(), "wb");
    if (f == nullptr) throw IoError("cannot create '" + partial + "'");

    CURL* curl = curl_easy_init();
    if (curl == nullptr) {
        std::fclose(f);
        std::remove(partial.c_str());
        throw NetworkError("libcurl initialisation failed");
    }
    Progress prog{progress, -1};
    char errbuf[CURL_ERROR_SIZE] = {0};
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, writeChunk);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, f);
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl, CURLOPT_ERRORBUFFER, errbuf);
    curl_easy_setopt(curl, CURLOPT_NOPROGRESS, 0L);
    curl_easy_setopt(curl, CURLOPT_XFERINFOFUNCTION, onProgress);
    curl_easy_setopt(curl, CURLOPT_XFERINFODATA, &prog);
    const CURLcode rc = curl_easy_perform(curl);
    curl_easy_cleanup(curl);
    const bool closed = std::fclose(f) == 0;
    if (rc != CURLE_OK || !closed) {
        std::remove(partial.c_str());
        const std::string why = rc != CURLE_OK ? (errbuf[0] ? errbuf : curl_easy_strerror(rc)) : "write failed";
        throw NetworkError("download of " + url + " failed: " + why);
    }
    std::filesystem::rename(partial, destPath);
}

void reduceSpectrumText(const std::string& rawPath, const std::string& csvPath) {
    std::ifstream in(rawPath);
    if (!in) throw IoError("cannot open '" + rawPath + "'");
    std::ostringstream out;
    out << "l,D_l\n";
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        std::istringstream ls(line);
        double l = 0.0, d = 0.0;
        if (!(ls >> l >> d)) throw ParseError("'" + rawPath + "': cannot read 'l D_l' from: " + line);
        out << static_cast<long long>(l) << ',' << formatNumber(d) << '\n';
        ++rows;
    }
    if (rows == 0) throw ParseError("'" + rawPath + "' holds no spectrum rows");
    std::ofstream o(csvPath, std::ios::trunc);
    if (!o) throw IoError("cannot create '" + csvPath + "'");
    o << out.str();
}

} // namespace spherestat::cli
