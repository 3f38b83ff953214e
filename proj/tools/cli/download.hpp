#pragma once

#include <iosfwd>
#include <string>

#include "spherestat/errors.hpp"

namespace spherestat::cli {

class NetworkError : public Error {
  public:
    using Error::Error;
};

/// Streams `url` into `dest` (any scheme libcurl handles, file:// included).
/// Progress goes to `progress` when non-null. On failure the partial file is
/// removed and NetworkError is thrown.
void fetchUrl(const std::string& url, const std::string& dest, std::ostream* progress);

/// Reduces a whitespace-separated spectrum text file ("l D_l ..." rows, '#'
/// comments) to a two-column "l,D_l" CSV.
void reduceSpectrumText(const std::string& rawPath, const std::string& csvPath);

} // namespace spherestat::cli
