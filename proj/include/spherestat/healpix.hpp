#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "spherestat/coords.hpp"

// HEALPix pixel addressing. Indices at the public API are 1-based; the
// nested index of a pixel is face * nside^2 + interleave(x, y) + 1 with faces
// 0..3 north, 4..7 equatorial, 8..11 south.
namespace spherestat::healpix {

enum class Scheme { ring, nested };

std::string_view schemeName(Scheme s);
Scheme parseScheme(std::string_view name); // "ring" / "nested", case-insensitive

inline constexpr int kMaxOrder = 29;

/// nside = 2^order, 0 <= order <= 29.
class Resolution {
  public:
    static Resolution fromNside(std::int64_t nside);
    static Resolution fromOrder(int order);

    std::int64_t nside() const { return std::int64_t{1} << order_; }
    int order() const { return order_; }
    std::int64_t npix() const { return 12 * nside() * nside(); }

    friend bool operator==(Resolution, Resolution) = default;

  private:
    explicit Resolution(int order) : order_(order) {}
    int order_ = 0;
};

struct PixelId {
    std::int64_t index = 1; // 1..npix
    Scheme scheme = Scheme::nested;
    Resolution resolution = Resolution::fromOrder(0);

    friend bool operator==(const PixelId&, const PixelId&) = default;
};

/// Validating constructor; throws AddressingError on an out-of-range index.
PixelId makePixel(std::int64_t index, Scheme scheme, Resolution res);

std::int64_t npix(Resolution res);
double pixelArea(Resolution res);

/// Approximate linear pixel size sqrt(pixelArea) in arcminutes.
double resolutionArcmin(Resolution res);

/// Scale used by the nestSearch accuracy contract: 2 arccos(1 - 2 pi / npix).
double pixelDiameterBound(Resolution res);

std::int64_t nestToRing(std::int64_t nestIndex, Resolution res);
std::int64_t ringToNest(std::int64_t ringIndex, Resolution res);
PixelId convertOrdering(const PixelId& p, Scheme target);

UnitVector pixelCenter(const PixelId& p);
SphericalPoint pixelCenterSpherical(const PixelId& p);

/// Exact point-in-pixel lookup (the pixel whose boundary contains v).
PixelId pixelContaining(const UnitVector& v, Resolution res, Scheme scheme);

/// Resolution-independent ancestor k levels up: floor((p-1)/4^k)+1.
std::int64_t ancestor(std::int64_t nestIndex, int k);
/// Ancestor of a nested pixel; requires k <= order.
PixelId ancestor(const PixelId& p, int k);

std::array<PixelId, 4> children(const PixelId& p);

/// Nested indices at level j2 inside pixel pixJ1 at level j1 (contiguous).
std::vector<std::int64_t> pixelWindow(int j1, int j2, std::int64_t pixJ1);

/// Edge and corner neighbours, ordered SW, W, NW, N, NE, E, SE, S with
/// absent directions dropped. Result uses the scheme of p.
std::vector<PixelId> neighbours(const PixelId& p);

struct SearchResult {
    PixelId pixel;
    int visited = 0;
    double distance = 0.0; // geodesic distance target -> returned center
};

/// Greedy descent of the nested hierarchy: the closest of the 12 base
/// centres, then the closest of the four children at every finer level.
/// Visits exactly 12 + 4 * order centres. Ties go to the smaller index.
SearchResult nestSearch(const UnitVector& target, Resolution res);

/// 4 * samplesPerEdge points tracing the pixel edges (N, W, S, E corners in
/// turn). Edges are straight lines in the face-local HEALPix projection.
std::vector<UnitVector> pixelBoundary(const PixelId& p, int samplesPerEdge);

namespace detail {

struct FacePixel {
    int face = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;
};

// 0-based internals.
FacePixel nestToXyf(std::int64_t nest0, int order);
std::int64_t xyfToNest(const FacePixel& f, int order);
FacePixel ringToXyf(std::int64_t ring0, int order);
std::int64_t xyfToRing(const FacePixel& f, int order);
UnitVector centerOfXyf(const FacePixel& f, int order);
// Location of fractional face coordinates (x, y) in [0, 1].
UnitVector faceLocation(double x, double y, int face);

} // namespace detail

} // namespace spherestat::healpix
