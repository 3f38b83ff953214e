#include "spherestat/healpix.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <utility>

#include "spherestat/errors.hpp"

namespace spherestat::healpix {

namespace {

// Face layout: row of the face's southern vertex in units of nside (jrll)
// and its longitude in units of pi/4 (jpll).
constexpr int kJrll[12] = {2, 2, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4};
constexpr int kJpll[12] = {1, 3, 5, 7, 0, 2, 4, 6, 1, 3, 5, 7};

// Neighbour tables indexed by the 3x3 "which face" cell (nbnum, 4 = same
// face) and the face number.
constexpr int kNbXOffset[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kNbYOffset[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kNbFace[9][12] = {
    {8, 9, 10, 11, -1, -1, -1, -1, 10, 11, 8, 9}, // S
    {5, 6, 7, 4, 8, 9, 10, 11, 9, 10, 11, 8},     // SE
    {-1, -1, -1, -1, 5, 6, 7, 4, -1, -1, -1, -1}, // E
    {4, 5, 6, 7, 11, 8, 9, 10, 11, 8, 9, 10},     // SW
    {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},       // same face
    {1, 2, 3, 0, 0, 1, 2, 3, 5, 6, 7, 4},         // NE
    {-1, -1, -1, -1, 7, 4, 5, 6, -1, -1, -1, -1}, // W
    {3, 0, 1, 2, 3, 0, 1, 2, 4, 5, 6, 7},         // NW
    {2, 3, 0, 1, -1, -1, -1, -1, 0, 1, 2, 3},     // N
};
// bit 1: flip x, bit 2: flip y, bit 4: swap x and y. Indexed by face row.
constexpr int kNbSwap[9][3] = {
    {0, 0, 3}, {0, 0, 6}, {0, 0, 0}, {0, 0, 5}, {0, 0, 0}, {5, 0, 0}, {0, 0, 0}, {6, 0, 0}, {3, 0, 0},
};

std::uint64_t spreadBits(std::uint64_t v) {
    v &= 0xffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
}

std::uint64_t compressBits(std::uint64_t v) {
    v &= 0x5555555555555555ULL;
    v = (v | (v >> 1)) & 0x3333333333333333ULL;
    v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
    v = (v | (v >> 16)) & 0x00000000ffffffffULL;
    return v;
}

std::int64_t isqrt(std::int64_t v) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v) + 0.5));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

UnitVector fromZPhi(double z, double phi, double sinTheta) {
    return {sinTheta * std::cos(phi), sinTheta * std::sin(phi), z};
}

void checkIndex(std::int64_t index, Resolution res) {
    if (index < 1 || index > res.npix())
        throw AddressingError("pixel index " + std::to_string(index) + " outside [1, " +
                              std::to_string(res.npix()) + "]");
}

std::int64_t toNest0(const PixelId& p) {
    return p.scheme == Scheme::nested ? p.index - 1 : ringToNest(p.index, p.resolution) - 1;
}

PixelId fromNest0(std::int64_t nest0, Scheme scheme, Resolution res) {
    if (scheme == Scheme::nested) return {nest0 + 1, scheme, res};
    return {nestToRing(nest0 + 1, res), scheme, res};
}

PixelId requireNested(const PixelId& p, const char* what) {
    checkIndex(p.index, p.resolution);
    if (p.scheme != Scheme::nested) throw AddressingError(std::string(what) + " requires a nested pixel");
    return p;
}

} // namespace

std::string_view schemeName(Scheme s) { return s == Scheme::ring ? "ring" : "nested"; }

Scheme parseScheme(std::string_view name) {
    std::string lower;
    for (char c : name)
        if (!std::isspace(static_cast<unsigned char>(c))) lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "ring") return Scheme::ring;
    if (lower == "nested" || lower == "nest") return Scheme::nested;
    throw FormatError("unknown ordering scheme '" + std::string(name) + "'");
}

Resolution Resolution::fromNside(std::int64_t nside) {
    if (nside < 1 || (nside & (nside - 1)) != 0) throw AddressingError("nside must be a positive power of two");
    int order = 0;
    while ((std::int64_t{1} << order) < nside) ++order;
    return fromOrder(order);
}

Resolution Resolution::fromOrder(int order) {
    if (order < 0 || order > kMaxOrder) throw AddressingError("resolution order outside [0, 29]");
    return Resolution(order);
}

PixelId makePixel(std::int64_t index, Scheme scheme, Resolution res) {
    checkIndex(index, res);
    return {index, scheme, res};
}

std::int64_t npix(Resolution res) { return res.npix(); }

double pixelArea(Resolution res) { return kFourPi / static_cast<double>(res.npix()); }

double resolutionArcmin(Resolution res) { return std::sqrt(pixelArea(res)) * (180.0 / kPi) * 60.0; }

double pixelDiameterBound(Resolution res) {
    return 2.0 * std::acos(1.0 - kTwoPi / static_cast<double>(res.npix()));
}

namespace detail {

FacePixel nestToXyf(std::int64_t nest0, int order) {
    const std::int64_t npface = std::int64_t{1} << (2 * order);
    FacePixel f;
    f.face = static_cast<int>(nest0 >> (2 * order));
    const auto local = static_cast<std::uint64_t>(nest0 & (npface - 1));
    f.ix = static_cast<std::int64_t>(compressBits(local));
    f.iy = static_cast<std::int64_t>(compressBits(local >> 1));
    return f;
}

std::int64_t xyfToNest(const FacePixel& f, int order) {
    return (static_cast<std::int64_t>(f.face) << (2 * order)) +
           static_cast<std::int64_t>(spreadBits(static_cast<std::uint64_t>(f.ix)) +
                                     (spreadBits(static_cast<std::uint64_t>(f.iy)) << 1));
}

std::int64_t xyfToRing(const FacePixel& f, int order) {
    const std::int64_t nside = std::int64_t{1} << order;
    const std::int64_t nl4 = 4 * nside;
    const std::int64_t ncap = 2 * nside * (nside - 1);
    const std::int64_t npix = 12 * nside * nside;
    const std::int64_t jr = kJrll[f.face] * nside - f.ix - f.iy - 1;

    std::int64_t nr, nBefore, kshift;
    if (jr < nside) {
        nr = jr;
        nBefore = 2 * nr * (nr - 1);
        kshift = 0;
    } else if (jr > 3 * nside) {
        nr = nl4 - jr;
        nBefore = npix - 2 * (nr + 1) * nr;
        kshift = 0;
    } else {
        nr = nside;
        nBefore = ncap + (jr - nside) * nl4;
        kshift = (jr - nside) & 1;
    }
    std::int64_t jp = (kJpll[f.face] * nr + f.ix - f.iy + 1 + kshift) / 2;
    if (jp > nl4)
        jp -= nl4;
    else if (jp < 1)
        jp += nl4;
    return nBefore + jp - 1;
}

FacePixel ringToXyf(std::int64_t pix, int order) {
    const std::int64_t nside = std::int64_t{1} << order;
    const std::int64_t nl2 = 2 * nside;
    const std::int64_t ncap = 2 * nside * (nside - 1);
    const std::int64_t npix = 12 * nside * nside;

    std::int64_t iring, iphi, kshift, nr;
    int face;
    if (pix < ncap) {
        iring = (1 + isqrt(1 + 2 * pix)) >> 1;
        iphi = (pix + 1) - 2 * iring * (iring - 1);
        kshift = 0;
        nr = iring;
        face = static_cast<int>((iphi - 1) / nr);
    } else if (pix < npix - ncap) {
        const std::int64_t ip = pix - ncap;
        const std::int64_t tmp = ip >> (order + 2);
        iring = tmp + nside;
        iphi = ip - tmp * 4 * nside + 1;
        kshift = (iring + nside) & 1;
        nr = nside;
        const std::int64_t ire = tmp + 1;
        const std::int64_t irm = nl2 + 2 - ire;
        const std::int64_t ifm = (iphi - ire / 2 + nside - 1) >> order;
        const std::int64_t ifp = (iphi - irm / 2 + nside - 1) >> order;
        face = static_cast<int>(ifp == ifm ? (ifp | 4) : (ifp < ifm ? ifp : ifm + 8));
    } else {
        const std::int64_t ip = npix - pix;
        iring = (1 + isqrt(2 * ip - 1)) >> 1;
        iphi = 4 * iring + 1 - (ip - 2 * iring * (iring - 1));
        kshift = 0;
        nr = iring;
        iring = 2 * nl2 - iring;
        face = static_cast<int>(8 + (iphi - 1) / nr);
    }

    const std::int64_t irt = iring - kJrll[face] * nside + 1;
    std::int64_t ipt = 2 * iphi - kJpll[face] * nr - kshift - 1;
    if (ipt >= nl2) ipt -= 8 * nside;
    return {face, (ipt - irt) >> 1, (-ipt - irt) >> 1};
}

UnitVector centerOfXyf(const FacePixel& f, int order) {
    const std::int64_t nside = std::int64_t{1} << order;
    const double ns = static_cast<double>(nside);
    const std::int64_t jr = kJrll[f.face] * nside - f.ix - f.iy - 1;

    std::int64_t nr;
    double z, sth;
    if (jr < nside) {
        nr = jr;
        const double tmp = static_cast<double>(nr) * static_cast<double>(nr) / (3.0 * ns * ns);
        z = 1.0 - tmp;
        sth = std::sqrt(tmp * (2.0 - tmp));
    } else if (jr > 3 * nside) {
        nr = 4 * nside - jr;
        const double tmp = static_cast<double>(nr) * static_cast<double>(nr) / (3.0 * ns * ns);
        z = tmp - 1.0;
        sth = std::sqrt(tmp * (2.0 - tmp));
    } else {
        nr = nside;
        z = static_cast<double>(2 * nside - jr) * 2.0 / (3.0 * ns);
        sth = std::sqrt((1.0 - z) * (1.0 + z));
    }
    std::int64_t tmp = kJpll[f.face] * nr + f.ix - f.iy;
    if (tmp < 0)
        tmp += 8 * nr;
    else if (tmp >= 8 * nr)
        tmp -= 8 * nr;
    const double phi = (kPi / 4.0) * static_cast<double>(tmp) / static_cast<double>(nr);
    return fromZPhi(z, phi, sth);
}

UnitVector faceLocation(double x, double y, int face) {
    const double jr = kJrll[face] - x - y;
    double nr, z, sth;
    if (jr < 1.0) {
        nr = jr;
        const double tmp = nr * nr / 3.0;
        z = 1.0 - tmp;
        sth = std::sqrt(tmp * (2.0 - tmp));
    } else if (jr > 3.0) {
        nr = 4.0 - jr;
        const double tmp = nr * nr / 3.0;
        z = tmp - 1.0;
        sth = std::sqrt(tmp * (2.0 - tmp));
    } else {
        nr = 1.0;
        z = (2.0 - jr) * 2.0 / 3.0;
        sth = std::sqrt((1.0 - z) * (1.0 + z));
    }
    double tmp = kJpll[face] * nr + x - y;
    if (tmp < 0.0) tmp += 8.0;
    if (tmp >= 8.0) tmp -= 8.0;
    const double phi = nr < 1e-15 ? 0.0 : (kPi / 4.0) * tmp / nr;
    return fromZPhi(z, phi, sth);
}

} // namespace detail

std::int64_t nestToRing(std::int64_t nestIndex, Resolution res) {
    checkIndex(nestIndex, res);
    return detail::xyfToRing(detail::nestToXyf(nestIndex - 1, res.order()), res.order()) + 1;
}

std::int64_t ringToNest(std::int64_t ringIndex, Resolution res) {
    checkIndex(ringIndex, res);
    return detail::xyfToNest(detail::ringToXyf(ringIndex - 1, res.order()), res.order()) + 1;
}

PixelId convertOrdering(const PixelId& p, Scheme target) {
    checkIndex(p.index, p.resolution);
    if (p.scheme == target) return p;
    const std::int64_t idx =
        target == Scheme::ring ? nestToRing(p.index, p.resolution) : ringToNest(p.index, p.resolution);
    return {idx, target, p.resolution};
}

UnitVector pixelCenter(const PixelId& p) {
    checkIndex(p.index, p.resolution);
    const int order = p.resolution.order();
    const auto f = p.scheme == Scheme::nested ? detail::nestToXyf(p.index - 1, order)
                                              : detail::ringToXyf(p.index - 1, order);
    return detail::centerOfXyf(f, order);
}

SphericalPoint pixelCenterSpherical(const PixelId& p) { return toSpherical(pixelCenter(p)); }

PixelId pixelContaining(const UnitVector& v, Resolution res, Scheme scheme) {
    const std::int64_t nside = res.nside();
    const int order = res.order();
    const double z = v.z;
    const double za = std::abs(z);
    const double sth = std::hypot(v.x, v.y);
    const double phi = wrapTwoPi(std::atan2(v.y, v.x));
    double tt = phi / (kPi / 2.0);
    if (tt >= 4.0) tt -= 4.0;

    detail::FacePixel f;
    const double ns = static_cast<double>(nside);
    if (za <= 2.0 / 3.0) {
        const double temp1 = ns * (0.5 + tt);
        const double temp2 = ns * (z * 0.75);
        const auto jp = static_cast<std::int64_t>(temp1 - temp2);
        const auto jm = static_cast<std::int64_t>(temp1 + temp2);
        const std::int64_t ifp = jp >> order;
        const std::int64_t ifm = jm >> order;
        f.face = static_cast<int>(ifp == ifm ? (ifp | 4) : (ifp < ifm ? ifp : ifm + 8));
        f.ix = jm & (nside - 1);
        f.iy = nside - (jp & (nside - 1)) - 1;
    } else {
        const int ntt = std::min(3, static_cast<int>(tt));
        const double tp = tt - ntt;
        // sth / sqrt((1+|z|)/3) equals sqrt(3(1-|z|)) without cancellation.
        const double tmp = ns * sth / std::sqrt((1.0 + za) / 3.0);
        std::int64_t jp = static_cast<std::int64_t>(tp * tmp);
        std::int64_t jm = static_cast<std::int64_t>((1.0 - tp) * tmp);
        jp = std::min(jp, nside - 1);
        jm = std::min(jm, nside - 1);
        if (z >= 0.0)
            f = {ntt, nside - jm - 1, nside - jp - 1};
        else
            f = {ntt + 8, jp, jm};
    }
    const std::int64_t nest0 = detail::xyfToNest(f, order);
    return fromNest0(nest0, scheme, res);
}

std::int64_t ancestor(std::int64_t nestIndex, int k) {
    if (nestIndex < 1) throw AddressingError("pixel index must be positive");
    if (k < 0 || k > kMaxOrder + 1) throw DomainError("ancestor depth outside [0, 30]");
    return ((nestIndex - 1) >> (2 * k)) + 1;
}

PixelId ancestor(const PixelId& p, int k) {
    requireNested(p, "ancestor");
    if (k < 0 || k > p.resolution.order())
        throw DomainError("ancestor depth " + std::to_string(k) + " exceeds resolution order " +
                          std::to_string(p.resolution.order()));
    return {ancestor(p.index, k), Scheme::nested, Resolution::fromOrder(p.resolution.order() - k)};
}

std::array<PixelId, 4> children(const PixelId& p) {
    requireNested(p, "children");
    if (p.resolution.order() >= kMaxOrder) throw DomainError("no finer resolution than order 29");
    const auto res = Resolution::fromOrder(p.resolution.order() + 1);
    const std::int64_t first = 4 * (p.index - 1) + 1;
    return {PixelId{first, Scheme::nested, res}, PixelId{first + 1, Scheme::nested, res},
            PixelId{first + 2, Scheme::nested, res}, PixelId{first + 3, Scheme::nested, res}};
}

std::vector<std::int64_t> pixelWindow(int j1, int j2, std::int64_t pixJ1) {
    if (j1 < 0 || j2 > kMaxOrder) throw DomainError("resolution level outside [0, 29]");
    if (j2 < j1) throw DomainError("pixelWindow requires j2 >= j1");
    checkIndex(pixJ1, Resolution::fromOrder(j1));
    const std::int64_t span = std::int64_t{1} << (2 * (j2 - j1));
    std::vector<std::int64_t> out(static_cast<std::size_t>(span));
    const std::int64_t first = (pixJ1 - 1) * span + 1;
    for (std::int64_t i = 0; i < span; ++i) out[static_cast<std::size_t>(i)] = first + i;
    return out;
}

std::vector<PixelId> neighbours(const PixelId& p) {
    checkIndex(p.index, p.resolution);
    const int order = p.resolution.order();
    const std::int64_t nside = p.resolution.nside();
    const auto f = detail::nestToXyf(toNest0(p), order);

    std::vector<PixelId> out;
    out.reserve(8);
    for (int i = 0; i < 8; ++i) {
        std::int64_t x = f.ix + kNbXOffset[i];
        std::int64_t y = f.iy + kNbYOffset[i];
        int nbnum = 4;
        if (x < 0) {
            x += nside;
            nbnum -= 1;
        } else if (x >= nside) {
            x -= nside;
            nbnum += 1;
        }
        if (y < 0) {
            y += nside;
            nbnum -= 3;
        } else if (y >= nside) {
            y -= nside;
            nbnum += 3;
        }
        const int face = kNbFace[nbnum][f.face];
        if (face < 0) continue;
        const int bits = kNbSwap[nbnum][f.face >> 2];
        if (bits & 1) x = nside - x - 1;
        if (bits & 2) y = nside - y - 1;
        if (bits & 4) std::swap(x, y);
        const auto nb = fromNest0(detail::xyfToNest({face, x, y}, order), p.scheme, p.resolution);
        // At nside = 1 two directions can reach the same base pixel.
        if (std::find(out.begin(), out.end(), nb) == out.end()) out.push_back(nb);
    }
    return out;
}

SearchResult nestSearch(const UnitVector& target, Resolution res) {
    auto bestAmong = [&](std::int64_t first, int order) {
        std::int64_t best = first;
        double bestDot = -2.0;
        for (std::int64_t c = first; c < first + (order == 0 ? 12 : 4); ++c) {
            const double d = detail::centerOfXyf(detail::nestToXyf(c, order), order).dot(target);
            if (d > bestDot) { // strict: earlier (smaller) index wins ties
                bestDot = d;
                best = c;
            }
        }
        return best;
    };

    std::int64_t best = bestAmong(0, 0);
    int visited = 12;
    for (int order = 1; order <= res.order(); ++order) {
        best = bestAmong(4 * best, order);
        visited += 4;
    }
    SearchResult r;
    r.pixel = {best + 1, Scheme::nested, res};
    r.visited = visited;
    r.distance = geodesicDistance(target, detail::centerOfXyf(detail::nestToXyf(best, res.order()), res.order()));
    return r;
}

std::vector<UnitVector> pixelBoundary(const PixelId& p, int samplesPerEdge) {
    checkIndex(p.index, p.resolution);
    if (samplesPerEdge < 1) throw DomainError("samplesPerEdge must be at least 1");
    const double ns = static_cast<double>(p.resolution.nside());
    const auto f = detail::nestToXyf(toNest0(p), p.resolution.order());
    const double x0 = static_cast<double>(f.ix) / ns, y0 = static_cast<double>(f.iy) / ns;
    const double d = 1.0 / ns;
    // Corners N, W, S, E in face coordinates.
    const std::array<std::pair<double, double>, 5> corners = {
        {{x0 + d, y0 + d}, {x0, y0 + d}, {x0, y0}, {x0 + d, y0}, {x0 + d, y0 + d}}};

    std::vector<UnitVector> out;
    out.reserve(static_cast<std::size_t>(4 * samplesPerEdge));
    for (int e = 0; e < 4; ++e) {
        const auto [ax, ay] = corners[static_cast<std::size_t>(e)];
        const auto [bx, by] = corners[static_cast<std::size_t>(e + 1)];
        for (int s = 0; s < samplesPerEdge; ++s) {
            const double t = static_cast<double>(s) / samplesPerEdge;
            out.push_back(detail::faceLocation(ax + t * (bx - ax), ay + t * (by - ay), f.face));
        }
    }
    return out;
}

} // namespace spherestat::healpix
