#include "spherestat/windows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spherestat/errors.hpp"

namespace spherestat {

namespace {

struct Vec2 {
    double x, y;
};

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Tangent-plane (gnomonic) projection about a unit vector.
struct Gnomonic {
    UnitVector c, e1, e2;

    explicit Gnomonic(const UnitVector& centre) : c(centre) {
        // Any axis not parallel to c seeds the basis.
        UnitVector axis{1.0, 0.0, 0.0};
        if (std::abs(c.x) > 0.6) axis = {0.0, 1.0, 0.0};
        const UnitVector t = c.cross(axis);
        e1 = UnitVector::normalized(t.x, t.y, t.z);
        e2 = c.cross(e1);
    }

    Vec2 project(const UnitVector& v) const {
        const double w = v.dot(c);
        return {v.dot(e1) / w, v.dot(e2) / w};
    }
};

bool segmentsIntersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = cross2(c, d, a), d2 = cross2(c, d, b);
    const double d3 = cross2(a, b, c), d4 = cross2(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto onSegment = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
               r.y <= std::max(p.y, q.y);
    };
    if (d1 == 0 && onSegment(c, d, a)) return true;
    if (d2 == 0 && onSegment(c, d, b)) return true;
    if (d3 == 0 && onSegment(a, b, c)) return true;
    if (d4 == 0 && onSegment(a, b, d)) return true;
    return false;
}

bool inTriangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross2(a, b, p) >= 0 && cross2(b, c, p) >= 0 && cross2(c, a, p) >= 0;
}

// Ear clipping over a counter-clockwise planar polygon. Returns index triples.
std::vector<std::array<std::size_t, 3>> earClip(const std::vector<Vec2>& pts) {
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<std::array<std::size_t, 3>> out;

    auto isEar = [&](std::size_t k, bool allowFlat) {
        const std::size_t m = idx.size();
        const std::size_t a = idx[(k + m - 1) % m], b = idx[k], c = idx[(k + 1) % m];
        const double cr = cross2(pts[a], pts[b], pts[c]);
        if (allowFlat ? cr < 0 : cr <= 0) return false;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t v = idx[j];
            if (v == a || v == b || v == c) continue;
            if (inTriangle(pts[v], pts[a], pts[b], pts[c])) return false;
        }
        return true;
    };

    while (idx.size() > 3) {
        bool clipped = false;
        for (int pass = 0; pass < 2 && !clipped; ++pass) {
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (!isEar(k, pass == 1)) continue;
                const std::size_t m = idx.size();
                out.push_back({idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]});
                idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(k));
                clipped = true;
                break;
            }
        }
        if (!clipped) throw GeometryError("polygon could not be triangulated");
    }
    out.push_back({idx[0], idx[1], idx[2]});
    return out;
}

UnitVector unitNormal(const UnitVector& a, const UnitVector& b) {
    const UnitVector n = a.cross(b);
    return UnitVector::normalized(n.x, n.y, n.z);
}

constexpr double kBoundaryTol = 1e-14;
// Absorbs rounding in acos so that boundary points stay inside.
constexpr double kDiscTol = 1e-12;

bool insideTriangle(const SphericalTriangle& t, const UnitVector& p) {
    for (std::size_t i = 0; i < 3; ++i) {
        const UnitVector n = t[i].cross(t[(i + 1) % 3]);
        const double len = n.norm();
        if (n.dot(p) < -kBoundaryTol * len) return false;
    }
    return true;
}

} // namespace

double sphericalTriangleArea(const UnitVector& a, const UnitVector& b, const UnitVector& c) {
    const double triple = a.dot(b.cross(c));
    const double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(std::abs(triple), denom);
}

Window Window::disc(const SphericalPoint& center, double radius, bool complement) {
    if (!std::isfinite(radius) || radius <= 0.0 || radius >= kPi)
        throw GeometryError("disc radius must lie in (0, pi)");
    if (!std::isfinite(center.theta) || !std::isfinite(center.phi) || center.theta < 0.0 || center.theta > kPi)
        throw DomainError("disc centre outside the sphere's coordinate range");
    Window w;
    w.kind_ = WindowKind::disc;
    w.complement_ = complement;
    w.center_ = {center.theta, wrapTwoPi(center.phi)};
    w.centerVector_ = toUnitVector(w.center_);
    w.radius_ = radius;
    w.shapeArea_ = kTwoPi * (1.0 - std::cos(radius));
    return w;
}

Window Window::polygon(const std::vector<SphericalPoint>& vertices, bool complement, bool assumedConvex) {
    const std::size_t n = vertices.size();
    if (n < 3) throw GeometryError("a polygon needs at least 3 vertices");

    std::vector<UnitVector> vs;
    vs.reserve(n);
    for (const auto& v : vertices) {
        if (!std::isfinite(v.theta) || !std::isfinite(v.phi) || v.theta < 0.0 || v.theta > kPi)
            throw DomainError("polygon vertex outside the sphere's coordinate range");
        vs.push_back(toUnitVector(v));
    }
    for (std::size_t i = 0; i < n; ++i)
        if (geodesicDistance(vs[i], vs[(i + 1) % n]) < 1e-12)
            throw GeometryError("polygon has repeated consecutive vertices");

    double sx = 0, sy = 0, sz = 0;
    for (const auto& v : vs) {
        sx += v.x;
        sy += v.y;
        sz += v.z;
    }
    if (std::sqrt(sx * sx + sy * sy + sz * sz) < 1e-12) throw GeometryError("polygon spans more than a hemisphere");
    const UnitVector centroid = UnitVector::normalized(sx, sy, sz);
    for (const auto& v : vs)
        if (v.dot(centroid) <= 1e-12) throw GeometryError("polygon spans more than a hemisphere");

    const Gnomonic proj(centroid);
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (const auto& v : vs) pts.push_back(proj.project(v));

    double signedArea = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % n];
        signedArea += a.x * b.y - b.x * a.y;
    }
    if (std::abs(signedArea) < 1e-14) throw DegenerateRegionError("polygon has zero area");

    std::vector<SphericalPoint> ordered = vertices;
    if (signedArea < 0) {
        std::reverse(ordered.begin(), ordered.end());
        std::reverse(vs.begin(), vs.end());
        std::reverse(pts.begin(), pts.end());
    }

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segmentsIntersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]))
                throw GeometryError("polygon edges intersect");
        }

    if (assumedConvex) {
        for (std::size_t i = 0; i < n; ++i)
            if (cross2(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]) < 0)
                throw GeometryError("polygon flagged convex has a reflex vertex");
    }

    Window w;
    w.kind_ = WindowKind::polygon;
    w.complement_ = complement;
    w.assumedConvex_ = assumedConvex;
    w.vertices_ = std::move(ordered);
    w.vertexVectors_ = vs;
    for (std::size_t i = 0; i < n; ++i) w.edgeNormals_.push_back(unitNormal(vs[i], vs[(i + 1) % n]));
    for (const auto& t : earClip(pts)) w.triangles_.push_back({vs[t[0]], vs[t[1]], vs[t[2]]});
    for (const auto& t : w.triangles_) w.shapeArea_ += sphericalTriangleArea(t[0], t[1], t[2]);
    if (w.shapeArea_ <= 0.0) throw DegenerateRegionError("polygon has zero area");
    return w;
}

Window Window::complemented() const {
    Window w = *this;
    w.complement_ = !complement_;
    return w;
}

double Window::area() const { return complement_ ? kFourPi - shapeArea_ : shapeArea_; }

bool Window::containsShape(const UnitVector& p) const {
    if (kind_ == WindowKind::disc) return geodesicDistance(centerVector_, p) <= radius_ + kDiscTol;
    if (assumedConvex_) {
        for (const auto& nrm : edgeNormals_)
            if (nrm.dot(p) < -kBoundaryTol) return false;
        return true;
    }
    return std::any_of(triangles_.begin(), triangles_.end(),
                       [&](const SphericalTriangle& t) { return insideTriangle(t, p); });
}

bool Window::contains(const UnitVector& p) const { return containsShape(p) != complement_; }

std::string Window::typeName() const {
    const std::string base = kind_ == WindowKind::disc ? "disc" : "polygon";
    return complement_ ? "minus." + base : base;
}

bool WindowSet::contains(const UnitVector& p) const {
    bool anyPlain = false, inUnion = false;
    for (const auto& w : windows) {
        if (w.complement()) {
            if (!w.contains(p)) return false;
        } else {
            anyPlain = true;
            if (!inUnion && w.contains(p)) inUnion = true;
        }
    }
    return !anyPlain || inUnion;
}

std::vector<Window> triangulate(const Window& w) {
    if (w.kind() != WindowKind::polygon) throw GeometryError("only polygon windows can be triangulated");
    std::vector<Window> out;
    out.reserve(w.triangles_.size());
    for (const auto& t : w.triangles_) {
        Window tri;
        tri.kind_ = WindowKind::polygon;
        tri.assumedConvex_ = true;
        for (const auto& v : t) {
            tri.vertexVectors_.push_back(v);
            tri.vertices_.push_back(toSpherical(v));
        }
        for (std::size_t i = 0; i < 3; ++i) {
            const UnitVector n = t[i].cross(t[(i + 1) % 3]);
            const double len = n.norm();
            // Flat ears (collinear vertices) keep a zero normal: they admit
            // no interior points but still count toward the n - 2 total.
            tri.edgeNormals_.push_back(len > 0 ? UnitVector{n.x / len, n.y / len, n.z / len} : UnitVector{0, 0, 0});
        }
        tri.triangles_ = {t};
        tri.shapeArea_ = sphericalTriangleArea(t[0], t[1], t[2]);
        out.push_back(std::move(tri));
    }
    return out;
}

double extremalDistance(const std::vector<UnitVector>& points, const std::optional<UnitVector>& target,
                        Extremum mode) {
    if (points.empty()) throw DomainError("extremalDistance needs at least one point");
    const bool wantMax = mode == Extremum::max;
    double best = wantMax ? -1.0 : std::numeric_limits<double>::infinity();
    auto consider = [&](double d) { best = wantMax ? std::max(best, d) : std::min(best, d); };

    if (target) {
        for (const auto& p : points) consider(geodesicDistance(p, *target));
        return best;
    }
    if (points.size() < 2) throw DomainError("pairwise extremalDistance needs at least two points");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) consider(geodesicDistance(points[i], points[j]));
    return best;
}

} // namespace spherestat
