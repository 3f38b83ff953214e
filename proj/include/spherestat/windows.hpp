#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spherestat/coords.hpp"

namespace spherestat {

enum class WindowKind { disc, polygon };

using SphericalTriangle = std::array<UnitVector, 3>;

/// A closed spherical region: a cap (disc) or a geodesic polygon, optionally
/// replaced by its complement. Boundary points belong to the region.
///
/// Polygons must lie strictly inside the hemisphere centred on their vertex
/// centroid and must not self-intersect. Vertices are stored counter-clockwise
/// (seen from outside the sphere) regardless of input orientation.
class Window {
  public:
    static Window disc(const SphericalPoint& center, double radius, bool complement = false);
    static Window polygon(const std::vector<SphericalPoint>& vertices, bool complement = false,
                          bool assumedConvex = false);

    WindowKind kind() const { return kind_; }
    bool complement() const { return complement_; }
    bool assumedConvex() const { return assumedConvex_; }
    Window complemented() const;

    const SphericalPoint& center() const { return center_; } // disc only
    double radius() const { return radius_; }                 // disc only
    const std::vector<SphericalPoint>& vertices() const { return vertices_; }
    const std::vector<UnitVector>& vertexVectors() const { return vertexVectors_; }

    /// Analytic area in steradians.
    double area() const;
    bool contains(const UnitVector& p) const;

    /// "disc", "minus.disc", "polygon" or "minus.polygon".
    std::string typeName() const;

    /// Triangles of the (uncomplemented) polygon, n - 2 of them.
    const std::vector<SphericalTriangle>& triangles() const { return triangles_; }

  private:
    Window() = default;
    bool containsShape(const UnitVector& p) const;

    WindowKind kind_ = WindowKind::disc;
    bool complement_ = false;
    bool assumedConvex_ = false;
    SphericalPoint center_{};
    UnitVector centerVector_{};
    double radius_ = 0.0;
    std::vector<SphericalPoint> vertices_;
    std::vector<UnitVector> vertexVectors_;
    std::vector<UnitVector> edgeNormals_;
    std::vector<SphericalTriangle> triangles_;
    double shapeArea_ = 0.0;

    friend std::vector<Window> triangulate(const Window& w);
};

/// Union of the plain members intersected with every complemented member.
/// With no plain members the union term is the whole sphere.
struct WindowSet {
    std::vector<Window> windows;

    bool contains(const UnitVector& p) const;
    bool empty() const { return windows.empty(); }
};

/// Splits a polygon window into n - 2 convex spherical triangles with
/// disjoint interiors (ear clipping in the gnomonic plane).
std::vector<Window> triangulate(const Window& w);

/// Area of the geodesic triangle abc.
double sphericalTriangleArea(const UnitVector& a, const UnitVector& b, const UnitVector& c);

enum class Extremum { max, min };

/// Largest/smallest geodesic distance among all pairs of points, or between
/// each point and the target when one is given.
double extremalDistance(const std::vector<UnitVector>& points, const std::optional<UnitVector>& target,
                        Extremum mode);

} // namespace spherestat
