#pragma once

#include <cmath>
#include <numbers>
#include <variant>

namespace spherestat {

/// Point on the unit sphere in Cartesian form.
struct UnitVector {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double dot(const UnitVector& o) const { return x * o.x + y * o.y + z * o.z; }
    UnitVector cross(const UnitVector& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    /// Rescales an arbitrary non-zero vector onto the sphere.
    static UnitVector normalized(double x, double y, double z);

    friend bool operator==(const UnitVector&, const UnitVector&) = default;
};

/// Colatitude theta in [0, pi], longitude phi in [0, 2pi).
struct SphericalPoint {
    double theta = 0.0;
    double phi = 0.0;
};

/// Longitude / latitude in radians.
struct GeographicPoint {
    double lon = 0.0;
    double lat = 0.0;
};

enum class CoordSystem { cartesian, spherical, geographic };

using AnyPoint = std::variant<UnitVector, SphericalPoint, GeographicPoint>;

// Reduces an angle to [0, 2pi).
double wrapTwoPi(double angle);

UnitVector toUnitVector(const SphericalPoint& p);
SphericalPoint toSpherical(const UnitVector& v);
SphericalPoint geographicToSpherical(const GeographicPoint& g);
GeographicPoint sphericalToGeographic(const SphericalPoint& p);

/// Converts between any two coordinate systems. Non-finite input is a
/// DomainError.
AnyPoint convertCoords(const AnyPoint& point, CoordSystem to);

/// Right ascension (h, m, s) to degrees.
double hmsToDegrees(double hours, double minutes, double seconds);

/// Great-circle angle between two unit vectors, in [0, pi].
double geodesicDistance(const UnitVector& a, const UnitVector& b);

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

} // namespace spherestat
