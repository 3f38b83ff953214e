#include "spherestat/coords.hpp"

#include <algorithm>

#include "spherestat/errors.hpp"

namespace spherestat {

namespace {

void requireFinite(std::initializer_list<double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("non-finite coordinate");
}

} // namespace

UnitVector UnitVector::normalized(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero or non-finite vector");
    return {x / n, y / n, z / n};
}

double wrapTwoPi(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a value just below a multiple of 2pi can round up to 2pi.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

UnitVector toUnitVector(const SphericalPoint& p) {
    const double st = std::sin(p.theta);
    return {st * std::cos(p.phi), st * std::sin(p.phi), std::cos(p.theta)};
}

SphericalPoint toSpherical(const UnitVector& v) {
    const double rho = std::hypot(v.x, v.y);
    const double theta = std::atan2(rho, v.z);
    // At the poles longitude is meaningless; pin it to 0.
    const double phi = rho == 0.0 ? 0.0 : wrapTwoPi(std::atan2(v.y, v.x));
    return {theta, phi};
}

SphericalPoint geographicToSpherical(const GeographicPoint& g) {
    return {kPi / 2.0 - g.lat, wrapTwoPi(g.lon)};
}

GeographicPoint sphericalToGeographic(const SphericalPoint& p) {
    double lon = wrapTwoPi(p.phi);
    if (lon > kPi) lon -= kTwoPi;
    return {lon, kPi / 2.0 - p.theta};
}

AnyPoint convertCoords(const AnyPoint& point, CoordSystem to) {
    // Everything routes through the spherical form.
    SphericalPoint sph = std::visit(
        [](const auto& p) -> SphericalPoint {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, UnitVector>) {
                requireFinite({p.x, p.y, p.z});
                return toSpherical(UnitVector::normalized(p.x, p.y, p.z));
            } else if constexpr (std::is_same_v<T, SphericalPoint>) {
                requireFinite({p.theta, p.phi});
                if (p.theta < 0.0 || p.theta > kPi) throw DomainError("colatitude outside [0, pi]");
                return {p.theta, wrapTwoPi(p.phi)};
            } else {
                requireFinite({p.lon, p.lat});
                if (p.lat < -kPi / 2.0 || p.lat > kPi / 2.0) throw DomainError("latitude outside [-pi/2, pi/2]");
                return geographicToSpherical(p);
            }
        },
        point);

    switch (to) {
    case CoordSystem::cartesian:
        if (const auto* v = std::get_if<UnitVector>(&point)) return UnitVector::normalized(v->x, v->y, v->z);
        return toUnitVector(sph);
    case CoordSystem::spherical: return sph;
    case CoordSystem::geographic: return sphericalToGeographic(sph);
    }
    throw DomainError("unknown coordinate system");
}

double hmsToDegrees(double hours, double minutes, double seconds) {
    requireFinite({hours, minutes, seconds});
    if (hours < 0.0 || hours >= 24.0) throw DomainError("hours outside [0, 24)");
    if (minutes < 0.0 || minutes >= 60.0) throw DomainError("minutes outside [0, 60)");
    if (seconds < 0.0 || seconds >= 60.0) throw DomainError("seconds outside [0, 60)");
    return 15.0 * (hours + minutes / 60.0 + seconds / 3600.0);
}

double geodesicDistance(const UnitVector& a, const UnitVector& b) {
    // atan2 form keeps full precision for nearly (anti)parallel vectors,
    // where arccos of the dot product loses digits.
    const double s = a.cross(b).norm();
    const double c = std::clamp(a.dot(b), -1.0, 1.0);
    return std::atan2(s, c);
}

} // namespace spherestat
