#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace risloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Thrown when a computation is requested on a geometrically degenerate input
/// (e.g. coincident station centroids).
class DegenerateGeometryError : public std::runtime_error {
  public:
    explicit DegenerateGeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Centroid position plus orientation of one station's array.
/// Orientation is (alpha, beta, gamma) = yaw about z, pitch about y, roll about x, in radians.
struct StationPose {
    Vec3 centroid{Vec3::Zero()};
    Vec3 orientation{Vec3::Zero()};
};

/// Coordinate plane of a default planar grid before any rotation is applied.
enum class GridPlane { xz, yz, xy };

/// Element offsets from the array centroid before rotation.
struct ArrayLayout {
    std::vector<Vec3> initial_positions;
    double spacing{0.0}; // inter-element spacing in meters; 0 for custom layouts

    int element_count() const { return static_cast<int>(initial_positions.size()); }

    /// Planar floor/modulo grid with `count` elements (a positive perfect square) lying in
    /// `plane`, re-centered so that the element mean coincides with the centroid.
    static ArrayLayout planar_grid(int count, double spacing, GridPlane plane);
};

/// (d_s, theta_s, phi_s): range, elevation and azimuth of a point seen from the origin.
struct SphericalCoord {
    double range{0.0};
    double elevation{0.0};
    double azimuth{0.0};
};

/// Array elements resolved into absolute coordinates for a given pose.
struct ResolvedArray {
    Vec3 centroid{Vec3::Zero()};
    std::vector<Vec3> element_positions;        // centroid + R * initial
    std::vector<Vec3> local_positions;          // R * initial
    std::vector<SphericalCoord> local_spherical; // spherical triple of each local offset

    int count() const { return static_cast<int>(element_positions.size()); }
};

/// Distance and bearing of centroid b seen from centroid a:
///   b - a = distance * (cos(el)cos(az), cos(el)sin(az), sin(el)).
/// At the elevation poles the azimuth is undefined; it is fixed to 0 and flagged.
struct LinkGeometry {
    double distance{0.0};
    double elevation{0.0};
    double azimuth{0.0};
    bool at_pole{false};

    Vec3 unit() const;             // direction a -> b
    Vec3 unit_d_elevation() const; // d(unit)/d(elevation)
    Vec3 unit_d_azimuth() const;   // d(unit)/d(azimuth)
};

/// R(alpha, beta, gamma) = Rz(alpha) * Ry(beta) * Rx(gamma), counterclockwise rotations.
Mat3 rotation_matrix(const Vec3& orientation);

/// Derivative of rotation_matrix with respect to orientation component `axis`
/// (0 = alpha, 1 = beta, 2 = gamma).
Mat3 rotation_matrix_derivative(const Vec3& orientation, int axis);

SphericalCoord spherical_from_cartesian(const Vec3& p);
Vec3 cartesian_from_spherical(const SphericalCoord& s);

ResolvedArray resolve_array(const StationPose& pose, const ArrayLayout& layout);

LinkGeometry centroid_link(const Vec3& a, const Vec3& b);
LinkGeometry centroid_link(const StationPose& a, const StationPose& b);

} // namespace risloc
