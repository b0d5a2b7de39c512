#include "risloc/geometry.hpp"

#include <cmath>

namespace risloc {

namespace {

Mat3 rot_z(double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0.0, std::sin(a), std::cos(a), 0.0, 0.0, 0.0, 1.0;
    return r;
}

Mat3 rot_y(double b) {
    Mat3 r;
    r << std::cos(b), 0.0, std::sin(b), 0.0, 1.0, 0.0, -std::sin(b), 0.0, std::cos(b);
    return r;
}

Mat3 rot_x(double g) {
    Mat3 r;
    r << 1.0, 0.0, 0.0, 0.0, std::cos(g), -std::sin(g), 0.0, std::sin(g), std::cos(g);
    return r;
}

Mat3 rot_z_deriv(double a) {
    Mat3 r;
    r << -std::sin(a), -std::cos(a), 0.0, std::cos(a), -std::sin(a), 0.0, 0.0, 0.0, 0.0;
    return r;
}

Mat3 rot_y_deriv(double b) {
    Mat3 r;
    r << -std::sin(b), 0.0, std::cos(b), 0.0, 0.0, 0.0, -std::cos(b), 0.0, -std::sin(b);
    return r;
}

Mat3 rot_x_deriv(double g) {
    Mat3 r;
    r << 0.0, 0.0, 0.0, 0.0, -std::sin(g), -std::cos(g), 0.0, std::cos(g), -std::sin(g);
    return r;
}

bool is_perfect_square(int n, int& root) {
    if (n <= 0)
        return false;
    root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    return root * root == n;
}

} // namespace

Mat3 rotation_matrix(const Vec3& o) {
    if (!o.allFinite())
        throw std::invalid_argument("rotation_matrix: orientation angles must be finite");
    return rot_z(o[0]) * rot_y(o[1]) * rot_x(o[2]);
}

Mat3 rotation_matrix_derivative(const Vec3& o, int axis) {
    if (!o.allFinite())
        throw std::invalid_argument("rotation_matrix_derivative: orientation angles must be finite");
    switch (axis) {
    case 0:
        return rot_z_deriv(o[0]) * rot_y(o[1]) * rot_x(o[2]);
    case 1:
        return rot_z(o[0]) * rot_y_deriv(o[1]) * rot_x(o[2]);
    case 2:
        return rot_z(o[0]) * rot_y(o[1]) * rot_x_deriv(o[2]);
    default:
        throw std::invalid_argument("rotation_matrix_derivative: axis must be 0, 1 or 2");
    }
}

ArrayLayout ArrayLayout::planar_grid(int count, double spacing, GridPlane plane) {
    int root = 0;
    if (!is_perfect_square(count, root))
        throw std::invalid_argument("planar_grid: element count must be a positive perfect square");
    if (!(spacing > 0.0))
        throw std::invalid_argument("planar_grid: spacing must be positive");

    ArrayLayout layout;
    layout.spacing = spacing;
    layout.initial_positions.reserve(count);
    // Row-major floor/modulo indexing with i = 1..count is the canonical element ordering.
    for (int i = 1; i <= count; ++i) {
        const double major = static_cast<double>(i / root);
        const double minor = static_cast<double>(i % root);
        Vec3 p;
        switch (plane) {
        case GridPlane::xz:
            p = Vec3(major, 0.0, minor);
            break;
        case GridPlane::yz:
            p = Vec3(0.0, major, minor);
            break;
        case GridPlane::xy:
            p = Vec3(major, minor, 0.0);
            break;
        }
        layout.initial_positions.push_back(spacing * p);
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : layout.initial_positions)
        mean += p;
    mean /= static_cast<double>(count);
    for (Vec3& p : layout.initial_positions)
        p -= mean;
    return layout;
}

SphericalCoord spherical_from_cartesian(const Vec3& p) {
    SphericalCoord s;
    s.range = p.norm();
    if (s.range == 0.0)
        return s;
    double z_ratio = p[2] / s.range;
    z_ratio = std::clamp(z_ratio, -1.0, 1.0);
    s.elevation = std::asin(z_ratio);
    const double horiz = std::hypot(p[0], p[1]);
    s.azimuth = (horiz <= 1e-14 * s.range) ? 0.0 : std::atan2(p[1], p[0]);
    return s;
}

Vec3 cartesian_from_spherical(const SphericalCoord& s) {
    const double ce = std::cos(s.elevation);
    return s.range * Vec3(ce * std::cos(s.azimuth), ce * std::sin(s.azimuth), std::sin(s.elevation));
}

Vec3 LinkGeometry::unit() const {
    const double ce = std::cos(elevation);
    return Vec3(ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation));
}

Vec3 LinkGeometry::unit_d_elevation() const {
    const double se = std::sin(elevation);
    return Vec3(-se * std::cos(azimuth), -se * std::sin(azimuth), std::cos(elevation));
}

Vec3 LinkGeometry::unit_d_azimuth() const {
    const double ce = std::cos(elevation);
    return Vec3(-ce * std::sin(azimuth), ce * std::cos(azimuth), 0.0);
}

ResolvedArray resolve_array(const StationPose& pose, const ArrayLayout& layout) {
    if (layout.element_count() == 0)
        throw std::invalid_argument("resolve_array: layout has no elements");
    const Mat3 rot = rotation_matrix(pose.orientation);
    ResolvedArray out;
    out.centroid = pose.centroid;
    out.element_positions.reserve(layout.initial_positions.size());
    out.local_positions.reserve(layout.initial_positions.size());
    out.local_spherical.reserve(layout.initial_positions.size());
    for (const Vec3& p0 : layout.initial_positions) {
        const Vec3 local = rot * p0;
        out.local_positions.push_back(local);
        out.element_positions.push_back(pose.centroid + local);
        out.local_spherical.push_back(spherical_from_cartesian(local));
    }
    return out;
}

LinkGeometry centroid_link(const Vec3& a, const Vec3& b) {
    const Vec3 diff = b - a;
    const double d = diff.norm();
    if (d == 0.0)
        throw DegenerateGeometryError("centroid_link: coincident centroids");
    LinkGeometry link;
    link.distance = d;
    double z_ratio = std::clamp(diff[2] / d, -1.0, 1.0);
    link.elevation = std::asin(z_ratio);
    const double horiz = std::hypot(diff[0], diff[1]);
    if (horiz <= 1e-14 * d) {
        link.azimuth = 0.0;
        link.at_pole = true;
    } else {
        link.azimuth = std::atan2(diff[1], diff[0]);
    }
    return link;
}

LinkGeometry centroid_link(const StationPose& a, const StationPose& b) {
    return centroid_link(a.centroid, b.centroid);
}

} // namespace risloc
