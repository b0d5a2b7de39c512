#include "risloc/geometry.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace risloc;
using testsupport::pi;

TEST_CASE("rotation matrix identities") {
    CHECK(rotation_matrix(Vec3::Zero()).isApprox(Mat3::Identity(), 1e-15));

    // quarter turn about z maps x onto y
    const Vec3 mapped = rotation_matrix(Vec3(pi / 2, 0, 0)) * Vec3(1, 0, 0);
    CHECK(mapped.isApprox(Vec3(0, 1, 0), 1e-12));

    CHECK_THROWS_AS(rotation_matrix(Vec3(std::nan(""), 0, 0)), std::invalid_argument);
}

TEST_CASE("rotation matrix equals an independent composition of axis rotations") {
    const double a = pi / 6, b = pi / 6, g = pi / 6;
    Mat3 rz, ry, rx;
    rz << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
    rx << 1, 0, 0, 0, std::cos(g), -std::sin(g), 0, std::sin(g), std::cos(g);
    CHECK((rotation_matrix(Vec3(a, b, g)) - rz * ry * rx).norm() < 1e-14);
}

TEST_CASE("rotation matrices are orthonormal with unit determinant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-2.0 * pi, 2.0 * pi);
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = rotation_matrix(Vec3(angle(rng), angle(rng), angle(rng)));
        CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("rotation matrix derivative matches finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int i = 0; i < 20; ++i) {
        const Vec3 o(angle(rng), angle(rng), angle(rng));
        for (int axis = 0; axis < 3; ++axis) {
            const double h = 1e-7;
            Vec3 op = o, om = o;
            op[axis] += h;
            om[axis] -= h;
            const Mat3 fd = (rotation_matrix(op) - rotation_matrix(om)) / (2 * h);
            CHECK((fd - rotation_matrix_derivative(o, axis)).norm() < 1e-7);
        }
    }
}

TEST_CASE("yaw never moves the z coordinate of a rotated element") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> angle(-pi, pi);
    std::uniform_real_distribution<double> coord(-0.05, 0.05);
    for (int i = 0; i < 20; ++i) {
        const Vec3 o(angle(rng), angle(rng), angle(rng));
        const Vec3 p0(coord(rng), coord(rng), coord(rng));
        const Vec3 dz = rotation_matrix_derivative(o, 0) * p0;
        CHECK(dz[2] == 0.0);
    }
}

TEST_CASE("planar grid layouts") {
    const double d = 0.01;
    const ArrayLayout xy = ArrayLayout::planar_grid(4, d, GridPlane::xy);
    REQUIRE(xy.element_count() == 4);

    // mean-centered
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : xy.initial_positions)
        mean += p;
    CHECK(mean.norm() / 4 < 1e-15);

    // in-plane
    for (const Vec3& p : xy.initial_positions)
        CHECK(p[2] == 0.0);
    for (const Vec3& p : ArrayLayout::planar_grid(9, d, GridPlane::xz).initial_positions)
        CHECK(p[1] == 0.0);
    for (const Vec3& p : ArrayLayout::planar_grid(9, d, GridPlane::yz).initial_positions)
        CHECK(p[0] == 0.0);

    CHECK_THROWS_AS(ArrayLayout::planar_grid(5, d, GridPlane::xy), std::invalid_argument);
    CHECK_THROWS_AS(ArrayLayout::planar_grid(4, 0.0, GridPlane::xy), std::invalid_argument);
}

TEST_CASE("resolve_array reproduces the layout at identity pose") {
    const ArrayLayout layout = ArrayLayout::planar_grid(9, 0.02, GridPlane::xy);
    const ResolvedArray arr = resolve_array(StationPose{}, layout);
    for (int i = 0; i < 9; ++i)
        CHECK((arr.element_positions[i] - layout.initial_positions[i]).norm() < 1e-15);
}

TEST_CASE("MS grid at half-wavelength spacing has 5.353 mm nearest-neighbor distance") {
    const double lam = speed_of_light / 28e9;
    const ArrayLayout layout = ArrayLayout::planar_grid(4, lam / 2, GridPlane::xy);
    double min_dist = 1e9;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            min_dist = std::min(min_dist,
                                (layout.initial_positions[i] - layout.initial_positions[j]).norm());
    CHECK(min_dist == doctest::Approx(5.3534e-3).epsilon(1e-4));
}

TEST_CASE("rotated array equals elementwise application of the rotation matrix") {
    const ArrayLayout layout = ArrayLayout::planar_grid(4, 0.01, GridPlane::xy);
    const StationPose pose{Vec3(1, 2, 3), Vec3(pi / 6, pi / 6, pi / 6)};
    const ResolvedArray arr = resolve_array(pose, layout);
    const Mat3 r = rotation_matrix(pose.orientation);
    for (int i = 0; i < 4; ++i) {
        CHECK((arr.local_positions[i] - r * layout.initial_positions[i]).norm() < 1e-15);
        CHECK((arr.element_positions[i] - (pose.centroid + r * layout.initial_positions[i]))
                  .norm() < 1e-15);
    }
}

TEST_CASE("per-element spherical triples reproduce the local positions") {
    const ArrayLayout layout = ArrayLayout::planar_grid(16, 0.01, GridPlane::yz);
    const StationPose pose{Vec3(5, -2, 1), Vec3(0.3, -0.8, 1.2)};
    const ResolvedArray arr = resolve_array(pose, layout);
    for (int i = 0; i < arr.count(); ++i) {
        const Vec3 back = cartesian_from_spherical(arr.local_spherical[i]);
        const double scale = std::max(arr.local_positions[i].norm(), 1e-30);
        CHECK((back - arr.local_positions[i]).norm() / scale < 1e-12);
    }
}

TEST_CASE("centroid_link examples") {
    const LinkGeometry unit_x = centroid_link(Vec3(0, 0, 0), Vec3(1, 0, 0));
    CHECK(unit_x.distance == doctest::Approx(1.0));
    CHECK(unit_x.elevation == doctest::Approx(0.0));
    CHECK(unit_x.azimuth == doctest::Approx(0.0));
    CHECK_FALSE(unit_x.at_pole);

    // pole case: azimuth fixed to zero and flagged
    const LinkGeometry pole = centroid_link(Vec3(0, 0, 0), Vec3(0, 0, 2));
    CHECK(pole.distance == doctest::Approx(2.0));
    CHECK(pole.elevation == doctest::Approx(pi / 2));
    CHECK(pole.azimuth == 0.0);
    CHECK(pole.at_pole);

    const LinkGeometry diag = centroid_link(Vec3(0, 0, 0), Vec3(10, 10, -1));
    CHECK(diag.distance == doctest::Approx(std::sqrt(201.0)));
    CHECK(diag.elevation == doctest::Approx(std::asin(-1.0 / std::sqrt(201.0))));
    CHECK(diag.azimuth == doctest::Approx(pi / 4));

    CHECK_THROWS_AS(centroid_link(Vec3(1, 2, 3), Vec3(1, 2, 3)), DegenerateGeometryError);
}

TEST_CASE("centroid_link round-trips the coordinate parameterization") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coord(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        const Vec3 a(coord(rng), coord(rng), coord(rng));
        const Vec3 b(coord(rng), coord(rng), coord(rng));
        if ((b - a).norm() < 1e-6)
            continue;
        const LinkGeometry link = centroid_link(a, b);
        const Vec3 rebuilt = a + link.distance * link.unit();
        CHECK((rebuilt - b).norm() / (b - a).norm() < 1e-10);
    }
}

TEST_CASE("pairwise element distances are invariant under rigid rotation") {
    const ArrayLayout layout = ArrayLayout::planar_grid(9, 0.013, GridPlane::xy);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> angle(-pi, pi);
    const ResolvedArray ref = resolve_array(StationPose{Vec3(1, 1, 1), Vec3::Zero()}, layout);
    for (int trial = 0; trial < 50; ++trial) {
        const StationPose pose{Vec3(1, 1, 1), Vec3(angle(rng), angle(rng), angle(rng))};
        const ResolvedArray rot = resolve_array(pose, layout);
        for (int i = 0; i < 9; ++i)
            for (int j = i + 1; j < 9; ++j) {
                const double d_ref = (ref.element_positions[i] - ref.element_positions[j]).norm();
                const double d_rot = (rot.element_positions[i] - rot.element_positions[j]).norm();
                CHECK(std::abs(d_ref - d_rot) / d_ref < 1e-12);
            }
    }
}
