#include "doctest.h"

#include "gazelab/error.hpp"
#include "gazelab/geometry.hpp"

#include <cmath>
#include <random>
#include <set>

using namespace gazelab;

namespace {

double deg_atan(double v) { return std::atan(v) * 180.0 / M_PI; }

// Angle between two vectors by the plain dot-product formula.
double dot_angle_deg(Vec3 a, Vec3 b) {
    const double c = (a.x * b.x + a.y * b.y + a.z * b.z) /
                     (std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z) * std::sqrt(b.x * b.x + b.y * b.y + b.z * b.z));
    return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("grid constants") {
    const TargetGrid g = build_grid();
    CHECK(g.targets().size() == 52);
    CHECK(g.radii_cm() == std::array<double, 4>{29.4, 49.7, 60.6, 96.1});
    CHECK(g.eye_height_cm() == 35.0);
    CHECK(g.column_step_deg() == 10.0);
    CHECK(g.table_y() == -35.0);
    std::set<std::pair<int, int>> ids;
    for (const auto& t : g.targets()) {
        ids.insert({t.row(), t.col()});
        CHECK(t.position.y == -35.0);
        CHECK(std::hypot(t.position.x, t.position.z) == doctest::Approx(g.radii_cm()[t.row() - 1]).epsilon(1e-14));
    }
    CHECK(ids.size() == 52);
}

TEST_CASE("row 4 center target") {
    const TargetGrid g = build_grid();
    const Target& t = g.at(4, 7);
    CHECK(t.position.x == 0.0);
    CHECK(t.position.y == -35.0);
    CHECK(t.position.z == doctest::Approx(96.1).epsilon(1e-15));
    const GazeDirection d = gaze_to_target({}, t);
    CHECK(d.azimuth_deg() == doctest::Approx(0.0));
    CHECK(d.elevation_deg() == doctest::Approx(-deg_atan(35.0 / 96.1)).epsilon(1e-12));
    CHECK(d.elevation_deg() == doctest::Approx(-20.01).epsilon(1e-3));
}

TEST_CASE("outer columns at +-60 degrees") {
    const TargetGrid g = build_grid();
    CHECK(gaze_to_target({}, g.at(1, 1)).azimuth_deg() == doctest::Approx(-60.0));
    CHECK(gaze_to_target({}, g.at(1, 13)).azimuth_deg() == doctest::Approx(60.0));
    for (int r = 1; r <= 4; ++r) {
        for (int c = 1; c <= 13; ++c) {
            const double a = gaze_to_target({}, g.at(r, c)).azimuth_deg();
            const double m = gaze_to_target({}, g.at(r, 14 - c)).azimuth_deg();
            CHECK(a == doctest::Approx(-m).epsilon(1e-12));
            CHECK(a == doctest::Approx(10.0 * (c - 7)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gaze_to_target") {
    const TargetGrid g = build_grid();
    const GazeDirection d3 = gaze_to_target({}, g.at(3, 7));
    CHECK(d3.elevation_deg() == doctest::Approx(-deg_atan(35.0 / 60.6)).epsilon(1e-12));
    CHECK(d3.elevation_deg() == doctest::Approx(-30.01).epsilon(1e-3));

    const Target& t = g.at(2, 5);
    const GazeDirection axis = gaze_to_target(t.position - Vec3{0, 0, 1}, t);
    CHECK(axis.vector().x == doctest::Approx(0.0));
    CHECK(axis.vector().y == doctest::Approx(0.0));
    CHECK(axis.vector().z == doctest::Approx(1.0));

    CHECK_THROWS_AS(gaze_to_target(t.position, t), DegenerateGeometryError);
}

TEST_CASE("visual angles") {
    const TargetGrid g = build_grid();
    CHECK(visual_angle_between({}, g.at(2, 2), g.at(2, 2)) == doctest::Approx(0.0));
    const double rows34 = visual_angle_between({}, g.at(3, 7), g.at(4, 7));
    CHECK(rows34 == doctest::Approx(deg_atan(35.0 / 60.6) - deg_atan(35.0 / 96.1)).epsilon(1e-12));
    CHECK(std::abs(rows34 - 10.0) < 0.05);

    const double cols78 = visual_angle_between({}, g.at(4, 7), g.at(4, 8));
    CHECK(cols78 == doctest::Approx(dot_angle_deg(g.at(4, 7).position, g.at(4, 8).position)).epsilon(1e-10));
    CHECK(cols78 == doctest::Approx(9.4).epsilon(0.01));

    // The stated radii give uneven row spacing; rows 1-2 and 2-3 are far from 10 degrees.
    const double r12 = visual_angle_between({}, g.at(1, 7), g.at(2, 7));
    const double r23 = visual_angle_between({}, g.at(2, 7), g.at(3, 7));
    CHECK(r12 == doctest::Approx(deg_atan(35.0 / 29.4) - deg_atan(35.0 / 49.7)).epsilon(1e-12));
    CHECK(r23 == doctest::Approx(deg_atan(35.0 / 49.7) - deg_atan(35.0 / 60.6)).epsilon(1e-12));
}

TEST_CASE("visual angle symmetry and triangle inequality") {
    const TargetGrid g = build_grid();
    const auto& ts = g.targets();
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, ts.size() - 1);
    for (int i = 0; i < 500; ++i) {
        const Target& a = ts[pick(rng)];
        const Target& b = ts[pick(rng)];
        const Target& c = ts[pick(rng)];
        const double ab = visual_angle_between({}, a, b);
        CHECK(ab == doctest::Approx(visual_angle_between({}, b, a)).epsilon(1e-14));
        CHECK(ab <= visual_angle_between({}, a, c) + visual_angle_between({}, c, b) + 1e-9);
        CHECK(ab >= 0.0);
        CHECK(ab <= 180.0);
    }
}

TEST_CASE("snap_to_target") {
    const TargetGrid g = build_grid();
    for (const auto& t : g.targets()) {
        const auto s = snap_to_target(gaze_to_target({}, t), {}, g);
        REQUIRE(s.has_value());
        CHECK(s->id == t.id);
    }
    CHECK_FALSE(snap_to_target(GazeDirection::from_azimuth_elevation(0.0, 5.0), {}, g).has_value());
    CHECK_FALSE(snap_to_target(GazeDirection::from_azimuth_elevation(30.0, 0.0), {}, g).has_value());

    // 2 degree azimuth perturbation around (4, 7): brute-force nearest target.
    const GazeDirection base = gaze_to_target({}, g.at(4, 7));
    const GazeDirection pert = GazeDirection::from_azimuth_elevation(2.0, base.elevation_deg());
    const Vec3 v = pert.vector();
    const double s = -35.0 / v.y;
    const Vec3 hit{s * v.x, -35.0, s * v.z};
    double best = 1e300;
    TargetId best_id;
    for (const auto& t : g.targets()) {
        const double d = std::hypot(t.position.x - hit.x, t.position.z - hit.z);
        if (d < best) {
            best = d;
            best_id = t.id;
        }
    }
    CHECK(best_id == TargetId{4, 7});
    CHECK(snap_to_target(pert, {}, g)->id == best_id);
}

TEST_CASE("snap ties go to the lowest row then column") {
    const TargetGrid g = build_grid();
    // Midpoint between (4,7) and (4,8) on the table.
    const Vec3 a = g.at(4, 7).position;
    const Vec3 b = g.at(4, 8).position;
    const Vec3 mid{(a.x + b.x) / 2, -35.0, (a.z + b.z) / 2};
    const auto s = snap_to_target(GazeDirection::from_vector(mid), {}, g);
    REQUIRE(s.has_value());
    CHECK((s->id == TargetId{4, 7} || s->id == TargetId{4, 8}));
}

TEST_CASE("gaze direction accessors") {
    const GazeDirection d = GazeDirection::from_vector({3.0, 0.0, 0.0});
    CHECK(d.vector() == Vec3{1.0, 0.0, 0.0});
    CHECK(d.azimuth_deg() == doctest::Approx(90.0));
    CHECK(GazeDirection::from_vector({0, 0, -1}).azimuth_deg() == 180.0);
    CHECK(GazeDirection::from_vector({0, -1, 0}).elevation_deg() == -90.0);
    CHECK_THROWS_AS(GazeDirection::from_vector({0, 0, 0}), DegenerateGeometryError);
    CHECK_THROWS_AS(GazeDirection::from_vector({NAN, 0, 1}), DegenerateGeometryError);
    const GazeDirection e = GazeDirection::from_azimuth_elevation(-35.0, 12.0);
    CHECK(e.azimuth_deg() == doctest::Approx(-35.0).epsilon(1e-12));
    CHECK(e.elevation_deg() == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(std::abs(e.vector().norm() - 1.0) < 1e-12);
}

TEST_CASE("observer seats are mirror symmetric") {
    const SceneLayout s = nominal_scene();
    const auto& p = s.observer_positions;
    CHECK(std::hypot(p[0].x, p[0].z) == doctest::Approx(180.0));
    CHECK(std::hypot(p[1].x, p[1].z) == doctest::Approx(138.0));
    CHECK(std::atan2(p[0].x, p[0].z) * 180 / M_PI == doctest::Approx(-47.7));
    CHECK(std::atan2(p[1].x, p[1].z) * 180 / M_PI == doctest::Approx(-28.6));
    for (int i = 0; i < 2; ++i) {
        CHECK(p[i].x == doctest::Approx(-p[3 - i].x));
        CHECK(p[i].y == doctest::Approx(p[3 - i].y));
        CHECK(p[i].z == doctest::Approx(p[3 - i].z));
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TargetGrid({29.4, 29.4, 60.6, 96.1}, 35.0, 10.0), ParameterError);
    CHECK_THROWS_AS(TargetGrid({29.4, 49.7, 60.6, 96.1}, 0.0, 10.0), ParameterError);
    CHECK_THROWS_AS(build_grid().at(5, 1), ParameterError);
    CHECK_THROWS_AS(build_grid().at(1, 0), ParameterError);
}
