#include <doctest.h>

#include <random>

#include "portalwave/scene.hpp"

using namespace portalwave;

namespace {

// Independent fan-triangulation property calculator used as the oracle for
// the irregular-polygon cases.
struct FanOracle {
    Vec3 centroid{0, 0, 0};
    Vec3 normal{0, 0, 0};
    double area = 0.0;
    double radius = 0.0;
};

FanOracle fan_oracle(const std::vector<Vec3> &poly) {
    FanOracle o;
    double area2 = 0.0;
    Vec3 weighted{0, 0, 0};
    Vec3 n{0, 0, 0};
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        const Vec3 c = cross(poly[i] - poly[0], poly[i + 1] - poly[0]);
        const double t2 = length(c);
        area2 += t2;
        weighted += (poly[0] + poly[i] + poly[i + 1]) * (t2 / 3.0);
        n += c;
    }
    o.area = 0.5 * area2;
    o.centroid = weighted / area2;
    o.normal = normalized(n);
    for (const Vec3 &v : poly) {
        o.radius = std::max(o.radius, distance(v, o.centroid));
    }
    return o;
}

Portal unit_square_portal() {
    // unit square in the x = 0 plane
    return make_portal(1, {{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}});
}

double objective(const Vec3 &a, const Vec3 &b, const Vec3 &p) {
    return distance(a, p) + distance(b, p);
}

} // namespace

TEST_CASE("portal_geometry: unit square in the x=0 plane") {
    const auto g = portal_geometry({{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 0, 1}});
    CHECK(g.centroid.x == doctest::Approx(0.0));
    CHECK(g.centroid.y == doctest::Approx(0.5));
    CHECK(g.centroid.z == doctest::Approx(0.5));
    CHECK(g.area == doctest::Approx(1.0));
    CHECK(g.radius == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(std::abs(g.normal.x) == doctest::Approx(1.0));
    CHECK(g.normal.y == doctest::Approx(0.0));
    CHECK(g.normal.z == doctest::Approx(0.0));
}

TEST_CASE("portal_geometry: 2m x 1m door") {
    const auto g = portal_geometry({{0, 0, 0}, {2, 0, 0}, {2, 0, 1}, {0, 0, 1}});
    CHECK(g.area == doctest::Approx(2.0));
    CHECK(g.radius == doctest::Approx(std::sqrt(1.0 + 0.25)));
}

TEST_CASE("portal_geometry: irregular convex pentagon matches fan oracle") {
    const std::vector<Vec3> pentagon = {
        {1.0, 2.0, 0.3}, {3.1, 2.2, 0.3}, {3.9, 3.6, 0.3}, {2.4, 4.9, 0.3}, {0.7, 3.8, 0.3}};
    const auto g = portal_geometry(pentagon);
    const auto o = fan_oracle(pentagon);
    CHECK(g.area == doctest::Approx(o.area).epsilon(1e-12));
    CHECK(distance(g.centroid, o.centroid) < 1e-12);
    CHECK(g.radius == doctest::Approx(o.radius).epsilon(1e-12));
    CHECK(std::abs(dot(g.normal, o.normal)) == doctest::Approx(1.0));
}

TEST_CASE("portal_geometry: degenerate collinear polygon rejected") {
    CHECK_THROWS_AS(portal_geometry({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}), SceneError);
}

TEST_CASE("portal_geometry: rotation invariance, winding flips normal only") {
    const std::vector<Vec3> pentagon = {
        {1.0, 2.0, 0.3}, {3.1, 2.2, 0.3}, {3.9, 3.6, 0.3}, {2.4, 4.9, 0.3}, {0.7, 3.8, 0.3}};
    const auto base = portal_geometry(pentagon);
    for (std::size_t shift = 1; shift < pentagon.size(); ++shift) {
        std::vector<Vec3> rotated;
        for (std::size_t i = 0; i < pentagon.size(); ++i) {
            rotated.push_back(pentagon[(i + shift) % pentagon.size()]);
        }
        const auto g = portal_geometry(rotated);
        CHECK(distance(g.centroid, base.centroid) < 1e-9);
        CHECK(g.area == doctest::Approx(base.area));
        CHECK(g.radius == doctest::Approx(base.radius));
        CHECK(dot(g.normal, base.normal) == doctest::Approx(1.0));
    }
    std::vector<Vec3> reversed(pentagon.rbegin(), pentagon.rend());
    const auto r = portal_geometry(reversed);
    CHECK(dot(r.normal, base.normal) == doctest::Approx(-1.0));
    CHECK(distance(r.centroid, base.centroid) < 1e-9);
    CHECK(r.area == doctest::Approx(base.area));
    CHECK(r.radius == doctest::Approx(base.radius));
}

TEST_CASE("closest_point_on_portal: segment through the interior") {
    const Portal p = unit_square_portal();
    const Vec3 a{-2.0, 0.4, 0.6};
    const Vec3 b{3.0, 0.6, 0.4};
    const Vec3 q = closest_point_on_portal(p, a, b);
    // crossing of the segment with the x=0 plane
    const double t = 2.0 / 5.0;
    CHECK(q.x == doctest::Approx(0.0));
    CHECK(q.y == doctest::Approx(0.4 + t * 0.2));
    CHECK(q.z == doctest::Approx(0.6 - t * 0.2));
    CHECK(objective(a, b, q) == doctest::Approx(distance(a, b)));
}

TEST_CASE("closest_point_on_portal: both endpoints equal to the centroid") {
    const Portal p = unit_square_portal();
    const Vec3 q = closest_point_on_portal(p, p.centroid, p.centroid);
    CHECK(distance(q, p.centroid) < 1e-9);
}

TEST_CASE("closest_point_on_portal: same-side points vs dense sampling oracle") {
    const Portal p = unit_square_portal();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> side(0.5, 4.0);
    std::uniform_real_distribution<double> span(-2.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Vec3 a{side(rng), span(rng), span(rng)};
        const Vec3 b{side(rng), span(rng), span(rng)};
        const Vec3 q = closest_point_on_portal(p, a, b);
        // dense in-plane sampling oracle (10^4 grid over the polygon)
        double best = std::numeric_limits<double>::max();
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; j <= 100; ++j) {
                const Vec3 cand{0.0, i / 100.0, j / 100.0};
                best = std::min(best, objective(a, b, cand));
            }
        }
        CHECK(objective(a, b, q) <= best + 1e-3 * p.radius);
        // result stays on the polygon
        CHECK(q.x == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(q.y >= -1e-9);
        CHECK(q.y <= 1.0 + 1e-9);
        CHECK(q.z >= -1e-9);
        CHECK(q.z <= 1.0 + 1e-9);
    }
}

TEST_CASE("closest_point_on_portal: objective never above vertices or centroid") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    const std::vector<Vec3> pentagon = {
        {1.0, 2.0, 0.3}, {3.1, 2.2, 0.3}, {3.9, 3.6, 0.3}, {2.4, 4.9, 0.3}, {0.7, 3.8, 0.3}};
    const Portal p = make_portal(1, pentagon);
    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 a{coord(rng), coord(rng), coord(rng)};
        const Vec3 b{coord(rng), coord(rng), coord(rng)};
        const Vec3 q = closest_point_on_portal(p, a, b);
        const double f = objective(a, b, q);
        CHECK(f <= objective(a, b, p.centroid) + 1e-9);
        for (const Vec3 &v : p.polygon) {
            CHECK(f <= objective(a, b, v) + 1e-9);
        }
        // point-in-polygon with slack
        const portalwave::detail::PolygonFrame frame(p);
        const auto q2 = frame.project(q);
        CHECK(frame.distance_to_polygon(q2[0], q2[1]) < 1e-6);
        CHECK(std::abs(dot(q - p.centroid, p.normal)) < 1e-9);
    }
}
