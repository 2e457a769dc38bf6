#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "portalwave/occlusion.hpp"

using namespace portalwave;

TEST_CASE("net_alpha: empty set, products, floor") {
    PortalState state(3);
    const OcclusionConfig cfg;
    CHECK(net_alpha(std::vector<int>{}, state, cfg) == 1.0);
    state.set(1, 0.5);
    state.set(2, 0.5);
    CHECK(net_alpha(std::vector<int>{1, 2}, state, cfg) == doctest::Approx(0.25));
    state.set(3, 0.0);
    CHECK(net_alpha(std::vector<int>{3}, state, cfg) == 0.001);
    CHECK(net_alpha(std::vector<int>{1, 2, 3}, state, cfg) == 0.001);
}

TEST_CASE("PortalState: bounds enforced on write, unknown ids rejected") {
    PortalState state(2);
    CHECK_NOTHROW(state.set(1, 0.0));
    CHECK_NOTHROW(state.set(1, 0.5));
    CHECK_NOTHROW(state.set(2, 1.0));
    CHECK_THROWS_AS(state.set(1, 1.5), std::out_of_range);
    CHECK_THROWS_AS(state.set(1, -0.1), std::out_of_range);
    CHECK_THROWS_AS(state.set(0, 0.5), std::out_of_range);
    CHECK_THROWS_AS(state.set(3, 0.5), std::out_of_range);
    CHECK(state.get(1) == 0.5);
}

TEST_CASE("occlude_initial: identity, half-open, floor") {
    CHECK(occlude_initial(-12.5, 1.0) == -12.5);
    CHECK(occlude_initial(-12.5, 0.5) == doctest::Approx(-12.5 - 3.0103).epsilon(1e-4));
    CHECK(occlude_initial(0.0, 0.001) == doctest::Approx(-30.0).epsilon(1e-12));
}

TEST_CASE("occlude_initial: monotone non-decreasing in alpha") {
    double prev = -1e9;
    for (int i = 1; i <= 1000; ++i) {
        const double alpha = i / 1000.0;
        const double v = occlude_initial(-20.0, alpha);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(occlude_initial(-20.0, 1.0) == -20.0);
}

TEST_CASE("portal_energy: reciprocity and area linearity") {
    const SceneDescription &scene = fixtures::two_room();
    const BakedDataset &ds = fixtures::two_room_bake();
    const Portal &door = scene.portals[0];
    const Vec3 a{2.25, 2.25, 0.25};
    const Vec3 b{9.75, 5.75, 0.25};
    const double fwd = portal_energy(ds, door, a, b);
    const double bwd = portal_energy(ds, door, b, a);
    CHECK(fwd > 0.0);
    CHECK(fwd == bwd); // manifestly symmetric formula, exact equality
    Portal doubled = door;
    doubled.area *= 2.0;
    CHECK(portal_energy(ds, doubled, a, b) == doctest::Approx(2.0 * fwd).epsilon(1e-12));
    // no-path side yields zero
    AcousticParams silent;
    AcousticParams ok;
    ok.audible = true;
    ok.reflections_db = {-10, -10, -10, -10, -10, -10};
    CHECK(portal_energy(silent, ok, door.area) == 0.0);
}

TEST_CASE("occlude_reflections: identity at alpha = 1") {
    const std::array<double, 6> r = {-10.5, -12.25, -20.0, -9.75, -14.5, -30.0};
    AcousticParams via;
    via.audible = true;
    via.reflections_db = {-20, -21, -22, -23, -24, -25};
    const auto out = occlude_reflections(r, 0.5, via, 1.0);
    CHECK(out == r); // bitwise
}

TEST_CASE("occlude_reflections: full closure with dominant portal energy hits the beta floor") {
    const std::array<double, 6> r = {-10.0, -12.0, -14.0, -16.0, -18.0, -20.0};
    AcousticParams via;
    via.audible = true;
    via.reflections_db = r;
    // portal exit energy equal to the full arriving energy: E_J^kappa == E_J
    double total = 0.0;
    for (double db : r) {
        total += db_to_energy(db);
    }
    const OcclusionConfig cfg;
    const auto out = occlude_reflections(r, total, via, cfg.alpha_min, cfg);
    for (int j = 0; j < 6; ++j) {
        CHECK(out[j] == doctest::Approx(r[j] + 10.0 * std::log10(cfg.beta)).epsilon(1e-9));
        CHECK(out[j] == doctest::Approx(r[j] - 20.0).epsilon(1e-9));
    }
}

TEST_CASE("occlude_reflections: no energy via the portal leaves input unchanged") {
    const std::array<double, 6> r = {-10.0, -12.0, -14.0, -16.0, -18.0, -20.0};
    AcousticParams via;
    via.audible = false;
    CHECK(occlude_reflections(r, 0.5, via, 0.2) == r);
}

TEST_CASE("occlude_reflections: per-direction energy stays within [beta*E, E]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> udb(-40.0, 0.0);
    std::uniform_real_distribution<double> ualpha(0.001, 1.0);
    std::uniform_real_distribution<double> uescale(0.0, 3.0);
    const OcclusionConfig cfg;
    for (int trial = 0; trial < 500; ++trial) {
        std::array<double, 6> r{};
        AcousticParams via;
        via.audible = true;
        double total = 0.0;
        for (int j = 0; j < 6; ++j) {
            r[j] = udb(rng);
            via.reflections_db[j] = udb(rng);
            total += db_to_energy(r[j]);
        }
        const double exit_energy = total * uescale(rng);
        const double alpha = ualpha(rng);
        const auto out = occlude_reflections(r, exit_energy, via, alpha, cfg);
        for (int j = 0; j < 6; ++j) {
            const double in_e = db_to_energy(r[j]);
            const double out_e = db_to_energy(out[j]);
            CHECK(out_e >= cfg.beta * in_e * (1.0 - 1e-9));
            CHECK(out_e <= in_e * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("occlude_reflections: total energy monotone and continuous in alpha") {
    const SceneDescription &scene = fixtures::three_room();
    const BakedDataset &ds = fixtures::three_room_bake();
    const Portal &middle = scene.portals[1];
    const Vec3 source{2.25, 2.75, 0.25};
    const Vec3 listener{15.75, 2.75, 0.25};
    const AcousticParams base = lookup(ds, source, listener);
    REQUIRE(base.audible);
    double prev_total = -1.0;
    double prev_db_sum = 0.0;
    bool first = true;
    for (int step = 0; step <= 100; ++step) {
        const double alpha = std::max(0.001, step / 100.0);
        const auto out =
            occlude_reflections(ds, base.reflections_db, middle, source, listener, alpha);
        double total = 0.0;
        for (double db : out) {
            total += db_to_energy(db);
        }
        if (!first) {
            CHECK(total >= prev_total * (1.0 - 1e-12)); // monotone in alpha
            // continuity: adjacent alphas stay within a small energy ratio
            CHECK(std::abs(10.0 * std::log10(total) - prev_db_sum) < 1.5);
        }
        prev_total = total;
        prev_db_sum = 10.0 * std::log10(total);
        first = false;
    }
}
