#pragma once

#include <random>
#include <vector>

#include "portalwave/scene.hpp"

namespace portalwave::scenegen {

// Procedural test/bench scenes. All single-layer scenes put portals on cell
// face planes so grid paths never produce waypoints exactly on a portal
// plane.

namespace detail {

inline SceneDescription open_box(double width, double depth, double height, double cell,
                                 double probe_spacing, double emitter_spacing) {
    SceneDescription s;
    s.grid.origin = {0, 0, 0};
    s.grid.cell_size = cell;
    s.grid.dims = {static_cast<int>(std::lround(width / cell)),
                   static_cast<int>(std::lround(depth / cell)),
                   std::max(1, static_cast<int>(std::lround(height / cell)))};
    s.grid.solid.assign(s.grid.cell_count(), 0);
    s.probe_spacing = probe_spacing;
    s.emitter_spacing = emitter_spacing;
    return s;
}

inline void fill_wall_x(SceneDescription &s, int ix, int iy0, int iy1) {
    for (int iz = 0; iz < s.grid.dims[2]; ++iz) {
        for (int iy = iy0; iy < iy1; ++iy) {
            s.grid.solid[s.grid.index(ix, iy, iz)] = 1;
        }
    }
}

inline void fill_wall_y(SceneDescription &s, int iy, int ix0, int ix1) {
    for (int iz = 0; iz < s.grid.dims[2]; ++iz) {
        for (int ix = ix0; ix < ix1; ++ix) {
            s.grid.solid[s.grid.index(ix, iy, iz)] = 1;
        }
    }
}

inline void carve_door_x(SceneDescription &s, int ix, int iy0, int iy1) {
    for (int iz = 0; iz < s.grid.dims[2]; ++iz) {
        for (int iy = iy0; iy < iy1; ++iy) {
            s.grid.solid[s.grid.index(ix, iy, iz)] = 0;
        }
    }
}

inline void carve_door_y(SceneDescription &s, int iy, int ix0, int ix1) {
    for (int iz = 0; iz < s.grid.dims[2]; ++iz) {
        for (int ix = ix0; ix < ix1; ++ix) {
            s.grid.solid[s.grid.index(ix, iy, iz)] = 0;
        }
    }
}

// Vertical door quad on the plane x = at, spanning the full layer height.
inline std::vector<Vec3> door_quad_x(const SceneDescription &s, double at, double y0, double y1) {
    const double z0 = s.grid.origin.z;
    const double z1 = s.grid.origin.z + s.grid.dims[2] * s.grid.cell_size;
    return {{at, y0, z0}, {at, y1, z0}, {at, y1, z1}, {at, y0, z1}};
}

inline std::vector<Vec3> door_quad_y(const SceneDescription &s, double at, double x0, double x1) {
    const double z0 = s.grid.origin.z;
    const double z1 = s.grid.origin.z + s.grid.dims[2] * s.grid.cell_size;
    return {{x0, at, z0}, {x1, at, z0}, {x1, at, z1}, {x0, at, z1}};
}

} // namespace detail

// 12m x 8m, one dividing wall at x = 6 with a 1m doorway.
inline SceneDescription two_room(double cell = 0.5) {
    SceneDescription s = detail::open_box(12, 8, cell, cell, 2.0, 1.0);
    const int wall_ix = static_cast<int>(std::lround(6.0 / cell));
    detail::fill_wall_x(s, wall_ix, 0, s.grid.dims[1]);
    const int door0 = static_cast<int>(std::lround(3.5 / cell));
    const int door1 = static_cast<int>(std::lround(4.5 / cell));
    detail::carve_door_x(s, wall_ix, door0, door1);
    s.portals.push_back(make_portal(1, detail::door_quad_x(s, 6.0, 3.5, 4.5)));
    portalwave::detail::validate_scene(s);
    return s;
}

// 18m x 6m, three rooms in series; the two doorways sit at different y so a
// through path has to bend.
inline SceneDescription three_room(double cell = 0.5) {
    SceneDescription s = detail::open_box(18, 6, cell, cell, 2.0, 1.0);
    const int w1 = static_cast<int>(std::lround(6.0 / cell));
    const int w2 = static_cast<int>(std::lround(12.0 / cell));
    detail::fill_wall_x(s, w1, 0, s.grid.dims[1]);
    detail::fill_wall_x(s, w2, 0, s.grid.dims[1]);
    detail::carve_door_x(s, w1, static_cast<int>(std::lround(1.0 / cell)),
                         static_cast<int>(std::lround(2.0 / cell)));
    detail::carve_door_x(s, w2, static_cast<int>(std::lround(4.0 / cell)),
                         static_cast<int>(std::lround(5.0 / cell)));
    s.portals.push_back(make_portal(1, detail::door_quad_x(s, 6.0, 1.0, 2.0)));
    s.portals.push_back(make_portal(2, detail::door_quad_x(s, 12.0, 4.0, 5.0)));
    portalwave::detail::validate_scene(s);
    return s;
}

// 24m x 24m: a west room, a south room and a north room around an open
// court, one doorway each (three portals total).
inline SceneDescription courtyard(double cell = 0.5) {
    SceneDescription s = detail::open_box(24, 24, cell, cell, 2.0, 1.0);
    const int west_ix = static_cast<int>(std::lround(6.0 / cell));
    detail::fill_wall_x(s, west_ix, 0, s.grid.dims[1]);
    detail::carve_door_x(s, west_ix, static_cast<int>(std::lround(11.5 / cell)),
                         static_cast<int>(std::lround(12.5 / cell)));
    const int south_iy = static_cast<int>(std::lround(6.0 / cell));
    detail::fill_wall_y(s, south_iy, west_ix + 1, s.grid.dims[0]);
    detail::carve_door_y(s, south_iy, static_cast<int>(std::lround(14.5 / cell)),
                         static_cast<int>(std::lround(15.5 / cell)));
    const int north_iy = static_cast<int>(std::lround(18.0 / cell));
    detail::fill_wall_y(s, north_iy, west_ix + 1, s.grid.dims[0]);
    detail::carve_door_y(s, north_iy, static_cast<int>(std::lround(10.0 / cell)),
                         static_cast<int>(std::lround(11.0 / cell)));
    s.portals.push_back(make_portal(1, detail::door_quad_x(s, 6.0, 11.5, 12.5)));
    s.portals.push_back(make_portal(2, detail::door_quad_y(s, 6.0, 14.5, 15.5)));
    s.portals.push_back(make_portal(3, detail::door_quad_y(s, 18.0, 10.0, 11.0)));
    portalwave::detail::validate_scene(s);
    return s;
}

// U-shaped corridor (two 3m legs joined by a 3m bottom band) in a 20m x 14m
// box; no portals. Exercises interpolation across bends and extrapolation
// toward the leg ends.
inline SceneDescription corridor_u(double cell = 0.25, double probe_spacing = 4.0,
                                   double emitter_spacing = 1.25) {
    SceneDescription s = detail::open_box(20, 14, cell, cell, probe_spacing, emitter_spacing);
    const int band = static_cast<int>(std::lround(3.0 / cell));
    const int right0 = static_cast<int>(std::lround(16.0 / cell));
    const int right1 = static_cast<int>(std::lround(19.0 / cell));
    for (int iy = band; iy < s.grid.dims[1]; ++iy) {
        for (int ix = 0; ix < s.grid.dims[0]; ++ix) {
            if (ix < band || (ix >= right0 && ix < right1)) {
                continue; // legs stay open
            }
            s.grid.solid[s.grid.index(ix, iy, 0)] = 1;
        }
    }
    portalwave::detail::validate_scene(s);
    return s;
}

// n_rooms rooms in series along x, one zigzagging doorway per shared wall
// (n_rooms - 1 portals). Used for the linear-cost benchmarks.
inline SceneDescription room_series(int n_rooms, double room_len = 3.0, double width = 3.0,
                                    double cell = 0.5, double probe_spacing = 2.0) {
    SceneDescription s =
        detail::open_box(n_rooms * room_len, width, cell, cell, probe_spacing, 1.0);
    int next_id = 1;
    for (int k = 1; k < n_rooms; ++k) {
        const double at = k * room_len;
        const int ix = static_cast<int>(std::lround(at / cell));
        detail::fill_wall_x(s, ix, 0, s.grid.dims[1]);
        const double y0 = (k % 2 == 0) ? 0.5 : width - 1.5;
        detail::carve_door_x(s, ix, static_cast<int>(std::lround(y0 / cell)),
                             static_cast<int>(std::lround((y0 + 1.0) / cell)));
        s.portals.push_back(make_portal(next_id++, detail::door_quad_x(s, at, y0, y0 + 1.0)));
    }
    portalwave::detail::validate_scene(s);
    return s;
}

// rooms_x x rooms_y grid of square rooms, every shared wall with a centered
// 1m doorway. Portal count is 2*rooms_x*rooms_y - rooms_x - rooms_y
// (vertical-wall doors first, then horizontal).
inline SceneDescription room_grid(int rooms_x, int rooms_y, double room_size = 3.0,
                                  double cell = 0.5, double probe_spacing = 4.0) {
    SceneDescription s = detail::open_box(rooms_x * room_size, rooms_y * room_size, cell, cell,
                                          probe_spacing, 1.0);
    int next_id = 1;
    for (int k = 1; k < rooms_x; ++k) {
        const double at = k * room_size;
        const int ix = static_cast<int>(std::lround(at / cell));
        detail::fill_wall_x(s, ix, 0, s.grid.dims[1]);
    }
    for (int m = 1; m < rooms_y; ++m) {
        const double at = m * room_size;
        const int iy = static_cast<int>(std::lround(at / cell));
        detail::fill_wall_y(s, iy, 0, s.grid.dims[0]);
    }
    const double door0 = room_size / 2.0 - 0.5;
    for (int k = 1; k < rooms_x; ++k) {
        const double at = k * room_size;
        const int ix = static_cast<int>(std::lround(at / cell));
        for (int j = 0; j < rooms_y; ++j) {
            const double y0 = j * room_size + door0;
            detail::carve_door_x(s, ix, static_cast<int>(std::lround(y0 / cell)),
                                 static_cast<int>(std::lround((y0 + 1.0) / cell)));
            s.portals.push_back(make_portal(next_id++, detail::door_quad_x(s, at, y0, y0 + 1.0)));
        }
    }
    for (int m = 1; m < rooms_y; ++m) {
        const double at = m * room_size;
        const int iy = static_cast<int>(std::lround(at / cell));
        for (int i = 0; i < rooms_x; ++i) {
            const double x0 = i * room_size + door0;
            detail::carve_door_y(s, iy, static_cast<int>(std::lround(x0 / cell)),
                                 static_cast<int>(std::lround((x0 + 1.0) / cell)));
            s.portals.push_back(make_portal(next_id++, detail::door_quad_y(s, at, x0, x0 + 1.0)));
        }
    }
    portalwave::detail::validate_scene(s);
    return s;
}

struct BenchScene {
    SceneDescription scene;
    int rooms_x = 1;
    int rooms_y = 1;
    double room_size = 3.0;
};

// Most-square rooms grid with exactly n_portals doorways: 2N+1 is odd, and
// any odd factorization p*q yields rooms ((p+1)/2) x ((q+1)/2).
inline BenchScene bench_scene(int n_portals) {
    const long long target = 2LL * n_portals + 1;
    long long best = 1;
    for (long long f = 1; f * f <= target; ++f) {
        if (target % f == 0) {
            best = f;
        }
    }
    BenchScene b;
    b.rooms_y = static_cast<int>((best + 1) / 2);
    b.rooms_x = static_cast<int>((target / best + 1) / 2);
    b.scene = room_grid(b.rooms_x, b.rooms_y, b.room_size);
    return b;
}

// Open 20m x 20m x 4m box scattered with free-floating convex portals of
// random orientation and shape (portals are markup, they do not block
// propagation). Used by the randomized cull-soundness trials.
inline SceneDescription portal_field(int n_portals, unsigned seed, double cell = 0.5) {
    SceneDescription s = detail::open_box(20, 20, 4, cell, 2.0, 1.0);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(2.5, 17.5);
    std::uniform_real_distribution<double> uz(1.5, 2.5);
    std::uniform_real_distribution<double> uhalf(0.3, 1.0);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.14159265358979323846);
    std::uniform_real_distribution<double> ucos(-1.0, 1.0);
    std::uniform_int_distribution<int> usides(4, 6);
    for (int k = 1; k <= n_portals; ++k) {
        const Vec3 centroid{ux(rng), ux(rng), uz(rng)};
        const double cz = ucos(rng);
        const double az = uang(rng);
        const Vec3 normal{std::sqrt(1.0 - cz * cz) * std::cos(az),
                          std::sqrt(1.0 - cz * cz) * std::sin(az), cz};
        Vec3 u, v;
        portalwave::detail::plane_basis(normal, u, v);
        const double ea = uhalf(rng);
        const double eb = uhalf(rng);
        const double phase = uang(rng);
        const int sides = usides(rng);
        std::vector<Vec3> verts;
        verts.reserve(sides);
        for (int i = 0; i < sides; ++i) {
            const double ang = phase + 2.0 * 3.14159265358979323846 * i / sides;
            verts.push_back(centroid + u * (ea * std::cos(ang)) + v * (eb * std::sin(ang)));
        }
        s.portals.push_back(make_portal(k, std::move(verts)));
    }
    portalwave::detail::validate_scene(s);
    return s;
}

} // namespace portalwave::scenegen
