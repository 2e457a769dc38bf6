#pragma once

#include "portalwave/portalwave.hpp"

// Shared fixture scenes and bakes; baked once per test binary.
namespace fixtures {

inline const portalwave::SceneDescription &two_room() {
    static const auto s = portalwave::scenegen::two_room();
    return s;
}
inline const portalwave::BakedDataset &two_room_bake() {
    static const auto d = portalwave::bake_all(two_room());
    return d;
}

inline const portalwave::SceneDescription &three_room() {
    static const auto s = portalwave::scenegen::three_room();
    return s;
}
inline const portalwave::BakedDataset &three_room_bake() {
    static const auto d = portalwave::bake_all(three_room());
    return d;
}

inline const portalwave::SceneDescription &courtyard() {
    static const auto s = portalwave::scenegen::courtyard();
    return s;
}
inline const portalwave::BakedDataset &courtyard_bake() {
    static const auto d = portalwave::bake_all(courtyard());
    return d;
}

// Open 24m x 12m box, no portals, probe and emitter lattices commensurate
// (probe positions are a subset of emitter sample positions).
inline portalwave::SceneDescription free_field_scene() {
    auto s = portalwave::scenegen::detail::open_box(40, 6, 0.25, 0.25, 1.0, 1.0);
    portalwave::detail::validate_scene(s);
    return s;
}
inline const portalwave::BakedDataset &free_field_bake() {
    static const auto d = portalwave::bake_all(free_field_scene());
    return d;
}

// Uniformly sampled open-cell position with clearance from portal planes.
template <typename Rng>
portalwave::Vec3 random_open_position(const portalwave::SceneDescription &scene, Rng &rng,
                                      double portal_clearance = 0.0) {
    const auto &grid = scene.grid;
    std::uniform_int_distribution<int> dx(0, grid.dims[0] - 1);
    std::uniform_int_distribution<int> dy(0, grid.dims[1] - 1);
    std::uniform_int_distribution<int> dz(0, grid.dims[2] - 1);
    for (int tries = 0; tries < 100000; ++tries) {
        const int ix = dx(rng), iy = dy(rng), iz = dz(rng);
        if (!grid.open_at(ix, iy, iz)) {
            continue;
        }
        const portalwave::Vec3 p = grid.cell_center(ix, iy, iz);
        if (portal_clearance > 0.0) {
            bool clear = true;
            for (const auto &portal : scene.portals) {
                const double plane = std::abs(dot(p - portal.centroid, portal.normal));
                if (plane < portal_clearance &&
                    distance(p, portal.centroid) < portal.radius + portal_clearance) {
                    clear = false;
                    break;
                }
            }
            if (!clear) {
                continue;
            }
        }
        return p;
    }
    throw std::runtime_error("no open cell found");
}

} // namespace fixtures
