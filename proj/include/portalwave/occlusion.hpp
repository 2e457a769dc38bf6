#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "portalwave/fieldstore.hpp"
#include "portalwave/scene.hpp"

namespace portalwave {

struct OcclusionConfig {
    double beta = 0.01;      // reflection retention floor
    double alpha_min = 0.001; // net open-fraction floor (-30 dB cap)
};

// Dynamic per-portal open fractions, indexed by portal id.
class PortalState {
public:
    explicit PortalState(std::size_t portal_count) : alpha_(portal_count, 1.0) {}

    std::size_t size() const { return alpha_.size(); }

    double get(int portal_id) const {
        check_id(portal_id);
        return alpha_[std::size_t(portal_id) - 1];
    }

    void set(int portal_id, double alpha) {
        check_id(portal_id);
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw std::out_of_range("open fraction must be in [0, 1]");
        }
        alpha_[std::size_t(portal_id) - 1] = alpha;
    }

    std::span<const double> values() const { return alpha_; }

private:
    void check_id(int portal_id) const {
        if (portal_id < 1 || std::size_t(portal_id) > alpha_.size()) {
            throw std::out_of_range("unknown portal id " + std::to_string(portal_id));
        }
    }
    std::vector<double> alpha_;
};

// Net open fraction over the portal chain, floored at alpha_min. The empty
// chain yields exactly 1.
inline double net_alpha(std::span<const int> portal_ids, const PortalState &state,
                        const OcclusionConfig &cfg = {}) {
    double product = 1.0;
    for (int id : portal_ids) {
        product *= state.get(id);
    }
    return std::max(cfg.alpha_min, product);
}

inline double occlude_initial(double loudness_db, double alpha) {
    return loudness_db + 10.0 * std::log10(alpha);
}

// Energy transported through the last portal, from the two portal-probe
// lookups: E = A/(4pi) * E(source, centroid) * E(listener, centroid). The
// formula is manifestly invariant under swapping the endpoints.
inline double portal_energy(const AcousticParams &source_to_portal,
                            const AcousticParams &listener_to_portal, double portal_area) {
    if (!source_to_portal.audible || !listener_to_portal.audible) {
        return 0.0;
    }
    // product of the two lookups first: bitwise invariant under endpoint swap
    const double through = source_to_portal.total_reflected_energy() *
                           listener_to_portal.total_reflected_energy();
    return portal_area / (4.0 * 3.14159265358979323846) * through;
}

inline double portal_energy(const BakedDataset &ds, const Portal &portal, const Vec3 &source,
                            const Vec3 &listener) {
    const AcousticParams from_source = lookup(ds, source, portal.centroid);
    const AcousticParams from_listener = lookup(ds, listener, portal.centroid);
    return portal_energy(from_source, from_listener, portal.area);
}

// Directional reflection occlusion. The energy arriving via the last portal
// is redistributed by the portal-as-source lookup and removed in proportion
// to the closed fraction; the beta clamp keeps at least that fraction of
// each directional energy.
inline std::array<double, 6> occlude_reflections(const std::array<double, 6> &reflections_db,
                                                 double portal_exit_energy,
                                                 const AcousticParams &portal_to_listener,
                                                 double alpha, const OcclusionConfig &cfg = {}) {
    if (alpha >= 1.0) {
        return reflections_db;
    }
    if (!portal_to_listener.audible) {
        return reflections_db;
    }
    const double via_portal_total = portal_to_listener.total_reflected_energy();
    if (via_portal_total <= 0.0) {
        return reflections_db;
    }
    std::array<double, 6> out{};
    for (int j = 0; j < 6; ++j) {
        const double ej = db_to_energy(reflections_db[j]);
        const double ej_portal = portal_exit_energy *
                                 db_to_energy(portal_to_listener.reflections_db[j]) /
                                 via_portal_total;
        const double kept = std::max(cfg.beta * ej, ej - (1.0 - alpha) * ej_portal);
        out[j] = energy_to_db(kept);
    }
    return out;
}

inline std::array<double, 6> occlude_reflections(const BakedDataset &ds,
                                                 const std::array<double, 6> &reflections_db,
                                                 const Portal &last_portal, const Vec3 &source,
                                                 const Vec3 &listener, double alpha,
                                                 const OcclusionConfig &cfg = {}) {
    if (alpha >= 1.0) {
        return reflections_db;
    }
    const double e_portal = portal_energy(ds, last_portal, source, listener);
    const AcousticParams portal_to_listener = lookup(ds, last_portal.centroid, listener);
    return occlude_reflections(reflections_db, e_portal, portal_to_listener, alpha, cfg);
}

} // namespace portalwave
