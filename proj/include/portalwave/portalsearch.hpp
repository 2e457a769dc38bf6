#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "portalwave/fieldstore.hpp"
#include "portalwave/scene.hpp"

namespace portalwave {

struct SearchConfig {
    double epsilon = 0.010; // s; folds quantization and interpolation error
};

// Query-local cull volume: an ellipsoid with the endpoints as focii and
// maximum path length l_max = c*(tau0 + epsilon) on its surface, plus its
// axis-aligned bounding box.
struct CullVolume {
    Vec3 source;
    Vec3 listener;
    double l_max = 0.0;
    Aabb box;
};

inline CullVolume make_cull_volume(const Vec3 &source, const Vec3 &listener, double tau0,
                                   double epsilon, double c) {
    CullVolume vol;
    vol.source = source;
    vol.listener = listener;
    vol.l_max = c * (tau0 + epsilon);
    const Vec3 center = (source + listener) * 0.5;
    const double focal = 0.5 * distance(source, listener);
    const double a = std::max(0.5 * vol.l_max, focal);
    const double b = std::sqrt(std::max(0.0, a * a - focal * focal));
    const Vec3 axis = normalized_or_zero(source - listener);
    for (int i = 0; i < 3; ++i) {
        const double u = axis[i];
        const double half = std::sqrt(a * a * u * u + b * b * (1.0 - u * u));
        const double c0 = i == 0 ? center.x : (i == 1 ? center.y : center.z);
        if (i == 0) {
            vol.box.min.x = c0 - half;
            vol.box.max.x = c0 + half;
        } else if (i == 1) {
            vol.box.min.y = c0 - half;
            vol.box.max.y = c0 + half;
        } else {
            vol.box.min.z = c0 - half;
            vol.box.max.z = c0 + half;
        }
    }
    return vol;
}

inline bool cull_bbox(const Vec3 &centroid, double radius, const CullVolume &vol) {
    return vol.box.inflated(radius).contains(centroid);
}
inline bool cull_bbox(const Portal &portal, const CullVolume &vol) {
    return cull_bbox(portal.centroid, portal.radius, vol);
}

inline bool cull_ellipsoid(const Vec3 &centroid, double radius, const CullVolume &vol) {
    return distance(vol.source, centroid) + distance(centroid, vol.listener) <
           vol.l_max + radius;
}
inline bool cull_ellipsoid(const Portal &portal, const CullVolume &vol) {
    return cull_ellipsoid(portal.centroid, portal.radius, vol);
}

// String tightening: apparent endpoints reconstructed from the portal-probe
// lookups, the tightened pierce point on the polygon, and the corrected path
// length through it.
struct TightenResult {
    Vec3 apparent_source;
    Vec3 apparent_listener;
    Vec3 pierce_point;
    double corrected_length = 0.0;
    AcousticParams source_to_portal;   // P(source, centroid)
    AcousticParams listener_to_portal; // P(listener, centroid)
};

namespace detail {

inline TightenResult tighten_from_params(const Portal &portal, const AcousticParams &from_source,
                                         const AcousticParams &from_listener, double c) {
    TightenResult t;
    t.source_to_portal = from_source;
    t.listener_to_portal = from_listener;
    t.apparent_source = portal.centroid - from_source.direction * (c * from_source.tau0);
    t.apparent_listener = portal.centroid - from_listener.direction * (c * from_listener.tau0);
    t.pierce_point = closest_point_on_portal(portal, t.apparent_source, t.apparent_listener);
    t.corrected_length = distance(t.apparent_source, t.pierce_point) +
                         distance(t.apparent_listener, t.pierce_point);
    return t;
}

inline bool pierce_from_params(const Portal &portal, const AcousticParams &from_source,
                               const AcousticParams &from_listener) {
    if (!from_source.audible || !from_listener.audible) {
        return false;
    }
    const double a = dot(from_source.direction, portal.normal);
    const double b = dot(from_listener.direction, portal.normal);
    return a * b < 0.0;
}

} // namespace detail

// Both lookups place the portal centroid on the listener side: there is a
// probe exactly at the centroid, so probe interpolation error vanishes.
inline std::optional<TightenResult> string_tighten(const BakedDataset &ds, const Portal &portal,
                                                   const Vec3 &source, const Vec3 &listener,
                                                   const SearchConfig & = {}) {
    const AcousticParams from_listener = lookup(ds, listener, portal.centroid);
    const AcousticParams from_source = lookup(ds, source, portal.centroid);
    if (!from_listener.audible || !from_source.audible) {
        return std::nullopt;
    }
    return detail::tighten_from_params(portal, from_source, from_listener, ds.config.c);
}

// True when the wavefronts arriving at the centroid from the two endpoints
// come from opposite sides of the portal plane. Invariant under normal flip;
// a wavefront exactly in the plane does not count as piercing.
inline bool pierce_test(const BakedDataset &ds, const Portal &portal, const Vec3 &source,
                        const Vec3 &listener) {
    const AcousticParams from_source = lookup(ds, source, portal.centroid);
    const AcousticParams from_listener = lookup(ds, listener, portal.centroid);
    return detail::pierce_from_params(portal, from_source, from_listener);
}

enum class PortalTestStatus {
    Accepted,
    PierceRejected,
    CriterionRejected,
    NoPath,
};

struct PortalHit {
    int portal_id = 0;
    PortalTestStatus status = PortalTestStatus::NoPath;
    Vec3 pierce_point;
    Vec3 apparent_source;
    Vec3 apparent_listener;
    double corrected_length = 0.0;
    double slack = 0.0; // corrected_length - c*tau0(source, listener), m
    AcousticParams source_to_portal;
    AcousticParams listener_to_portal;
};

struct SearchStats {
    int portals_tested = 0;
    int culled_bbox = 0;
    int culled_ellipsoid = 0;
    int acoustic_lookups = 0;

    int full_evaluations() const { return portals_tested - culled_bbox - culled_ellipsoid; }
};

struct SearchResult {
    bool no_path = false;
    double base_tau0 = 0.0;          // tau0(source, listener)
    std::vector<PortalHit> accepted; // ascending portal id
    std::vector<PortalHit> evaluated; // every portal that reached the lookups
    int last_portal_id = 0;          // 0 = none
    SearchStats stats;

    std::vector<int> portal_ids() const {
        std::vector<int> ids;
        ids.reserve(accepted.size());
        for (const auto &h : accepted) {
            ids.push_back(h.portal_id);
        }
        return ids;
    }
    const PortalHit *hit(int portal_id) const {
        for (const auto &h : accepted) {
            if (h.portal_id == portal_id) {
                return &h;
            }
        }
        return nullptr;
    }
};

// All portals on the initial-sound shortest path between source and
// listener: bbox cull, ellipsoid cull, portal-probe lookups, pierce test,
// then the corrected-length criterion against c*tau0 + c*epsilon.
//
// Culling uses a widened radius of 2*r + c*delay_quantum: the centroid tests
// bound the tightened path length only to within twice the bounding radius,
// and quantization moves each apparent leg by up to half a quantum, so the
// single-radius variant can reject portals that still pass the final
// criterion.
inline SearchResult find_portals(const BakedDataset &ds, const SceneDescription &scene,
                                 const Vec3 &source, const Vec3 &listener,
                                 const SearchConfig &cfg = {}) {
    SearchResult result;
    const double c = ds.config.c;
    // The base delay is a symmetric quantity; evaluating it with canonically
    // ordered endpoints keeps portal membership identical under endpoint
    // swap.
    const auto before = [](const Vec3 &a, const Vec3 &b) {
        if (a.x != b.x) {
            return a.x < b.x;
        }
        if (a.y != b.y) {
            return a.y < b.y;
        }
        return a.z < b.z;
    };
    const AcousticParams base = before(source, listener) ? lookup(ds, source, listener)
                                                         : lookup(ds, listener, source);
    result.stats.acoustic_lookups = 1;
    if (!base.audible) {
        result.no_path = true;
        return result;
    }
    result.base_tau0 = base.tau0;
    const CullVolume vol = make_cull_volume(source, listener, base.tau0, cfg.epsilon, c);
    const double max_length = c * base.tau0 + c * cfg.epsilon;

    std::vector<const Portal *> by_id;
    by_id.reserve(scene.portals.size());
    bool sorted = true;
    int prev_id = std::numeric_limits<int>::min();
    for (const Portal &p : scene.portals) {
        by_id.push_back(&p);
        sorted = sorted && p.id > prev_id;
        prev_id = p.id;
    }
    if (!sorted) {
        std::sort(by_id.begin(), by_id.end(),
                  [](const Portal *a, const Portal *b) { return a->id < b->id; });
    }

    // source/listener emitter taps are shared by every portal-probe lookup
    std::vector<detail::EmitterTap> source_taps, listener_taps;
    detail::emitter_taps(ds.emitters, source, source_taps);
    detail::emitter_taps(ds.emitters, listener, listener_taps);

    for (const Portal *portal : by_id) {
        result.stats.portals_tested += 1;
        const double cull_radius = 2.0 * portal->radius + c * ds.config.delay_quantum;
        if (!cull_bbox(portal->centroid, cull_radius, vol)) {
            result.stats.culled_bbox += 1;
            continue;
        }
        if (!cull_ellipsoid(portal->centroid, cull_radius, vol)) {
            result.stats.culled_ellipsoid += 1;
            continue;
        }
        const auto probe_it = ds.probes.portal_probe_index.find(portal->id);
        if (probe_it == ds.probes.portal_probe_index.end()) {
            continue; // portal without a probe cannot be evaluated
        }
        const AcousticParams from_listener =
            lookup_at_probe(ds, probe_it->second, listener, listener_taps);
        const AcousticParams from_source =
            lookup_at_probe(ds, probe_it->second, source, source_taps);
        result.stats.acoustic_lookups += 2;

        PortalHit hit;
        hit.portal_id = portal->id;
        hit.source_to_portal = from_source;
        hit.listener_to_portal = from_listener;
        if (!from_listener.audible || !from_source.audible) {
            hit.status = PortalTestStatus::NoPath;
            result.evaluated.push_back(hit);
            continue;
        }
        if (!detail::pierce_from_params(*portal, from_source, from_listener)) {
            hit.status = PortalTestStatus::PierceRejected;
            result.evaluated.push_back(hit);
            continue;
        }
        const TightenResult t = detail::tighten_from_params(*portal, from_source, from_listener, c);
        hit.pierce_point = t.pierce_point;
        hit.apparent_source = t.apparent_source;
        hit.apparent_listener = t.apparent_listener;
        hit.corrected_length = t.corrected_length;
        hit.slack = t.corrected_length - c * base.tau0;
        if (t.corrected_length <= max_length) {
            hit.status = PortalTestStatus::Accepted;
            result.accepted.push_back(hit);
        } else {
            hit.status = PortalTestStatus::CriterionRejected;
        }
        result.evaluated.push_back(hit);
    }

    if (!result.accepted.empty()) {
        const PortalHit *best = &result.accepted.front();
        double best_dist = distance(best->apparent_listener, best->pierce_point);
        for (const PortalHit &h : result.accepted) {
            const double d = distance(h.apparent_listener, h.pierce_point);
            if (d < best_dist - 1e-15 ||
                (std::abs(d - best_dist) <= 1e-15 && h.portal_id < best->portal_id)) {
                best = &h;
                best_dist = d;
            }
        }
        result.last_portal_id = best->portal_id;
    }
    return result;
}

} // namespace portalwave
