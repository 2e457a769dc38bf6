#pragma once

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "portalwave/occlusion.hpp"
#include "portalwave/portalsearch.hpp"

namespace portalwave {

class EngineError : public std::runtime_error {
public:
    explicit EngineError(const std::string &msg) : std::runtime_error(msg) {}
};

// No-path sentinel loudness; results also carry an explicit audible flag so
// no infinities cross the interface.
inline constexpr double kSilenceDb = -120.0;

struct QueryDebug {
    double dist_m = 0.0;  // c * tau0
    double dry_db = kSilenceDb;
    double wet_db = kSilenceDb;
    Vec3 arrival_direction{0, 0, 0}; // -s0, points from the listener toward the apparent source
    double distance_diff_m = std::numeric_limits<double>::quiet_NaN(); // slack of the last portal
};

struct QueryResult {
    bool audible = false;
    AcousticParams params; // post-occlusion
    SearchResult search;
    double net_open_fraction = 1.0;
    QueryDebug debug;
};

// Runtime facade: immutable scene + dataset plus the dynamic portal open
// fractions. Queries are concurrent-read safe; open-fraction updates
// serialize through a single-writer contract, and each query reads one
// consistent snapshot of all fractions.
class Engine {
public:
    Engine(SceneDescription scene, BakedDataset dataset, SearchConfig search_cfg = {},
           OcclusionConfig occlusion_cfg = {})
        : scene_(std::move(scene)), dataset_(std::move(dataset)), search_cfg_(search_cfg),
          occlusion_cfg_(occlusion_cfg), state_(scene_.portals.size()) {
        if (scene_content_hash(scene_) != dataset_.scene_hash) {
            throw EngineError("bake file does not match the scene (content hash mismatch)");
        }
    }

    const SceneDescription &scene() const { return scene_; }
    const BakedDataset &dataset() const { return dataset_; }
    const SearchConfig &search_config() const { return search_cfg_; }

    void set_portal_open_fraction(int portal_id, double alpha) {
        std::lock_guard<std::mutex> lock(mutex_);
        state_.set(portal_id, alpha);
    }

    double portal_open_fraction(int portal_id) const {
        std::lock_guard<std::mutex> lock(mutex_);
        return state_.get(portal_id);
    }

    QueryResult query(const Vec3 &source, const Vec3 &listener) const {
        QueryResult out;
        out.params = lookup(dataset_, source, listener, InterpMode::Improved);
        if (!out.params.audible) {
            out.params.loudness_db = kSilenceDb;
            out.search.no_path = true;
            return out;
        }
        out.audible = true;
        out.search = find_portals(dataset_, scene_, source, listener, search_cfg_);

        const PortalState snapshot = [&] {
            std::lock_guard<std::mutex> lock(mutex_);
            return state_;
        }();
        const auto ids = out.search.portal_ids();
        out.net_open_fraction = net_alpha(ids, snapshot, occlusion_cfg_);

        out.params.loudness_db = occlude_initial(out.params.loudness_db, out.net_open_fraction);
        if (out.search.last_portal_id != 0 && out.net_open_fraction < 1.0) {
            const Portal *portal = nullptr;
            for (const Portal &p : scene_.portals) {
                if (p.id == out.search.last_portal_id) {
                    portal = &p;
                    break;
                }
            }
            const PortalHit *hit = out.search.hit(out.search.last_portal_id);
            if (portal != nullptr && hit != nullptr) {
                const double e_portal =
                    portal_energy(hit->source_to_portal, hit->listener_to_portal, portal->area);
                const AcousticParams portal_to_listener =
                    lookup(dataset_, portal->centroid, listener);
                out.params.reflections_db =
                    occlude_reflections(out.params.reflections_db, e_portal, portal_to_listener,
                                        out.net_open_fraction, occlusion_cfg_);
            }
        }

        out.debug.dist_m = dataset_.config.c * out.params.tau0;
        out.debug.dry_db = out.params.loudness_db;
        out.debug.wet_db = energy_to_db(std::max(out.params.total_reflected_energy(), 1e-30));
        out.debug.arrival_direction = -out.params.direction;
        if (const PortalHit *h = out.search.hit(out.search.last_portal_id)) {
            out.debug.distance_diff_m = h->slack;
        }
        return out;
    }

private:
    SceneDescription scene_;
    BakedDataset dataset_;
    SearchConfig search_cfg_;
    OcclusionConfig occlusion_cfg_;
    mutable std::mutex mutex_;
    PortalState state_;
};

} // namespace portalwave
