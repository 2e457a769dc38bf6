#pragma once

#include <algorithm>
#include <optional>
#include <queue>
#include <vector>

#include "portalwave/bake.hpp"
#include "portalwave/portalsearch.hpp"
#include "portalwave/scene.hpp"

namespace portalwave::oracle {

// Brute-force reference path: cell-center waypoints of the grid shortest
// path, its length, and the portals its segments pierce, in travel order.
// Test and verification tooling only; being slow is acceptable here.
struct OraclePath {
    std::vector<Vec3> waypoints;
    double length = 0.0;
    std::vector<int> pierced_portal_ids;
};

namespace detail {

// Upsampled copy of the grid for discretization-error checks.
inline SceneGrid refine_grid(const SceneGrid &grid, int factor) {
    if (factor <= 1) {
        return grid;
    }
    SceneGrid fine;
    fine.origin = grid.origin;
    fine.cell_size = grid.cell_size / factor;
    for (int a = 0; a < 3; ++a) {
        fine.dims[a] = grid.dims[a] == 1 && a == 2 ? 1 : grid.dims[a] * factor;
    }
    fine.solid.assign(fine.cell_count(), 0);
    for (int iz = 0; iz < fine.dims[2]; ++iz) {
        for (int iy = 0; iy < fine.dims[1]; ++iy) {
            for (int ix = 0; ix < fine.dims[0]; ++ix) {
                const int cz = grid.dims[2] == 1 ? 0 : iz / factor;
                if (grid.solid_at(ix / factor, iy / factor, cz)) {
                    fine.solid[fine.index(ix, iy, iz)] = 1;
                }
            }
        }
    }
    return fine;
}

inline bool segment_crosses_polygon(const Vec3 &p0, const Vec3 &p1, const Portal &portal,
                                    double inflate, double &t_out) {
    const double d0 = dot(p0 - portal.centroid, portal.normal);
    const double d1 = dot(p1 - portal.centroid, portal.normal);
    // Half-open sign rule: a waypoint exactly on the plane belongs to the
    // negative side, so consecutive segments sharing it count one crossing.
    if ((d0 > 0.0) == (d1 > 0.0)) {
        return false;
    }
    if (std::abs(d0 - d1) < 1e-15) {
        return false;
    }
    const double t = d0 / (d0 - d1);
    const Vec3 q = p0 + (p1 - p0) * t;
    const portalwave::detail::PolygonFrame frame(portal);
    const auto q2 = frame.project(q);
    if (frame.distance_to_polygon(q2[0], q2[1]) <= inflate) {
        t_out = t;
        return true;
    }
    return false;
}

} // namespace detail

// Dijkstra over the open cells (26-connected, 8-connected for single-layer
// grids) with Euclidean edge weights and deterministic tie-break by cell
// index. refine > 1 re-runs on an upsampled grid to bound grid error.
inline std::optional<OraclePath> shortest_path(const SceneDescription &scene, const Vec3 &a,
                                               const Vec3 &b, int refine = 1) {
    const SceneGrid grid = detail::refine_grid(scene.grid, refine);
    const auto start = portalwave::detail::snap_to_open_cell(grid, a, "oracle start");
    const auto goal = portalwave::detail::snap_to_open_cell(grid, b, "oracle goal");
    const std::int32_t start_idx =
        static_cast<std::int32_t>(grid.index(start[0], start[1], start[2]));
    const std::int32_t goal_idx = static_cast<std::int32_t>(grid.index(goal[0], goal[1], goal[2]));

    const std::size_t n = grid.cell_count();
    std::vector<double> dist(n, std::numeric_limits<double>::max());
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> done(n, 0);
    const portalwave::detail::NeighborTable nbr(grid);

    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[start_idx] = 0.0;
    heap.push({0.0, start_idx});
    // Full flood of the connected component, as a reference should; no
    // goal-directed early exit.
    while (!heap.empty()) {
        const auto [d, idx] = heap.top();
        heap.pop();
        if (done[idx]) {
            continue;
        }
        done[idx] = 1;
        const int ix = static_cast<int>(idx % grid.dims[0]);
        const int iy = static_cast<int>((idx / grid.dims[0]) % grid.dims[1]);
        const int iz = static_cast<int>(idx / (std::size_t(grid.dims[0]) * grid.dims[1]));
        for (const auto &o : nbr.offsets) {
            const int nx = ix + o.dx, ny = iy + o.dy, nz = iz + o.dz;
            if (!grid.in_bounds(nx, ny, nz) || !grid.open_at(nx, ny, nz)) {
                continue;
            }
            const std::int32_t nidx = static_cast<std::int32_t>(grid.index(nx, ny, nz));
            if (done[nidx]) {
                continue;
            }
            const double nd = d + o.weight;
            if (nd < dist[nidx]) {
                dist[nidx] = nd;
                parent[nidx] = idx;
                heap.push({nd, nidx});
            }
        }
    }
    if (dist[goal_idx] == std::numeric_limits<double>::max()) {
        return std::nullopt;
    }

    OraclePath path;
    std::vector<std::int32_t> chain;
    for (std::int32_t cur = goal_idx; cur != -1; cur = parent[cur]) {
        chain.push_back(cur);
    }
    std::reverse(chain.begin(), chain.end());
    path.waypoints.reserve(chain.size());
    for (std::int32_t idx : chain) {
        const int ix = static_cast<int>(idx % grid.dims[0]);
        const int iy = static_cast<int>((idx / grid.dims[0]) % grid.dims[1]);
        const int iz = static_cast<int>(idx / (std::size_t(grid.dims[0]) * grid.dims[1]));
        path.waypoints.push_back(grid.cell_center(ix, iy, iz));
    }
    path.length = dist[goal_idx];

    struct Crossing {
        std::size_t segment;
        double t;
        int portal_id;
    };
    std::vector<Crossing> crossings;
    const double inflate = 0.5 * grid.cell_size;
    for (const Portal &portal : scene.portals) {
        for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
            double t = 0.0;
            if (detail::segment_crosses_polygon(path.waypoints[s], path.waypoints[s + 1], portal,
                                                inflate, t)) {
                crossings.push_back({s, t, portal.id});
            }
        }
    }
    std::sort(crossings.begin(), crossings.end(), [](const Crossing &x, const Crossing &y) {
        if (x.segment != y.segment) {
            return x.segment < y.segment;
        }
        if (x.t != y.t) {
            return x.t < y.t;
        }
        return x.portal_id < y.portal_id;
    });
    for (const Crossing &c : crossings) {
        if (path.pierced_portal_ids.empty() || path.pierced_portal_ids.back() != c.portal_id) {
            path.pierced_portal_ids.push_back(c.portal_id);
        }
    }
    return path;
}

// Disagreement classification between a search result and the oracle path.
// "Boundary" disagreements sit within one cell diagonal of the acceptance
// threshold; everything else is a hard failure.
struct AgreementReport {
    struct Item {
        int portal_id = 0;
        bool missing = false; // pierced by the oracle but not accepted
        bool has_slack = false;
        double slack = 0.0;
        bool boundary = false;
    };
    bool agree = true;
    std::vector<Item> disagreements;
    int boundary_count = 0;
    int hard_count = 0;
};

inline AgreementReport compare(const SearchResult &search, const OraclePath &path,
                               double path_slack_allowance, double cell_diagonal) {
    AgreementReport report;
    std::vector<int> accepted = search.portal_ids();
    std::vector<int> pierced = path.pierced_portal_ids;
    std::sort(accepted.begin(), accepted.end());
    std::sort(pierced.begin(), pierced.end());
    pierced.erase(std::unique(pierced.begin(), pierced.end()), pierced.end());

    const auto classify = [&](int portal_id, bool missing) {
        AgreementReport::Item item;
        item.portal_id = portal_id;
        item.missing = missing;
        for (const PortalHit &h : search.evaluated) {
            if (h.portal_id == portal_id && (h.status == PortalTestStatus::Accepted ||
                                             h.status == PortalTestStatus::CriterionRejected)) {
                item.has_slack = true;
                item.slack = h.slack;
                break;
            }
        }
        item.boundary =
            item.has_slack && std::abs(item.slack - path_slack_allowance) <= cell_diagonal;
        report.disagreements.push_back(item);
        report.agree = false;
        if (item.boundary) {
            report.boundary_count += 1;
        } else {
            report.hard_count += 1;
        }
    };

    for (int id : accepted) {
        if (!std::binary_search(pierced.begin(), pierced.end(), id)) {
            classify(id, false);
        }
    }
    for (int id : pierced) {
        if (!std::binary_search(accepted.begin(), accepted.end(), id)) {
            classify(id, true);
        }
    }
    return report;
}

} // namespace portalwave::oracle
