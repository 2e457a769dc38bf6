#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "portalwave/math.hpp"
#include "portalwave/scene.hpp"

namespace portalwave {

class BakeError : public std::runtime_error {
public:
    explicit BakeError(const std::string &msg) : std::runtime_error(msg) {}
};

struct BakeConfig {
    double c = 340.0;                      // speed of sound, m/s
    double delay_quantum = 0.002;          // s
    double loudness_quantum = 1.0;         // dB
    double initial_window = 0.010;         // s, documentation only
    double reflections_window = 0.080;     // s, documentation only
    double diffraction_loss_per_event = 6.0; // dB per path bend > 30 degrees
    double reverb_decay = 0.5;             // dB lost per meter of geodesic distance
    double reverb_gain_db = 10.0;          // fixed gain calibrating reflected energy
};

// Fraction of reflected energy distributed directionally around the arrival
// direction; the remainder is isotropic.
inline constexpr double kDirectionalFraction = 0.5;

struct Probe {
    Vec3 position;
    int portal_id = 0; // 0 = lattice probe
};

struct ProbeSet {
    std::vector<Probe> probes;
    std::map<int, int> portal_probe_index; // portal id -> probe index
};

// Uniform source-sample lattice derived from the fine occupancy grid. Sample
// points snap to fine cell centers so stored values are exact at samples; the
// ideal (unclamped) lattice spacing drives trilinear weights.
struct EmitterLayout {
    Vec3 origin;
    double cell_size = 0.25;
    std::array<int, 3> fine_dims{1, 1, 1};
    std::array<int, 3> stride{1, 1, 1};
    std::array<int, 3> dims{1, 1, 1};

    int fine_index(int axis, int e) const {
        return std::min(e * stride[axis], fine_dims[axis] - 1);
    }
    std::size_t cell_count() const {
        return std::size_t(dims[0]) * std::size_t(dims[1]) * std::size_t(dims[2]);
    }
    std::size_t index(int i, int j, int k) const {
        return (std::size_t(k) * dims[1] + j) * dims[0] + i;
    }
    double step(int axis) const { return stride[axis] * cell_size; }
    double first_center(int axis) const {
        const double o = axis == 0 ? origin.x : (axis == 1 ? origin.y : origin.z);
        return o + 0.5 * cell_size;
    }
    Vec3 sample_position(int i, int j, int k) const {
        return {origin.x + (fine_index(0, i) + 0.5) * cell_size,
                origin.y + (fine_index(1, j) + 0.5) * cell_size,
                origin.z + (fine_index(2, k) + 0.5) * cell_size};
    }
};

inline EmitterLayout emitter_layout_for(const SceneDescription &scene) {
    EmitterLayout e;
    e.origin = scene.grid.origin;
    e.cell_size = scene.grid.cell_size;
    e.fine_dims = scene.grid.dims;
    for (int a = 0; a < 3; ++a) {
        const int s =
            std::max(1, static_cast<int>(std::lround(scene.emitter_spacing / e.cell_size)));
        e.stride[a] = e.fine_dims[a] == 1 ? 1 : s;
        e.dims[a] = (e.fine_dims[a] + e.stride[a] - 1) / e.stride[a];
    }
    return e;
}

// Per-probe parameter records over the emitter lattice. Two arrival
// directions are kept per cell: dir_out is the initial wavefront's
// propagation direction as it crosses the cell (probe acting as source),
// dir_in is the arrival direction at the probe for a source at the cell.
// The first drives apparent-source interpolation on the emitter side, the
// second realizes portal-probe lookups and the reported listener direction.
struct ParameterField {
    int probe_index = 0;
    std::vector<std::uint8_t> valid;
    std::vector<std::uint16_t> tau0_q;                 // delay quantum counts
    std::vector<std::int16_t> loudness_cdb;            // centi-dB
    std::vector<std::array<std::int16_t, 6>> reflections_cdb;
    std::vector<std::array<float, 3>> dir_out;
    std::vector<std::array<float, 3>> dir_in;

    void resize(std::size_t n) {
        valid.assign(n, 0);
        tau0_q.assign(n, 0);
        loudness_cdb.assign(n, 0);
        reflections_cdb.assign(n, {0, 0, 0, 0, 0, 0});
        dir_out.assign(n, {0.f, 0.f, 0.f});
        dir_in.assign(n, {0.f, 0.f, 0.f});
    }
};

// Uniform spatial hash over probe positions; accelerates per-query probe
// gathering. Derived data, rebuilt after bake or load.
struct ProbeIndex {
    double bucket_size = 4.0;
    Vec3 origin;
    std::array<int, 3> dims{0, 0, 0};
    std::vector<std::vector<std::int32_t>> buckets;

    bool empty() const { return buckets.empty(); }

    std::size_t bucket_of(int i, int j, int k) const {
        return (std::size_t(k) * dims[1] + j) * dims[0] + i;
    }

    template <typename Fn> void visit(const Vec3 &center, double radius, Fn &&fn) const {
        const auto clampi = [](int v, int lo, int hi) { return std::clamp(v, lo, hi); };
        const int i0 = clampi(int(std::floor((center.x - radius - origin.x) / bucket_size)), 0,
                              dims[0] - 1);
        const int i1 = clampi(int(std::floor((center.x + radius - origin.x) / bucket_size)), 0,
                              dims[0] - 1);
        const int j0 = clampi(int(std::floor((center.y - radius - origin.y) / bucket_size)), 0,
                              dims[1] - 1);
        const int j1 = clampi(int(std::floor((center.y + radius - origin.y) / bucket_size)), 0,
                              dims[1] - 1);
        const int k0 = clampi(int(std::floor((center.z - radius - origin.z) / bucket_size)), 0,
                              dims[2] - 1);
        const int k1 = clampi(int(std::floor((center.z + radius - origin.z) / bucket_size)), 0,
                              dims[2] - 1);
        for (int k = k0; k <= k1; ++k) {
            for (int j = j0; j <= j1; ++j) {
                for (int i = i0; i <= i1; ++i) {
                    for (std::int32_t p : buckets[bucket_of(i, j, k)]) {
                        fn(p);
                    }
                }
            }
        }
    }
};

struct BakedDataset {
    BakeConfig config;
    Vec3 grid_origin;
    double grid_cell_size = 0.25;
    std::array<int, 3> grid_dims{1, 1, 1};
    double probe_spacing = 2.0;
    EmitterLayout emitters;
    ProbeSet probes;
    std::vector<ParameterField> fields;
    std::array<std::uint8_t, 32> scene_hash{};
    ProbeIndex probe_index;

    bool in_bounds(const Vec3 &p) const {
        const Vec3 d = p - grid_origin;
        return d.x >= 0.0 && d.y >= 0.0 && d.z >= 0.0 &&
               d.x <= grid_dims[0] * grid_cell_size && d.y <= grid_dims[1] * grid_cell_size &&
               d.z <= grid_dims[2] * grid_cell_size;
    }

    void rebuild_probe_index() {
        ProbeIndex idx;
        idx.bucket_size = std::max(probe_spacing, 1.0);
        idx.origin = grid_origin;
        for (int a = 0; a < 3; ++a) {
            idx.dims[a] = std::max(
                1, int(std::ceil(grid_dims[a] * grid_cell_size / idx.bucket_size)) + 1);
        }
        idx.buckets.assign(std::size_t(idx.dims[0]) * idx.dims[1] * idx.dims[2], {});
        for (std::size_t p = 0; p < probes.probes.size(); ++p) {
            const Vec3 d = probes.probes[p].position - idx.origin;
            const int i = std::clamp(int(std::floor(d.x / idx.bucket_size)), 0, idx.dims[0] - 1);
            const int j = std::clamp(int(std::floor(d.y / idx.bucket_size)), 0, idx.dims[1] - 1);
            const int k = std::clamp(int(std::floor(d.z / idx.bucket_size)), 0, idx.dims[2] - 1);
            idx.buckets[idx.bucket_of(i, j, k)].push_back(std::int32_t(p));
        }
        probe_index = std::move(idx);
    }
};

// Cosine-squared directional split of reflected energy over the six axial
// basis directions; sums exactly to total.
inline std::array<double, 6> split_reflection_energy(double total, const Vec3 &arrival_dir) {
    std::array<double, 6> out{};
    for (int j = 0; j < 6; ++j) {
        const double c = std::max(0.0, dot(arrival_dir, kAxialDirections[j]));
        out[j] = total * (kDirectionalFraction * c * c + (1.0 - kDirectionalFraction) / 6.0);
    }
    return out;
}

namespace detail {

// Voxel line-of-sight from a point to a cell center; every traversed cell
// must be open. Tied axis crossings also require both corner-adjacent cells
// open, so the check stays conservative.
inline bool grid_los_from(const SceneGrid &grid, const Vec3 &p0, const std::array<int, 3> &from,
                          const std::array<int, 3> &to) {
    const Vec3 p1 = grid.cell_center(to);
    const Vec3 d = p1 - p0;
    int cur[3] = {from[0], from[1], from[2]};
    const int goal[3] = {to[0], to[1], to[2]};
    const double dir[3] = {d.x, d.y, d.z};
    int step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dir[a]) < 1e-15) {
            step[a] = 0;
            t_max[a] = std::numeric_limits<double>::max();
            t_delta[a] = std::numeric_limits<double>::max();
        } else {
            step[a] = dir[a] > 0 ? 1 : -1;
            // Parametric distance to the first face crossing along axis a.
            const double origin_a = a == 0 ? grid.origin.x : (a == 1 ? grid.origin.y : grid.origin.z);
            const double p0_a = a == 0 ? p0.x : (a == 1 ? p0.y : p0.z);
            const double face =
                origin_a + (cur[a] + (step[a] > 0 ? 1.0 : 0.0)) * grid.cell_size;
            t_max[a] = (face - p0_a) / dir[a];
            t_delta[a] = grid.cell_size / std::abs(dir[a]);
        }
    }
    if (!grid.open_at(cur[0], cur[1], cur[2])) {
        return false;
    }
    int guard = 4 * (grid.dims[0] + grid.dims[1] + grid.dims[2]) + 8;
    while (cur[0] != goal[0] || cur[1] != goal[1] || cur[2] != goal[2]) {
        if (--guard < 0) {
            return false;
        }
        int axis = 0;
        if (t_max[1] < t_max[axis]) {
            axis = 1;
        }
        if (t_max[2] < t_max[axis]) {
            axis = 2;
        }
        // Handle near-exact corner crossings conservatively.
        for (int other = 0; other < 3; ++other) {
            if (other != axis && std::abs(t_max[other] - t_max[axis]) < 1e-12 &&
                step[other] != 0) {
                int corner[3] = {cur[0], cur[1], cur[2]};
                corner[other] += step[other];
                if (!grid.open_at(corner[0], corner[1], corner[2])) {
                    return false;
                }
            }
        }
        cur[axis] += step[axis];
        t_max[axis] += t_delta[axis];
        if (!grid.open_at(cur[0], cur[1], cur[2])) {
            return false;
        }
    }
    return true;
}

inline bool grid_los(const SceneGrid &grid, const std::array<int, 3> &from,
                     const std::array<int, 3> &to) {
    return grid_los_from(grid, grid.cell_center(from), from, to);
}

struct NeighborTable {
    struct Offset {
        int dx, dy, dz;
        double weight; // meters
    };
    std::vector<Offset> offsets;

    explicit NeighborTable(const SceneGrid &grid) {
        const bool flat = grid.is_2d();
        for (int dz = -1; dz <= 1; ++dz) {
            if (flat && dz != 0) {
                continue;
            }
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) {
                        continue;
                    }
                    offsets.push_back(
                        {dx, dy, dz, grid.cell_size * std::sqrt(double(dx * dx + dy * dy + dz * dz))});
                }
            }
        }
    }
};

// Wavefront march state shared by the bake and any consumer wanting raw
// fields (distances in meters over the fine grid).
struct MarchResult {
    std::vector<double> dist;        // graph (octile) distance, drives march order
    std::vector<double> smooth_dist; // anchor-chain length; straight segments between
                                     // line-of-sight corners, ends at the probe position
    std::vector<std::int32_t> anchor;  // last line-of-sight corner, -1 = source
    std::vector<std::uint16_t> events; // diffraction bends along the path
    std::vector<Vec3> first_dir;       // initial departure direction at the probe
    std::array<int, 3> source_cell{0, 0, 0};
    Vec3 source_position;

    bool reached(std::size_t idx) const {
        return dist[idx] != std::numeric_limits<double>::max();
    }
};

inline std::array<int, 3> snap_to_open_cell(const SceneGrid &grid, const Vec3 &p,
                                            const char *what) {
    auto c = grid.cell_of(p);
    if (grid.in_bounds(c[0], c[1], c[2]) && grid.open_at(c[0], c[1], c[2])) {
        return c;
    }
    // Boundary-sitting points (portal centroids on cell faces) snap to the
    // nearest open cell in the 3x3x3 neighborhood.
    double best = std::numeric_limits<double>::max();
    std::array<int, 3> best_cell{-1, -1, -1};
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int ix = c[0] + dx, iy = c[1] + dy, iz = c[2] + dz;
                if (!grid.in_bounds(ix, iy, iz) || !grid.open_at(ix, iy, iz)) {
                    continue;
                }
                const double d = length_sq(grid.cell_center(ix, iy, iz) - p);
                if (d < best) {
                    best = d;
                    best_cell = {ix, iy, iz};
                }
            }
        }
    }
    if (best_cell[0] < 0) {
        throw BakeError(std::string(what) + " is in a solid cell");
    }
    return best_cell;
}

// Dijkstra wavefront march over the open cells (26-connected in 3D,
// 8-connected in 2D, Euclidean edge weights), with line-of-sight anchor
// propagation that recovers sub-cell departure/arrival directions and counts
// diffraction bends sharper than 30 degrees.
inline MarchResult march_wavefront(const SceneDescription &scene, const Vec3 &probe_position) {
    const SceneGrid &grid = scene.grid;
    const std::size_t n = grid.cell_count();
    MarchResult r;
    r.dist.assign(n, std::numeric_limits<double>::max());
    r.smooth_dist.assign(n, std::numeric_limits<double>::max());
    r.anchor.assign(n, -2); // -2 = unreached
    r.events.assign(n, 0);
    r.first_dir.assign(n, Vec3{0, 0, 0});
    r.source_position = probe_position;
    r.source_cell = snap_to_open_cell(grid, probe_position, "probe");

    const NeighborTable nbr(grid);
    const std::int32_t src =
        static_cast<std::int32_t>(grid.index(r.source_cell[0], r.source_cell[1], r.source_cell[2]));
    const double cos_threshold = std::cos(30.0 * 3.14159265358979323846 / 180.0);

    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    r.dist[src] = length(grid.cell_center(r.source_cell) - probe_position);
    r.smooth_dist[src] = r.dist[src];
    r.anchor[src] = -1;
    heap.push({r.dist[src], src});

    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> done(n, 0);

    const auto cell_coords = [&](std::int32_t idx) {
        const int ix = static_cast<int>(idx % grid.dims[0]);
        const int iy = static_cast<int>((idx / grid.dims[0]) % grid.dims[1]);
        const int iz = static_cast<int>(idx / (std::size_t(grid.dims[0]) * grid.dims[1]));
        return std::array<int, 3>{ix, iy, iz};
    };
    const auto anchor_point = [&](std::int32_t a) {
        return a < 0 ? probe_position : grid.cell_center(cell_coords(a));
    };

    while (!heap.empty()) {
        const auto [d, idx] = heap.top();
        heap.pop();
        if (done[idx]) {
            continue;
        }
        done[idx] = 1;
        const auto c = cell_coords(idx);

        if (idx != src) {
            const std::int32_t p = parent[idx];
            const std::int32_t pa = r.anchor[p];
            const auto pa_cell = pa < 0 ? r.source_cell : cell_coords(pa);
            const Vec3 ray_start = pa < 0 ? probe_position : grid.cell_center(pa_cell);
            if (grid_los_from(grid, ray_start, pa_cell, c)) {
                r.anchor[idx] = pa;
                r.events[idx] = r.events[p];
            } else if (p == src) {
                // Corner at the probe itself (conservative LOS miss right at
                // the source); the probe stays the anchor and a bend at the
                // source is not a diffraction event.
                r.anchor[idx] = -1;
                r.events[idx] = 0;
            } else {
                r.anchor[idx] = p;
                const Vec3 incoming = normalized_or_zero(anchor_point(p) - anchor_point(pa));
                const Vec3 outgoing = normalized_or_zero(grid.cell_center(c) - anchor_point(p));
                r.events[idx] = static_cast<std::uint16_t>(
                    r.events[p] + ((dot(incoming, outgoing) < cos_threshold) ? 1 : 0));
            }
            const std::int32_t a = r.anchor[idx];
            const double base = a < 0 ? 0.0 : r.smooth_dist[a];
            r.smooth_dist[idx] = base + length(grid.cell_center(c) - anchor_point(a));
            r.first_dir[idx] = a < 0 ? normalized_or_zero(grid.cell_center(c) - probe_position)
                                     : r.first_dir[a];
        }

        for (const auto &o : nbr.offsets) {
            const int nx = c[0] + o.dx, ny = c[1] + o.dy, nz = c[2] + o.dz;
            if (!grid.in_bounds(nx, ny, nz) || !grid.open_at(nx, ny, nz)) {
                continue;
            }
            const std::int32_t nidx = static_cast<std::int32_t>(grid.index(nx, ny, nz));
            if (done[nidx]) {
                continue;
            }
            const double nd = d + o.weight;
            if (nd < r.dist[nidx]) {
                r.dist[nidx] = nd;
                parent[nidx] = idx;
                heap.push({nd, nidx});
            }
        }
    }
    return r;
}

inline std::int16_t to_centidb(double db) {
    const double v = std::clamp(db * 100.0, -32767.0, 32767.0);
    return static_cast<std::int16_t>(std::llround(v));
}

template <typename Fn> inline void parallel_for(std::size_t count, Fn &&fn) {
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned spawn = std::min<std::size_t>(workers, count);
    pool.reserve(spawn);
    for (unsigned w = 0; w < spawn; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
}

} // namespace detail

// Uniform probe lattice over open cells plus one probe at each portal
// centroid; ordering is deterministic (lattice scan, then portals by id).
inline ProbeSet layout_probes(const SceneDescription &scene) {
    const SceneGrid &grid = scene.grid;
    ProbeSet set;
    const int stride =
        std::max(1, static_cast<int>(std::lround(scene.probe_spacing / grid.cell_size)));
    std::array<int, 3> s{stride, stride, stride};
    for (int a = 0; a < 3; ++a) {
        if (grid.dims[a] == 1) {
            s[a] = 1;
        }
    }
    for (int iz = 0; iz < grid.dims[2]; iz += s[2]) {
        for (int iy = 0; iy < grid.dims[1]; iy += s[1]) {
            for (int ix = 0; ix < grid.dims[0]; ix += s[0]) {
                if (grid.open_at(ix, iy, iz)) {
                    set.probes.push_back({grid.cell_center(ix, iy, iz), 0});
                }
            }
        }
    }
    if (set.probes.empty() && scene.portals.empty()) {
        bool any_open = false;
        for (std::uint8_t v : grid.solid) {
            if (!v) {
                any_open = true;
                break;
            }
        }
        if (!any_open) {
            throw BakeError("scene has no open cells");
        }
    }
    for (const Portal &p : scene.portals) {
        set.portal_probe_index[p.id] = static_cast<int>(set.probes.size());
        set.probes.push_back({p.centroid, p.id});
    }
    if (set.probes.empty()) {
        throw BakeError("scene produced no probes");
    }
    return set;
}

// Propagation field for one probe: geodesic delay, loudness with spreading
// and per-diffraction loss, arrival directions, and the six-way reflected
// energy split, sampled on the emitter lattice and quantized.
inline ParameterField bake_probe(const SceneDescription &scene, const Vec3 &probe_position,
                                 const BakeConfig &config) {
    const SceneGrid &grid = scene.grid;
    const EmitterLayout layout = emitter_layout_for(scene);
    const detail::MarchResult march = detail::march_wavefront(scene, probe_position);

    ParameterField field;
    field.resize(layout.cell_count());

    for (int k = 0; k < layout.dims[2]; ++k) {
        for (int j = 0; j < layout.dims[1]; ++j) {
            for (int i = 0; i < layout.dims[0]; ++i) {
                const int fx = layout.fine_index(0, i);
                const int fy = layout.fine_index(1, j);
                const int fz = layout.fine_index(2, k);
                const std::size_t e = layout.index(i, j, k);
                if (!grid.open_at(fx, fy, fz)) {
                    continue;
                }
                const std::size_t f = grid.index(fx, fy, fz);
                if (!march.reached(f)) {
                    continue; // unreachable: stays invalid
                }
                const double d = march.smooth_dist[f];
                field.valid[e] = 1;
                field.tau0_q[e] = static_cast<std::uint16_t>(std::min<long long>(
                    0xffff, std::llround(d / config.c / config.delay_quantum)));

                Vec3 dir_out, dir_in;
                if (static_cast<std::int32_t>(f) ==
                    static_cast<std::int32_t>(grid.index(march.source_cell[0], march.source_cell[1],
                                                         march.source_cell[2]))) {
                    dir_out = Vec3{0, 0, 1};
                    dir_in = Vec3{0, 0, 1};
                } else {
                    const std::int32_t a = march.anchor[f];
                    const Vec3 apt = a < 0 ? march.source_position
                                           : grid.cell_center(int(a % grid.dims[0]),
                                                              int((a / grid.dims[0]) % grid.dims[1]),
                                                              int(a / (std::size_t(grid.dims[0]) *
                                                                       grid.dims[1])));
                    dir_out = normalized_or_zero(grid.cell_center(fx, fy, fz) - apt);
                    dir_in = -march.first_dir[f];
                    if (length_sq(dir_out) == 0.0) {
                        dir_out = Vec3{0, 0, 1};
                    }
                    if (length_sq(dir_in) == 0.0) {
                        dir_in = Vec3{0, 0, 1};
                    }
                }
                field.dir_out[e] = {float(dir_out.x), float(dir_out.y), float(dir_out.z)};
                field.dir_in[e] = {float(dir_in.x), float(dir_in.y), float(dir_in.z)};

                const double loudness = -20.0 * std::log10(std::max(d, 1.0)) -
                                        config.diffraction_loss_per_event * march.events[f];
                const double lq = config.loudness_quantum;
                field.loudness_cdb[e] =
                    detail::to_centidb(std::round(loudness / lq) * lq);

                const double total_energy = db_to_energy(loudness) *
                                            db_to_energy(-config.reverb_decay * d) *
                                            db_to_energy(config.reverb_gain_db);
                const auto split = split_reflection_energy(total_energy, dir_in);
                for (int jdir = 0; jdir < 6; ++jdir) {
                    const double rdb = energy_to_db(std::max(split[jdir], 1e-30));
                    field.reflections_cdb[e][jdir] =
                        detail::to_centidb(std::round(rdb / lq) * lq);
                }
            }
        }
    }
    return field;
}

inline BakedDataset bake_all(const SceneDescription &scene, const BakeConfig &config = {}) {
    BakedDataset ds;
    ds.config = config;
    ds.grid_origin = scene.grid.origin;
    ds.grid_cell_size = scene.grid.cell_size;
    ds.grid_dims = scene.grid.dims;
    ds.probe_spacing = scene.probe_spacing;
    ds.emitters = emitter_layout_for(scene);
    ds.probes = layout_probes(scene);
    ds.scene_hash = scene_content_hash(scene);
    ds.fields.resize(ds.probes.probes.size());
    detail::parallel_for(ds.probes.probes.size(), [&](std::size_t i) {
        ds.fields[i] = bake_probe(scene, ds.probes.probes[i].position, config);
        ds.fields[i].probe_index = static_cast<int>(i);
    });
    ds.rebuild_probe_index();
    return ds;
}

} // namespace portalwave
