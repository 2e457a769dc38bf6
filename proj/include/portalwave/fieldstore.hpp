#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "portalwave/bake.hpp"
#include "portalwave/math.hpp"

namespace portalwave {

// Parameters of the initial sound plus the six directional reflection
// loudnesses for one source/listener pair. audible == false is the distinct
// no-path result (sealed rooms, out-of-component probes).
struct AcousticParams {
    bool audible = false;
    double tau0 = 0.0;       // s
    double loudness_db = 0.0;
    Vec3 direction{0, 0, 1}; // propagation direction of the initial wavefront
                             // as it crosses the listener
    std::array<double, 6> reflections_db{};

    double total_reflected_energy() const {
        double e = 0.0;
        for (double r : reflections_db) {
            e += db_to_energy(r);
        }
        return e;
    }
};

enum class InterpMode { Linear, Improved };

struct InterpSample {
    Vec3 position;  // y_i
    double weight;  // w_i, non-negative, normalized across the sample set
    double tau0;    // s
    Vec3 direction; // s0^i, unit, arrival direction at the sample

    Vec3 apparent_location(double c) const { return position - direction * (c * tau0); }
};

struct DelayDirection {
    double tau0 = 0.0;
    Vec3 direction{0, 0, 1};
};

inline DelayDirection interp_linear(std::span<const InterpSample> samples) {
    double wsum = 0.0;
    for (const auto &s : samples) {
        wsum += s.weight;
    }
    if (samples.empty() || wsum <= 0.0) {
        throw std::invalid_argument("interp_linear: zero total weight");
    }
    DelayDirection out;
    Vec3 dir{0, 0, 0};
    double tau = 0.0;
    for (const auto &s : samples) {
        tau += s.weight * s.tau0;
        dir += s.direction * s.weight;
    }
    out.tau0 = tau / wsum;
    out.direction = normalized_or_zero(dir);
    if (length_sq(out.direction) == 0.0) {
        out.direction = {0, 0, 1};
    }
    return out;
}

// Apparent-location interpolation: each sample is backed up along its arrival
// direction by the traveled distance, and delay/direction at the evaluation
// point come from those free-space-equivalent locations. Exact in free space
// and extrapolates past the sample hull.
//
// The direction numerator uses (y - apparent_i). An alternative (y - y_i)
// numerator is kept behind a flag for comparison; it does not reproduce
// free-field directions and is not used by lookups.
inline DelayDirection interp_improved(std::span<const InterpSample> samples, const Vec3 &y,
                                      double c, bool sample_offset_numerator = false) {
    double wsum = 0.0;
    for (const auto &s : samples) {
        wsum += s.weight;
    }
    if (samples.empty() || wsum <= 0.0) {
        throw std::invalid_argument("interp_improved: zero total weight");
    }
    double tau = 0.0;
    Vec3 dir{0, 0, 0};
    for (const auto &s : samples) {
        const Vec3 apparent = s.apparent_location(c);
        const double dist = length(y - apparent);
        tau += s.weight * dist / c;
        if (dist > 1e-12) {
            const Vec3 numerator = sample_offset_numerator ? (y - s.position) : (y - apparent);
            dir += numerator * (s.weight / dist);
        }
        // dist == 0: the sample's delay term contributes 0 and its direction
        // term is dropped.
    }
    DelayDirection out;
    out.tau0 = tau / wsum;
    out.direction = normalized_or_zero(dir);
    if (length_sq(out.direction) == 0.0) {
        out.direction = {0, 0, 1};
    }
    return out;
}

namespace detail {

struct EmitterTap {
    std::size_t cell = 0;
    double weight = 0.0;
    Vec3 position;
};

// Up to 8 surrounding emitter cells with trilinear weights on the ideal
// lattice; positions are the true (snapped) sample locations.
inline void emitter_taps(const EmitterLayout &lay, const Vec3 &p, std::vector<EmitterTap> &out) {
    out.clear();
    int base[3];
    double frac[3];
    const double q[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
        if (lay.dims[a] == 1) {
            base[a] = 0;
            frac[a] = 0.0;
            continue;
        }
        const double u = (q[a] - lay.first_center(a)) / lay.step(a);
        double i0 = std::floor(u);
        double f = u - i0;
        if (i0 < 0) {
            i0 = 0;
            f = 0.0;
        } else if (i0 > lay.dims[a] - 2) {
            i0 = lay.dims[a] - 2;
            f = 1.0;
        }
        base[a] = static_cast<int>(i0);
        frac[a] = std::clamp(f, 0.0, 1.0);
    }
    for (int dz = 0; dz < 2; ++dz) {
        if (lay.dims[2] == 1 && dz == 1) {
            continue;
        }
        for (int dy = 0; dy < 2; ++dy) {
            if (lay.dims[1] == 1 && dy == 1) {
                continue;
            }
            for (int dx = 0; dx < 2; ++dx) {
                if (lay.dims[0] == 1 && dx == 1) {
                    continue;
                }
                const double w = (dx ? frac[0] : (lay.dims[0] == 1 ? 1.0 : 1.0 - frac[0])) *
                                 (dy ? frac[1] : (lay.dims[1] == 1 ? 1.0 : 1.0 - frac[1])) *
                                 (dz ? frac[2] : (lay.dims[2] == 1 ? 1.0 : 1.0 - frac[2]));
                if (w <= 0.0) {
                    continue;
                }
                const int i = base[0] + dx, j = base[1] + dy, k = base[2] + dz;
                out.push_back({lay.index(i, j, k), w, lay.sample_position(i, j, k)});
            }
        }
    }
}

struct ProbeTap {
    int index = 0;
    double weight = 0.0;
};

// Propagation distance from a probe to a position, read from the probe's own
// field at the surrounding emitter cells. Infinite when the position is
// unreachable from that probe.
inline double probe_geodesic(const BakedDataset &ds, int probe_index,
                             std::span<const EmitterTap> taps) {
    const ParameterField &field = ds.fields[std::size_t(probe_index)];
    double acc = 0.0, wsum = 0.0;
    for (const EmitterTap &tap : taps) {
        if (!field.valid[tap.cell]) {
            continue;
        }
        acc += tap.weight * field.tau0_q[tap.cell] * ds.config.delay_quantum;
        wsum += tap.weight;
    }
    if (wsum <= 0.0) {
        return std::numeric_limits<double>::max();
    }
    return ds.config.c * acc / wsum;
}

// Nearest probes (up to 4) within 2x probe spacing, measured along the
// propagation paths (the probe's own delay field), so probes on the other
// side of a wall drop out even when they are close in a straight line.
// Inverse-distance weights taper to zero at the radius so the candidate set
// can change without a jump; an exact positional hit resolves to that probe
// alone.
inline void probe_taps(const BakedDataset &ds, const Vec3 &listener, std::vector<ProbeTap> &out) {
    out.clear();
    const double radius = 2.0 * ds.probe_spacing;
    thread_local std::vector<EmitterTap> taps;
    emitter_taps(ds.emitters, listener, taps);
    struct Cand {
        double dist;
        int index;
    };
    thread_local std::vector<Cand> pre; // (euclid, index) inside the radius
    pre.clear();
    bool exact = false;
    const auto gather = [&](std::int32_t i) {
        if (exact) {
            return;
        }
        const double euclid = distance(ds.probes.probes[std::size_t(i)].position, listener);
        if (euclid < 1e-9) {
            out.clear();
            out.push_back({int(i), 1.0});
            exact = true;
            return;
        }
        if (euclid <= radius) {
            pre.push_back({euclid, int(i)});
        }
    };
    if (!ds.probe_index.empty()) {
        ds.probe_index.visit(listener, radius, gather);
    } else {
        for (std::size_t i = 0; i < ds.probes.probes.size(); ++i) {
            gather(std::int32_t(i));
        }
    }
    if (exact) {
        return;
    }
    std::sort(pre.begin(), pre.end(), [](const Cand &a, const Cand &b) {
        return a.dist != b.dist ? a.dist < b.dist : a.index < b.index;
    });
    // Evaluate propagation distances lazily in ascending straight-line
    // order: a probe whose straight-line distance already exceeds the
    // 4th-best kept propagation distance cannot enter the selection.
    Cand kept[4];
    int kept_count = 0;
    int nearest = -1;
    double nearest_dist = std::numeric_limits<double>::max();
    for (const Cand &p : pre) {
        if (kept_count == 4 && p.dist > kept[3].dist) {
            break;
        }
        const double d = probe_geodesic(ds, p.index, taps);
        if (d == std::numeric_limits<double>::max()) {
            continue;
        }
        if (d < nearest_dist || (d == nearest_dist && p.index < nearest)) {
            nearest_dist = d;
            nearest = p.index;
        }
        if (d > radius) {
            continue;
        }
        const Cand cand{std::max(d, p.dist), p.index};
        int at = kept_count < 4 ? kept_count : 3;
        if (kept_count < 4) {
            ++kept_count;
        } else if (cand.dist > kept[3].dist ||
                   (cand.dist == kept[3].dist && cand.index > kept[3].index)) {
            continue;
        }
        kept[at] = cand;
        while (at > 0 && (kept[at].dist < kept[at - 1].dist ||
                          (kept[at].dist == kept[at - 1].dist &&
                           kept[at].index < kept[at - 1].index))) {
            std::swap(kept[at], kept[at - 1]);
            --at;
        }
    }
    if (nearest < 0) {
        // widen: nearest reachable probe anywhere
        for (std::size_t i = 0; i < ds.probes.probes.size(); ++i) {
            const double d = probe_geodesic(ds, static_cast<int>(i), taps);
            if (d < nearest_dist) {
                nearest_dist = d;
                nearest = static_cast<int>(i);
            }
        }
        if (nearest >= 0) {
            out.push_back({nearest, 1.0});
        }
        return;
    }
    if (kept_count == 0) {
        out.push_back({nearest, 1.0});
        return;
    }
    double wsum = 0.0;
    for (int i = 0; i < kept_count; ++i) {
        const double w = 1.0 / std::max(kept[i].dist, 1e-6) - 1.0 / radius;
        if (w > 0.0) {
            out.push_back({kept[i].index, w});
            wsum += w;
        }
    }
    if (out.empty()) {
        out.push_back({kept[0].index, 1.0});
        return;
    }
    for (auto &t : out) {
        t.weight /= wsum;
    }
}

struct ProbeStage {
    bool ok = false;
    double tau0 = 0.0;
    Vec3 direction{0, 0, 1}; // arrival direction at the probe
    double loudness = 0.0;
    std::array<double, 6> reflections{};
};

// Source-side stage for one probe: interpolate the probe's field over the
// emitter taps. The arrival direction at the probe comes from the apparent
// position of each cell as seen from the probe, rigidly translated by the
// query offset: when the cells around the source see the probe in free space
// this reconstructs the query position exactly, so the direction flips sides
// of a portal plane exactly when the query does.
inline ProbeStage probe_stage(const BakedDataset &ds, int probe_index,
                              std::span<const EmitterTap> taps, const Vec3 &source,
                              InterpMode mode) {
    const double c = ds.config.c;
    const double quantum = ds.config.delay_quantum;
    const ParameterField &field = ds.fields[std::size_t(probe_index)];
    const Vec3 probe_pos = ds.probes.probes[std::size_t(probe_index)].position;
    thread_local std::vector<InterpSample> cell_samples;
    cell_samples.clear();
    double wsum = 0.0;
    ProbeStage out;
    Vec3 dir_in_acc{0, 0, 0};
    Vec3 apparent_acc{0, 0, 0};
    for (const auto &tap : taps) {
        if (!field.valid[tap.cell]) {
            continue;
        }
        InterpSample s;
        s.position = tap.position;
        s.weight = tap.weight;
        s.tau0 = field.tau0_q[tap.cell] * quantum;
        const auto &o = field.dir_out[tap.cell];
        s.direction = {o[0], o[1], o[2]};
        cell_samples.push_back(s);
        wsum += tap.weight;
        out.loudness += tap.weight * field.loudness_cdb[tap.cell] * 0.01;
        for (int j = 0; j < 6; ++j) {
            out.reflections[j] += tap.weight * field.reflections_cdb[tap.cell][j] * 0.01;
        }
        const auto &di = field.dir_in[tap.cell];
        const Vec3 dir_in{di[0], di[1], di[2]};
        dir_in_acc += dir_in * tap.weight;
        // A stored delay within half a quantum of the straight-line distance
        // is quantization noise on a line-of-sight path; snap it.
        const double straight = length(probe_pos - tap.position);
        double traveled = c * s.tau0;
        if (std::abs(traveled - straight) <= 0.5 * c * quantum + 1e-9) {
            traveled = straight;
        }
        const Vec3 apparent_cell = probe_pos - dir_in * traveled;
        apparent_acc += (apparent_cell + (source - tap.position)) * tap.weight;
    }
    if (cell_samples.empty() || wsum <= 0.0) {
        return out; // this probe cannot reach the source region
    }
    for (auto &s : cell_samples) {
        s.weight /= wsum;
    }
    if (mode == InterpMode::Improved) {
        out.tau0 = interp_improved(cell_samples, source, c).tau0;
        out.direction = normalized_or_zero(probe_pos - apparent_acc / wsum);
    } else {
        out.tau0 = interp_linear(cell_samples).tau0;
        out.direction = normalized_or_zero(dir_in_acc);
    }
    if (length_sq(out.direction) == 0.0) {
        out.direction = normalized_or_zero(dir_in_acc);
    }
    if (length_sq(out.direction) == 0.0) {
        out.direction = {0, 0, 1};
    }
    out.loudness /= wsum;
    for (int j = 0; j < 6; ++j) {
        out.reflections[j] /= wsum;
    }
    out.ok = true;
    return out;
}

} // namespace detail

// Parameter lookup P(source, listener). The listener resolves to nearby
// probes, the source to surrounding emitter cells; invalid cells are dropped
// and weights renormalized. Delay and direction combine per the requested
// mode, loudness and reflections always interpolate linearly in dB.
inline AcousticParams lookup(const BakedDataset &ds, const Vec3 &source, const Vec3 &listener,
                             InterpMode mode = InterpMode::Improved) {
    AcousticParams out;
    thread_local std::vector<detail::ProbeTap> probes;
    detail::probe_taps(ds, listener, probes);
    if (probes.empty()) {
        return out;
    }
    thread_local std::vector<detail::EmitterTap> taps;
    detail::emitter_taps(ds.emitters, source, taps);
    if (taps.empty()) {
        return out;
    }

    const double c = ds.config.c;
    thread_local std::vector<InterpSample> probe_samples;
    probe_samples.clear();
    probe_samples.reserve(probes.size());
    double loudness = 0.0;
    std::array<double, 6> reflections{};
    double probe_wsum = 0.0;

    for (const auto &pt : probes) {
        const detail::ProbeStage stage = detail::probe_stage(ds, pt.index, taps, source, mode);
        if (!stage.ok) {
            continue;
        }
        InterpSample ps;
        ps.position = ds.probes.probes[std::size_t(pt.index)].position;
        ps.weight = pt.weight;
        ps.tau0 = stage.tau0;
        ps.direction = stage.direction;
        probe_samples.push_back(ps);
        loudness += pt.weight * stage.loudness;
        for (int j = 0; j < 6; ++j) {
            reflections[j] += pt.weight * stage.reflections[j];
        }
        probe_wsum += pt.weight;
    }
    if (probe_samples.empty() || probe_wsum <= 0.0) {
        return out; // no-path
    }
    for (auto &s : probe_samples) {
        s.weight /= probe_wsum;
    }

    const DelayDirection dd = mode == InterpMode::Improved
                                  ? interp_improved(probe_samples, listener, c)
                                  : interp_linear(probe_samples);
    out.audible = true;
    out.tau0 = dd.tau0;
    out.direction = dd.direction;
    out.loudness_db = loudness / probe_wsum;
    for (int j = 0; j < 6; ++j) {
        out.reflections_db[j] = reflections[j] / probe_wsum;
    }
    return out;
}

// Lookup with the listener exactly at a known probe (portal centroids):
// skips the probe search, otherwise identical to lookup().
inline AcousticParams lookup_at_probe(const BakedDataset &ds, int probe_index, const Vec3 &source,
                                      std::span<const detail::EmitterTap> taps,
                                      InterpMode mode = InterpMode::Improved) {
    AcousticParams out;
    if (taps.empty()) {
        return out;
    }
    const detail::ProbeStage stage = detail::probe_stage(ds, probe_index, taps, source, mode);
    if (!stage.ok) {
        return out;
    }
    const Vec3 probe_pos = ds.probes.probes[std::size_t(probe_index)].position;
    InterpSample ps;
    ps.position = probe_pos;
    ps.weight = 1.0;
    ps.tau0 = stage.tau0;
    ps.direction = stage.direction;
    const std::span<const InterpSample> one(&ps, 1);
    const DelayDirection dd = mode == InterpMode::Improved ? interp_improved(one, probe_pos, ds.config.c)
                                                           : interp_linear(one);
    out.audible = true;
    out.tau0 = dd.tau0;
    out.direction = dd.direction;
    out.loudness_db = stage.loudness;
    out.reflections_db = stage.reflections;
    return out;
}

} // namespace portalwave
