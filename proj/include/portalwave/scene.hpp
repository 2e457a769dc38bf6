#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "portalwave/math.hpp"
#include "portalwave/sha256.hpp"

namespace portalwave {

class SceneError : public std::runtime_error {
public:
    explicit SceneError(const std::string &msg) : std::runtime_error(msg) {}
};

// Voxel occupancy grid. Cells outside the grid are treated as solid.
// 2D scenes use dims.z == 1; everything else stays on the 3D code path.
struct SceneGrid {
    Vec3 origin{0, 0, 0};
    double cell_size = 0.25;
    std::array<int, 3> dims{1, 1, 1};
    std::vector<std::uint8_t> solid; // 1 = solid, 0 = open; x fastest, then y, then z

    bool is_2d() const { return dims[2] == 1; }
    std::size_t cell_count() const {
        return std::size_t(dims[0]) * std::size_t(dims[1]) * std::size_t(dims[2]);
    }
    std::size_t index(int ix, int iy, int iz) const {
        return (std::size_t(iz) * dims[1] + iy) * dims[0] + ix;
    }
    bool in_bounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < dims[0] && iy >= 0 && iy < dims[1] && iz >= 0 && iz < dims[2];
    }
    bool solid_at(int ix, int iy, int iz) const {
        if (!in_bounds(ix, iy, iz)) {
            return true;
        }
        return solid[index(ix, iy, iz)] != 0;
    }
    bool open_at(int ix, int iy, int iz) const { return !solid_at(ix, iy, iz); }

    std::array<int, 3> cell_of(const Vec3 &p) const {
        return {static_cast<int>(std::floor((p.x - origin.x) / cell_size)),
                static_cast<int>(std::floor((p.y - origin.y) / cell_size)),
                static_cast<int>(std::floor((p.z - origin.z) / cell_size))};
    }
    Vec3 cell_center(int ix, int iy, int iz) const {
        return {origin.x + (ix + 0.5) * cell_size, origin.y + (iy + 0.5) * cell_size,
                origin.z + (iz + 0.5) * cell_size};
    }
    Vec3 cell_center(const std::array<int, 3> &c) const { return cell_center(c[0], c[1], c[2]); }

    bool contains(const Vec3 &p) const {
        const auto c = cell_of(p);
        return in_bounds(c[0], c[1], c[2]);
    }

    // Open at p, or at any face neighbor when p sits on a cell boundary.
    // Portal polygons are usually authored on cell faces, where the containing
    // cell is ambiguous up to floating point.
    bool open_near(const Vec3 &p, double eps = 1e-7) const {
        const auto c = cell_of(p);
        if (open_at(c[0], c[1], c[2])) {
            return true;
        }
        const double u[3] = {(p.x - origin.x) / cell_size, (p.y - origin.y) / cell_size,
                             (p.z - origin.z) / cell_size};
        for (int axis = 0; axis < 3; ++axis) {
            const double frac = u[axis] - std::floor(u[axis]);
            auto n = c;
            if (frac < eps) {
                n[axis] -= 1;
            } else if (frac > 1.0 - eps) {
                n[axis] += 1;
            } else {
                continue;
            }
            if (open_at(n[0], n[1], n[2])) {
                return true;
            }
        }
        return false;
    }

    double cell_diagonal() const { return cell_size * std::sqrt(is_2d() ? 2.0 : 3.0); }
};

// Convex planar opening whose open area changes at runtime. The dynamic open
// fraction itself lives in the engine's portal state, not here.
struct Portal {
    int id = 0; // dense 1..N
    std::vector<Vec3> polygon;
    Vec3 centroid{0, 0, 0};
    Vec3 normal{0, 0, 0};
    double radius = 0.0; // bounding circle about the centroid
    double area = 0.0;
};

struct PortalGeometry {
    Vec3 centroid;
    Vec3 normal;
    double radius = 0.0;
    double area = 0.0;
};

// Area centroid / normal / bounding radius / area of a convex planar polygon.
// Normal sign follows vertex winding; both signs are acceptable downstream.
inline PortalGeometry portal_geometry(const std::vector<Vec3> &polygon) {
    if (polygon.size() < 3) {
        throw SceneError("portal polygon needs at least 3 vertices");
    }
    Vec3 vertex_mean{0, 0, 0};
    for (const Vec3 &v : polygon) {
        vertex_mean += v;
    }
    vertex_mean = vertex_mean / double(polygon.size());

    // Fan about the vertex mean: for a convex polygon every triangle has the
    // same normal orientation, and the area-weighted triangle centroids give
    // the polygon centroid independent of vertex rotation.
    Vec3 normal_acc{0, 0, 0};
    Vec3 centroid_acc{0, 0, 0};
    double area2 = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vec3 &a = polygon[i];
        const Vec3 &b = polygon[(i + 1) % polygon.size()];
        const Vec3 c = cross(a - vertex_mean, b - vertex_mean);
        normal_acc += c;
        const double tri2 = length(c);
        area2 += tri2;
        centroid_acc += (vertex_mean + a + b) * (tri2 / 3.0);
    }
    const double area = 0.5 * area2;
    if (area <= 0.0 || length(normal_acc) < 1e-12) {
        throw SceneError("degenerate (collinear) portal polygon");
    }
    PortalGeometry g;
    g.area = area;
    g.normal = normalized(normal_acc);
    g.centroid = centroid_acc / area2;
    g.radius = 0.0;
    for (const Vec3 &v : polygon) {
        g.radius = std::max(g.radius, distance(v, g.centroid));
    }
    return g;
}

namespace detail {

// In-plane basis for a polygon plane.
inline void plane_basis(const Vec3 &normal, Vec3 &u, Vec3 &v) {
    const Vec3 pick = std::abs(normal.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    u = normalized(cross(normal, pick));
    v = cross(normal, u);
}

// 2D convex point-in-polygon with slack (negative slack shrinks the polygon).
inline bool inside_convex_2d(const std::vector<std::array<double, 2>> &poly, double px, double py,
                             double slack) {
    const std::size_t n = poly.size();
    double winding = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto &a = poly[i];
        const auto &b = poly[(i + 1) % n];
        winding += (b[0] - a[0]) * (b[1] + a[1]);
    }
    const double orient = winding > 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto &a = poly[i];
        const auto &b = poly[(i + 1) % n];
        const double ex = b[0] - a[0];
        const double ey = b[1] - a[1];
        const double elen = std::sqrt(ex * ex + ey * ey);
        if (elen < 1e-15) {
            continue;
        }
        const double side = orient * ((px - a[0]) * ey - (py - a[1]) * ex) / elen;
        if (side > slack) {
            return false;
        }
    }
    return true;
}

struct PolygonFrame {
    Vec3 origin;
    Vec3 normal;
    Vec3 u, v;
    std::vector<std::array<double, 2>> poly2d;

    explicit PolygonFrame(const Portal &portal) : origin(portal.centroid), normal(portal.normal) {
        plane_basis(normal, u, v);
        poly2d.reserve(portal.polygon.size());
        for (const Vec3 &p : portal.polygon) {
            const Vec3 d = p - origin;
            poly2d.push_back({dot(d, u), dot(d, v)});
        }
    }

    std::array<double, 2> project(const Vec3 &p) const {
        const Vec3 d = p - origin;
        return {dot(d, u), dot(d, v)};
    }
    Vec3 unproject(double a, double b) const { return origin + u * a + v * b; }

    bool inside(double a, double b, double slack) const {
        return inside_convex_2d(poly2d, a, b, slack);
    }

    // Nearest point of the polygon (in-plane) to a 2D point.
    std::array<double, 2> clamp_to_polygon(double a, double b) const {
        if (inside(a, b, 0.0)) {
            return {a, b};
        }
        double best_d2 = std::numeric_limits<double>::max();
        std::array<double, 2> best{poly2d[0][0], poly2d[0][1]};
        const std::size_t n = poly2d.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto &p = poly2d[i];
            const auto &q = poly2d[(i + 1) % n];
            const double ex = q[0] - p[0];
            const double ey = q[1] - p[1];
            const double e2 = ex * ex + ey * ey;
            double t = e2 > 0.0 ? ((a - p[0]) * ex + (b - p[1]) * ey) / e2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            const double cx = p[0] + t * ex;
            const double cy = p[1] + t * ey;
            const double d2 = (a - cx) * (a - cx) + (b - cy) * (b - cy);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = {cx, cy};
            }
        }
        return best;
    }

    // In-plane distance from a 2D point to the polygon (0 when inside).
    double distance_to_polygon(double a, double b) const {
        const auto c = clamp_to_polygon(a, b);
        return std::hypot(a - c[0], b - c[1]);
    }
};

} // namespace detail

// Point of the portal polygon minimizing |a - p| + |b - p|. When the segment
// a-b crosses the plane inside the polygon that crossing is the exact
// minimizer; otherwise a projected-gradient descent over the polygon runs with
// a 64-iteration cap and 1e-6 m convergence (the objective is convex on a
// convex set).
inline Vec3 closest_point_on_portal(const Portal &portal, const Vec3 &a, const Vec3 &b) {
    const detail::PolygonFrame frame(portal);
    const double da = dot(a - portal.centroid, portal.normal);
    const double db = dot(b - portal.centroid, portal.normal);

    if ((da > 0.0) != (db > 0.0) && std::abs(da - db) > 1e-15) {
        const double t = da / (da - db);
        const Vec3 q = a + (b - a) * t;
        const auto q2 = frame.project(q);
        if (frame.inside(q2[0], q2[1], 1e-12)) {
            return q;
        }
    }

    const auto eval = [&](double px, double py) {
        const Vec3 p = frame.unproject(px, py);
        return distance(a, p) + distance(b, p);
    };

    // Start from the best of: clamped reflected-segment crossing, clamped
    // projections of the endpoints' midpoint, and the centroid.
    double cx = 0.0, cy = 0.0; // centroid in frame coords
    double best = eval(cx, cy);
    const auto consider = [&](std::array<double, 2> cand) {
        const auto c = frame.clamp_to_polygon(cand[0], cand[1]);
        const double f = eval(c[0], c[1]);
        if (f < best) {
            best = f;
            cx = c[0];
            cy = c[1];
        }
    };
    // Reflect b across the plane; the straight segment from a to the mirror
    // image crosses the plane at the unconstrained in-plane minimizer, so an
    // interior crossing is the exact answer.
    {
        const Vec3 b_ref = b - portal.normal * (2.0 * db);
        const double dar = da;
        const double dbr = -db;
        if (std::abs(dar - dbr) > 1e-15) {
            const double t = dar / (dar - dbr);
            if (t >= 0.0 && t <= 1.0) {
                const Vec3 q = a + (b_ref - a) * t;
                const auto q2 = frame.project(q);
                if (frame.inside(q2[0], q2[1], 1e-12)) {
                    return frame.unproject(q2[0], q2[1]);
                }
                consider(q2);
            }
        }
    }
    consider(frame.project((a + b) * 0.5));

    double step = std::max(portal.radius, 1e-6);
    for (int iter = 0; iter < 64; ++iter) {
        const Vec3 p = frame.unproject(cx, cy);
        Vec3 grad{0, 0, 0};
        const double la = distance(a, p);
        const double lb = distance(b, p);
        if (la > 1e-12) {
            grad += (p - a) / la;
        }
        if (lb > 1e-12) {
            grad += (p - b) / lb;
        }
        const double gu = dot(grad, frame.u);
        const double gv = dot(grad, frame.v);
        const double gnorm = std::hypot(gu, gv);
        if (gnorm < 1e-12) {
            break;
        }
        // Backtracking step on the projected iterate.
        bool moved = false;
        while (step > 1e-9) {
            const auto cand =
                frame.clamp_to_polygon(cx - step * gu / gnorm, cy - step * gv / gnorm);
            const double f = eval(cand[0], cand[1]);
            if (f < best - 1e-15) {
                const double delta = std::hypot(cand[0] - cx, cand[1] - cy);
                best = f;
                cx = cand[0];
                cy = cand[1];
                moved = true;
                if (delta < 1e-6) {
                    return frame.unproject(cx, cy);
                }
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            break;
        }
    }
    return frame.unproject(cx, cy);
}

struct SceneDescription {
    SceneGrid grid;
    std::vector<Portal> portals;
    double probe_spacing = 2.0;   // m
    double emitter_spacing = 1.0; // m
};

namespace detail {

inline void validate_portal(const SceneGrid &grid, const Portal &portal) {
    const auto fail = [&](const std::string &what) {
        throw SceneError("portal " + std::to_string(portal.id) + ": " + what);
    };
    if (portal.polygon.size() < 3) {
        fail("fewer than 3 vertices");
    }
    // Planarity within 1e-6 * radius.
    const double plane_tol = std::max(1e-6 * portal.radius, 1e-12);
    for (const Vec3 &v : portal.polygon) {
        if (std::abs(dot(v - portal.centroid, portal.normal)) > plane_tol) {
            fail("polygon is not planar");
        }
    }
    // Convexity: every cross product of consecutive edges aligned with the normal.
    const std::size_t n = portal.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 &p0 = portal.polygon[i];
        const Vec3 &p1 = portal.polygon[(i + 1) % n];
        const Vec3 &p2 = portal.polygon[(i + 2) % n];
        const Vec3 c = cross(p1 - p0, p2 - p1);
        if (dot(c, portal.normal) < -1e-9 * std::max(1.0, portal.radius * portal.radius)) {
            fail("polygon is not convex");
        }
    }
    if (portal.area <= 0.0) {
        fail("zero area");
    }
    // The opening must sit in open space: sample vertices, edge midpoints and
    // centroid, pulled slightly toward the centroid so face-aligned polygons
    // do not land inside the adjacent wall layer.
    const auto sample_open = [&](const Vec3 &p) {
        const Vec3 inset = p + (portal.centroid - p) * 1e-4;
        if (!grid.contains(inset) || !grid.open_near(inset)) {
            std::ostringstream os;
            os << "polygon point (" << p.x << ", " << p.y << ", " << p.z
               << ") lies in a solid or out-of-bounds cell";
            fail(os.str());
        }
    };
    sample_open(portal.centroid);
    for (std::size_t i = 0; i < n; ++i) {
        sample_open(portal.polygon[i]);
        sample_open((portal.polygon[i] + portal.polygon[(i + 1) % n]) * 0.5);
    }
}

inline void validate_scene(const SceneDescription &scene) {
    if (scene.grid.cell_size <= 0.0) {
        throw SceneError("cell_size must be > 0");
    }
    for (int d : scene.grid.dims) {
        if (d < 1) {
            throw SceneError("grid dims must all be >= 1");
        }
    }
    if (scene.grid.solid.size() != scene.grid.cell_count()) {
        throw SceneError("occupancy length does not match grid dims");
    }
    if (scene.probe_spacing < 0.5 || scene.probe_spacing > 4.0) {
        throw SceneError("probe_spacing outside [0.5, 4.0]");
    }
    if (scene.emitter_spacing < 1.0 || scene.emitter_spacing > 1.5) {
        throw SceneError("emitter_spacing outside [1.0, 1.5]");
    }
    for (const Portal &p : scene.portals) {
        validate_portal(scene.grid, p);
    }
}

} // namespace detail

// Builds a Portal (geometry derived, id assigned by the caller) from vertices.
inline Portal make_portal(int id, std::vector<Vec3> polygon) {
    Portal p;
    p.id = id;
    p.polygon = std::move(polygon);
    const PortalGeometry g = portal_geometry(p.polygon);
    p.centroid = g.centroid;
    p.normal = g.normal;
    p.radius = g.radius;
    p.area = g.area;
    return p;
}

// Scene JSON schema:
//   {
//     "cell_size": f, "origin": [f,f,f], "dims": [i,i,i],
//     "solid_cells": [start, count, start, count, ...],   // run-length encoded
//     "portals": [ { "vertices": [[f,f,f], ...] }, ... ],
//     "probe_spacing": f, "emitter_spacing": f
//   }
// All lengths in meters.
inline SceneDescription scene_from_json(const nlohmann::json &j) {
    SceneDescription scene;
    try {
        scene.grid.cell_size = j.at("cell_size").get<double>();
        const auto &origin = j.at("origin");
        scene.grid.origin = {origin.at(0).get<double>(), origin.at(1).get<double>(),
                             origin.at(2).get<double>()};
        const auto &dims = j.at("dims");
        scene.grid.dims = {dims.at(0).get<int>(), dims.at(1).get<int>(), dims.at(2).get<int>()};
        for (int d : scene.grid.dims) {
            if (d < 1) {
                throw SceneError("grid dims must all be >= 1");
            }
        }
        scene.grid.solid.assign(scene.grid.cell_count(), 0);
        const auto &runs = j.at("solid_cells");
        if (runs.size() % 2 != 0) {
            throw SceneError("solid_cells must hold (start, count) pairs");
        }
        for (std::size_t i = 0; i < runs.size(); i += 2) {
            const auto start = runs.at(i).get<std::int64_t>();
            const auto count = runs.at(i + 1).get<std::int64_t>();
            if (start < 0 || count < 0 ||
                std::size_t(start + count) > scene.grid.solid.size()) {
                throw SceneError("solid_cells run out of range at cell " + std::to_string(start));
            }
            std::fill_n(scene.grid.solid.begin() + start, count, std::uint8_t(1));
        }
        if (j.contains("probe_spacing")) {
            scene.probe_spacing = j.at("probe_spacing").get<double>();
        }
        if (j.contains("emitter_spacing")) {
            scene.emitter_spacing = j.at("emitter_spacing").get<double>();
        }
        int next_id = 1;
        for (const auto &jp : j.at("portals")) {
            std::vector<Vec3> verts;
            for (const auto &jv : jp.at("vertices")) {
                verts.push_back(
                    {jv.at(0).get<double>(), jv.at(1).get<double>(), jv.at(2).get<double>()});
            }
            scene.portals.push_back(make_portal(next_id++, std::move(verts)));
        }
    } catch (const nlohmann::json::exception &e) {
        throw SceneError(std::string("scene JSON parse error: ") + e.what());
    }
    detail::validate_scene(scene);
    return scene;
}

inline SceneDescription load_scene(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw SceneError("cannot open scene file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw SceneError(std::string("scene JSON parse error: ") + e.what());
    }
    return scene_from_json(j);
}

inline nlohmann::json scene_to_json(const SceneDescription &scene) {
    nlohmann::json j;
    j["cell_size"] = scene.grid.cell_size;
    j["origin"] = {scene.grid.origin.x, scene.grid.origin.y, scene.grid.origin.z};
    j["dims"] = {scene.grid.dims[0], scene.grid.dims[1], scene.grid.dims[2]};
    nlohmann::json runs = nlohmann::json::array();
    std::size_t i = 0;
    const std::size_t n = scene.grid.solid.size();
    while (i < n) {
        if (scene.grid.solid[i]) {
            std::size_t start = i;
            while (i < n && scene.grid.solid[i]) {
                ++i;
            }
            runs.push_back(start);
            runs.push_back(i - start);
        } else {
            ++i;
        }
    }
    j["solid_cells"] = std::move(runs);
    j["probe_spacing"] = scene.probe_spacing;
    j["emitter_spacing"] = scene.emitter_spacing;
    nlohmann::json portals = nlohmann::json::array();
    for (const Portal &p : scene.portals) {
        nlohmann::json verts = nlohmann::json::array();
        for (const Vec3 &v : p.polygon) {
            verts.push_back({v.x, v.y, v.z});
        }
        portals.push_back({{"vertices", std::move(verts)}});
    }
    j["portals"] = std::move(portals);
    return j;
}

inline void save_scene(const SceneDescription &scene, const std::string &path) {
    std::ofstream out(path);
    if (!out) {
        throw SceneError("cannot write scene file: " + path);
    }
    out << scene_to_json(scene).dump(2) << "\n";
}

// Deterministic content hash over the validated scene data; stored in bake
// files and re-checked by the engine.
inline std::array<std::uint8_t, 32> scene_content_hash(const SceneDescription &scene) {
    detail::Sha256 h;
    const auto put_f64 = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) {
            b[i] = static_cast<std::uint8_t>(bits >> (8 * i));
        }
        h.update(b, 8);
    };
    const auto put_i32 = [&](std::int32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) {
            b[i] = static_cast<std::uint8_t>(std::uint32_t(v) >> (8 * i));
        }
        h.update(b, 4);
    };
    put_f64(scene.grid.origin.x);
    put_f64(scene.grid.origin.y);
    put_f64(scene.grid.origin.z);
    put_f64(scene.grid.cell_size);
    for (int d : scene.grid.dims) {
        put_i32(d);
    }
    h.update(scene.grid.solid.data(), scene.grid.solid.size());
    put_f64(scene.probe_spacing);
    put_f64(scene.emitter_spacing);
    put_i32(static_cast<std::int32_t>(scene.portals.size()));
    for (const Portal &p : scene.portals) {
        put_i32(p.id);
        put_i32(static_cast<std::int32_t>(p.polygon.size()));
        for (const Vec3 &v : p.polygon) {
            put_f64(v.x);
            put_f64(v.y);
            put_f64(v.z);
        }
    }
    return h.finish();
}

} // namespace portalwave
