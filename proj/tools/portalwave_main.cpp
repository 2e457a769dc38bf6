// portalwave: bake | query | sweep | verify | bench
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "portalwave/portalwave.hpp"

using namespace portalwave;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerification = 3;

Vec3 parse_position(const std::string &text) {
    Vec3 v;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &v.x, &v.y, &v.z) != 3) {
        throw CLI::ValidationError("position", "expected x,y,z: " + text);
    }
    return v;
}

std::pair<int, double> parse_alpha(const std::string &text) {
    int id = 0;
    double value = 0.0;
    if (std::sscanf(text.c_str(), "%d=%lf", &id, &value) != 2) {
        throw CLI::ValidationError("alpha", "expected portal=value: " + text);
    }
    return {id, value};
}

std::string ids_to_string(const std::vector<int> &ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) {
            s += "|";
        }
        s += std::to_string(ids[i]);
    }
    return s.empty() ? "-" : s;
}

void write_pgm(const std::string &path, int width, int height,
               const std::vector<double> &values, const std::vector<std::uint8_t> &valid) {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (valid[i]) {
            lo = std::min(lo, values[i]);
            hi = std::max(hi, values[i]);
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write map: " + path);
    }
    out << "P5\n" << width << " " << height << "\n255\n";
    for (int y = height - 1; y >= 0; --y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t i = std::size_t(y) * width + x;
            const unsigned char px =
                valid[i] ? static_cast<unsigned char>(32 + 223 * (values[i] - lo) / span) : 0;
            out.put(static_cast<char>(px));
        }
    }
}

struct QueryReport {
    double epsilon = 0.010;

    json to_json(const QueryResult &q, const BakedDataset &ds) const {
        json j;
        j["audible"] = q.audible;
        j["tau0_s"] = q.params.tau0;
        j["dist_m"] = q.debug.dist_m;
        j["dry_db"] = q.debug.dry_db;
        j["wet_db"] = q.debug.wet_db;
        j["arrival_direction"] = {q.debug.arrival_direction.x, q.debug.arrival_direction.y,
                                  q.debug.arrival_direction.z};
        j["reflections_db"] = q.params.reflections_db;
        j["net_open_fraction"] = q.net_open_fraction;
        j["portals"] = q.search.portal_ids();
        j["last_portal"] = q.search.last_portal_id;
        if (!std::isnan(q.debug.distance_diff_m)) {
            j["distance_diff_m"] = q.debug.distance_diff_m;
        }
        j["epsilon_slack_m"] = ds.config.c * epsilon;
        j["stats"] = {{"portals_tested", q.search.stats.portals_tested},
                      {"culled_bbox", q.search.stats.culled_bbox},
                      {"culled_ellipsoid", q.search.stats.culled_ellipsoid},
                      {"acoustic_lookups", q.search.stats.acoustic_lookups}};
        return j;
    }
};

int cmd_bake(const std::string &scene_path, const std::string &out_path, double delay_quantum,
             double c, double diffraction_loss, double reverb_decay, double reverb_gain) {
    const auto t0 = Clock::now();
    const SceneDescription scene = load_scene(scene_path);
    BakeConfig cfg;
    cfg.delay_quantum = delay_quantum;
    cfg.c = c;
    cfg.diffraction_loss_per_event = diffraction_loss;
    cfg.reverb_decay = reverb_decay;
    cfg.reverb_gain_db = reverb_gain;
    const BakedDataset ds = bake_all(scene, cfg);
    save_dataset(ds, out_path);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("baked %zu probes (%zu portal probes) over %d x %d x %d emitter cells in %.2fs\n",
                ds.probes.probes.size(), ds.probes.portal_probe_index.size(), ds.emitters.dims[0],
                ds.emitters.dims[1], ds.emitters.dims[2], secs);
    std::printf("wrote %s\n", out_path.c_str());
    return kExitOk;
}

int cmd_query(const std::string &scene_path, const std::string &bake_path,
              const std::string &source_text, const std::string &listener_text,
              const std::vector<std::string> &alphas, double epsilon, bool as_json) {
    const SceneDescription scene = load_scene(scene_path);
    BakedDataset ds = load_dataset(bake_path);
    SearchConfig cfg;
    cfg.epsilon = epsilon;
    Engine engine(scene, std::move(ds), cfg);
    for (const std::string &a : alphas) {
        const auto [id, value] = parse_alpha(a);
        engine.set_portal_open_fraction(id, value);
    }
    const Vec3 source = parse_position(source_text);
    const Vec3 listener = parse_position(listener_text);
    if (!engine.dataset().in_bounds(source) || !engine.dataset().in_bounds(listener)) {
        throw SceneError("source or listener outside the scene bounds");
    }
    const QueryResult q = engine.query(source, listener);
    if (as_json) {
        std::printf("%s\n", QueryReport{epsilon}.to_json(q, engine.dataset()).dump(2).c_str());
        return kExitOk;
    }
    if (!q.audible) {
        std::printf("no path between source and listener (silent)\n");
        return kExitOk;
    }
    std::printf("dist          %8.2f m\n", q.debug.dist_m);
    std::printf("dry           %8.2f dB\n", q.debug.dry_db);
    std::printf("wet           %8.2f dB\n", q.debug.wet_db);
    std::printf("arrival dir   (%.3f, %.3f, %.3f)\n", q.debug.arrival_direction.x,
                q.debug.arrival_direction.y, q.debug.arrival_direction.z);
    std::printf("portals       %s (last %s)\n", ids_to_string(q.search.portal_ids()).c_str(),
                q.search.last_portal_id ? std::to_string(q.search.last_portal_id).c_str() : "-");
    std::printf("net alpha     %8.3f\n", q.net_open_fraction);
    if (!std::isnan(q.debug.distance_diff_m)) {
        std::printf("distance diff %8.2f m (limit %.2f m)\n", q.debug.distance_diff_m,
                    engine.dataset().config.c * epsilon);
    }
    std::printf("stats         %d tested, %d bbox-culled, %d ellipsoid-culled, %d lookups\n",
                q.search.stats.portals_tested, q.search.stats.culled_bbox,
                q.search.stats.culled_ellipsoid, q.search.stats.acoustic_lookups);
    return kExitOk;
}

// Sweep spec JSON:
//   { "source": [x,y,z], "listener_path": [[x,y,z], ...], "step": 0.1,
//     "alpha": [ {"portal": 1, "value": 0.5} |
//                {"portal": 1, "from": 1.0, "to": 0.0} ],
//     "output": "trace.csv",
//     "maps": {"tau0": "tau.pgm", "loudness": "loud.pgm"} }
int cmd_sweep(const std::string &scene_path, const std::string &bake_path,
              const std::string &spec_path, double epsilon) {
    const SceneDescription scene = load_scene(scene_path);
    std::ifstream spec_in(spec_path);
    if (!spec_in) {
        throw SceneError("cannot open sweep spec: " + spec_path);
    }
    json spec;
    spec_in >> spec;

    const auto &jsrc = spec.at("source");
    const Vec3 source{jsrc.at(0).get<double>(), jsrc.at(1).get<double>(), jsrc.at(2).get<double>()};
    std::vector<Vec3> path;
    for (const auto &jp : spec.at("listener_path")) {
        path.push_back({jp.at(0).get<double>(), jp.at(1).get<double>(), jp.at(2).get<double>()});
    }
    const double step = spec.at("step").get<double>();
    if (step <= 0.0) {
        throw SceneError("sweep step must be > 0");
    }
    const std::string output = spec.at("output").get<std::string>();

    // resample the polyline at the given step
    std::vector<Vec3> samples;
    if (path.size() == 1) {
        samples = path;
    } else {
        for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
            const Vec3 a = path[seg], b = path[seg + 1];
            const double len = distance(a, b);
            const int n = std::max(1, int(std::floor(len / step)));
            for (int i = (seg == 0 ? 0 : 1); i <= n; ++i) {
                samples.push_back(a + (b - a) * (double(i) / n));
            }
        }
    }

    SearchConfig cfg;
    cfg.epsilon = epsilon;
    Engine engine(scene, load_dataset(bake_path), cfg);
    for (const Vec3 &p : samples) {
        if (!engine.dataset().in_bounds(p)) {
            throw SceneError("listener path leaves the scene bounds");
        }
    }
    if (!engine.dataset().in_bounds(source)) {
        throw SceneError("source outside the scene bounds");
    }

    struct Schedule {
        int portal;
        double from, to;
    };
    std::vector<Schedule> schedules;
    if (spec.contains("alpha")) {
        for (const auto &ja : spec.at("alpha")) {
            Schedule s{};
            s.portal = ja.at("portal").get<int>();
            if (ja.contains("value")) {
                s.from = s.to = ja.at("value").get<double>();
            } else {
                s.from = ja.at("from").get<double>();
                s.to = ja.at("to").get<double>();
            }
            schedules.push_back(s);
        }
    }

    std::ofstream csv(output);
    if (!csv) {
        throw SceneError("cannot write sweep output: " + output);
    }
    csv << "x,y,z,alpha,K,kappa,dist_m,dry_db,wet_db,distance_diff_m\n";
    const std::size_t total = samples.size();
    for (std::size_t i = 0; i < total; ++i) {
        const double t = total > 1 ? double(i) / double(total - 1) : 0.0;
        for (const Schedule &s : schedules) {
            engine.set_portal_open_fraction(s.portal, s.from + (s.to - s.from) * t);
        }
        const QueryResult q = engine.query(source, samples[i]);
        char line[256];
        std::snprintf(line, sizeof line, "%.3f,%.3f,%.3f,%.4f,%s,%d,%.3f,%.2f,%.2f,",
                      samples[i].x, samples[i].y, samples[i].z, q.net_open_fraction,
                      ids_to_string(q.search.portal_ids()).c_str(), q.search.last_portal_id,
                      q.debug.dist_m, q.debug.dry_db, q.debug.wet_db);
        csv << line;
        if (!std::isnan(q.debug.distance_diff_m)) {
            char dd[32];
            std::snprintf(dd, sizeof dd, "%.3f", q.debug.distance_diff_m);
            csv << dd;
        }
        csv << "\n";
    }
    std::printf("wrote %zu rows to %s\n", total, output.c_str());

    if (spec.contains("maps") && !samples.empty()) {
        const BakedDataset &ds = engine.dataset();
        // field maps for the probe nearest the first listener position
        int probe = 0;
        double best = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < ds.probes.probes.size(); ++i) {
            const double d = distance(ds.probes.probes[i].position, samples.front());
            if (d < best) {
                best = d;
                probe = int(i);
            }
        }
        const ParameterField &field = ds.fields[std::size_t(probe)];
        const int w = ds.emitters.dims[0], h = ds.emitters.dims[1];
        std::vector<double> tau(std::size_t(w) * h, 0.0), loud(std::size_t(w) * h, 0.0);
        std::vector<std::uint8_t> valid(std::size_t(w) * h, 0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t cell = ds.emitters.index(x, y, 0);
                const std::size_t px = std::size_t(y) * w + x;
                valid[px] = field.valid[cell];
                tau[px] = field.tau0_q[cell] * ds.config.delay_quantum;
                loud[px] = field.loudness_cdb[cell] * 0.01;
            }
        }
        const auto &maps = spec.at("maps");
        if (maps.contains("tau0")) {
            write_pgm(maps.at("tau0").get<std::string>(), w, h, tau, valid);
            std::printf("wrote %s\n", maps.at("tau0").get<std::string>().c_str());
        }
        if (maps.contains("loudness")) {
            write_pgm(maps.at("loudness").get<std::string>(), w, h, loud, valid);
            std::printf("wrote %s\n", maps.at("loudness").get<std::string>().c_str());
        }
    }
    return kExitOk;
}

int cmd_verify(const std::string &scene_path, const std::string &bake_path, int pairs,
               unsigned seed, double epsilon, double min_agreement, bool as_json) {
    const SceneDescription scene = load_scene(scene_path);
    const BakedDataset ds = load_dataset(bake_path);
    if (scene_content_hash(scene) != ds.scene_hash) {
        throw SceneError("bake file does not match the scene");
    }
    SearchConfig cfg;
    cfg.epsilon = epsilon;
    const double allowance = ds.config.c * cfg.epsilon;
    const double diag = scene.grid.cell_diagonal();
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> dx(0, scene.grid.dims[0] - 1);
    std::uniform_int_distribution<int> dy(0, scene.grid.dims[1] - 1);
    std::uniform_int_distribution<int> dz(0, scene.grid.dims[2] - 1);
    int done = 0, agree = 0, boundary = 0, hard = 0;
    while (done < pairs) {
        const int ax = dx(rng), ay = dy(rng), az = dz(rng);
        const int bx = dx(rng), by = dy(rng), bz = dz(rng);
        if (!scene.grid.open_at(ax, ay, az) || !scene.grid.open_at(bx, by, bz)) {
            continue;
        }
        const Vec3 a = scene.grid.cell_center(ax, ay, az);
        const Vec3 b = scene.grid.cell_center(bx, by, bz);
        const auto path = oracle::shortest_path(scene, a, b);
        const SearchResult r = find_portals(ds, scene, a, b, cfg);
        ++done;
        if (!path.has_value()) {
            // reachability must agree; a disconnected pair the search finds
            // a path for (or vice versa) is a hard failure
            if (!r.no_path) {
                ++hard;
            } else {
                ++agree;
            }
            continue;
        }
        const auto report = oracle::compare(r, *path, allowance, diag);
        if (report.agree) {
            ++agree;
        } else {
            boundary += report.boundary_count;
            hard += report.hard_count;
        }
    }
    const double rate = double(agree) / double(pairs);
    const bool ok = rate >= min_agreement && hard == 0;
    if (as_json) {
        json j;
        j["pairs"] = pairs;
        j["agreement"] = rate;
        j["boundary_disagreements"] = boundary;
        j["hard_failures"] = hard;
        j["seed"] = seed;
        j["pass"] = ok;
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%d pairs, agreement %.1f%%, %d boundary disagreements, %d hard failures\n",
                    pairs, 100.0 * rate, boundary, hard);
        std::printf("%s (threshold %.0f%%, zero hard failures required)\n",
                    ok ? "VERIFIED" : "VERIFICATION FAILED", 100.0 * min_agreement);
    }
    return ok ? kExitOk : kExitVerification;
}

int cmd_bench(const std::vector<int> &portal_counts, int queries, unsigned seed) {
    std::mt19937 rng(seed);
    std::printf("%8s %12s %12s %12s %12s %10s\n", "portals", "lookups/q", "full-evals/q",
                "search-us", "oracle-us", "speedup");
    for (int n : portal_counts) {
        const scenegen::BenchScene bench = scenegen::bench_scene(n);
        const SceneDescription &scene = bench.scene;
        const BakedDataset ds = bake_all(scene);
        std::uniform_int_distribution<int> rx(0, std::max(0, bench.rooms_x - 3));
        std::uniform_int_distribution<int> ry(0, std::max(0, bench.rooms_y - 2));
        long lookups = 0, fulls = 0;
        double search_ns = 0.0, oracle_ns = 0.0;
        for (int q = 0; q < queries; ++q) {
            const int r0x = rx(rng), r0y = ry(rng);
            const Vec3 a{r0x * 3.0 + 1.25, r0y * 3.0 + 1.25, 0.25};
            const Vec3 b{std::min(r0x + 2, bench.rooms_x - 1) * 3.0 + 1.75,
                         std::min(r0y + 1, bench.rooms_y - 1) * 3.0 + 1.75, 0.25};
            const auto t0 = Clock::now();
            const SearchResult r = find_portals(ds, scene, a, b);
            const auto t1 = Clock::now();
            const auto path = oracle::shortest_path(scene, a, b);
            const auto t2 = Clock::now();
            (void)path;
            search_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();
            oracle_ns += std::chrono::duration<double, std::nano>(t2 - t1).count();
            lookups += r.stats.acoustic_lookups;
            fulls += r.stats.full_evaluations();
        }
        std::printf("%8d %12.1f %12.1f %12.0f %12.0f %9.1fx\n", n, double(lookups) / queries,
                    double(fulls) / queries, search_ns / queries / 1e3, oracle_ns / queries / 1e3,
                    oracle_ns / std::max(1.0, search_ns));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"precomputed portal-aware sound propagation"};
    app.require_subcommand(1);

    std::string scene_path, bake_path, out_path, source_text, listener_text, spec_path;
    std::vector<std::string> alphas;
    double delay_quantum = 0.002, c = 340.0, epsilon = 0.010;
    double diffraction_loss = 6.0, reverb_decay = 0.5, reverb_gain = 10.0;
    bool as_json = false;
    int pairs = 500, queries = 40;
    unsigned seed = 1;
    double min_agreement = 0.95;
    std::vector<int> portal_counts = {16, 64, 256};

    auto *bake = app.add_subcommand("bake", "precompute parameter fields for a scene");
    bake->add_option("--scene", scene_path, "scene JSON")->required();
    bake->add_option("--out", out_path, "output bake file")->required();
    bake->add_option("--delay-quantum", delay_quantum, "delay quantum, s");
    bake->add_option("--c", c, "speed of sound, m/s");
    bake->add_option("--diffraction-loss", diffraction_loss, "dB per diffraction event");
    bake->add_option("--reverb-decay", reverb_decay, "reflected dB lost per meter");
    bake->add_option("--reverb-gain", reverb_gain, "reflected energy gain, dB");

    auto *query = app.add_subcommand("query", "single source/listener query");
    query->add_option("--scene", scene_path, "scene JSON")->required();
    query->add_option("--bake", bake_path, "bake file")->required();
    query->add_option("--source", source_text, "source position x,y,z")->required();
    query->add_option("--listener", listener_text, "listener position x,y,z")->required();
    query->add_option("--alpha", alphas, "portal open fraction, portal=value (repeatable)");
    query->add_option("--epsilon", epsilon, "delay tolerance, s");
    query->add_flag("--json", as_json, "JSON output");

    auto *sweep = app.add_subcommand("sweep", "listener trajectory sweep to CSV");
    sweep->add_option("--scene", scene_path, "scene JSON")->required();
    sweep->add_option("--bake", bake_path, "bake file")->required();
    sweep->add_option("--spec", spec_path, "sweep spec JSON")->required();
    sweep->add_option("--epsilon", epsilon, "delay tolerance, s");

    auto *verify = app.add_subcommand("verify", "compare portal search against the grid oracle");
    verify->add_option("--scene", scene_path, "scene JSON")->required();
    verify->add_option("--bake", bake_path, "bake file")->required();
    verify->add_option("--pairs", pairs, "random source/listener pairs");
    verify->add_option("--seed", seed, "RNG seed");
    verify->add_option("--epsilon", epsilon, "delay tolerance, s");
    verify->add_option("--min-agreement", min_agreement, "required agreement fraction");
    verify->add_flag("--json", as_json, "JSON output");

    auto *bench = app.add_subcommand("bench", "synthetic-scene scaling benchmark");
    bench->add_option("--portals", portal_counts, "portal counts to benchmark");
    bench->add_option("--queries", queries, "queries per scene");
    bench->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (bake->parsed()) {
            return cmd_bake(scene_path, out_path, delay_quantum, c, diffraction_loss,
                            reverb_decay, reverb_gain);
        }
        if (query->parsed()) {
            return cmd_query(scene_path, bake_path, source_text, listener_text, alphas, epsilon,
                             as_json);
        }
        if (sweep->parsed()) {
            return cmd_sweep(scene_path, bake_path, spec_path, epsilon);
        }
        if (verify->parsed()) {
            return cmd_verify(scene_path, bake_path, pairs, seed, epsilon, min_agreement,
                              as_json);
        }
        if (bench->parsed()) {
            return cmd_bench(portal_counts, queries, seed);
        }
    } catch (const CLI::ValidationError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
