#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "portalwave/bake.hpp"

namespace portalwave {

class BakeFileError : public std::runtime_error {
public:
    explicit BakeFileError(const std::string &msg) : std::runtime_error(msg) {}
};

namespace detail {

// Explicit little-endian field streams keep bake files byte-identical across
// hosts.
class LeWriter {
public:
    explicit LeWriter(std::ostream &out) : out_(out) {}

    void bytes(const void *data, std::size_t n) {
        out_.write(static_cast<const char *>(data), std::streamsize(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { put_uint(v, 2); }
    void u32(std::uint32_t v) { put_uint(v, 4); }
    void i16(std::int16_t v) { put_uint(static_cast<std::uint16_t>(v), 2); }
    void i32(std::int32_t v) { put_uint(static_cast<std::uint32_t>(v), 4); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        put_uint(bits, 4);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_uint(bits, 8);
    }

private:
    template <typename T> void put_uint(T v, int n) {
        std::uint8_t b[8];
        for (int i = 0; i < n; ++i) {
            b[i] = static_cast<std::uint8_t>(std::uint64_t(v) >> (8 * i));
        }
        bytes(b, std::size_t(n));
    }
    std::ostream &out_;
};

class LeReader {
public:
    explicit LeReader(std::istream &in) : in_(in) {}

    void bytes(void *data, std::size_t n) {
        in_.read(static_cast<char *>(data), std::streamsize(n));
        if (!in_) {
            throw BakeFileError("unexpected end of bake file");
        }
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get_uint(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get_uint(4)); }
    std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = get_uint(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

private:
    std::uint64_t get_uint(int n) {
        std::uint8_t b[8];
        bytes(b, std::size_t(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= std::uint64_t(b[i]) << (8 * i);
        }
        return v;
    }
    std::istream &in_;
};

} // namespace detail

inline constexpr char kBakeMagic[4] = {'P', 'W', 'B', '1'};
inline constexpr std::uint32_t kBakeVersion = 1;

inline void save_dataset(const BakedDataset &ds, std::ostream &out) {
    detail::LeWriter w(out);
    w.bytes(kBakeMagic, 4);
    w.u32(kBakeVersion);
    w.bytes(ds.scene_hash.data(), ds.scene_hash.size());

    w.f64(ds.config.c);
    w.f64(ds.config.delay_quantum);
    w.f64(ds.config.loudness_quantum);
    w.f64(ds.config.initial_window);
    w.f64(ds.config.reflections_window);
    w.f64(ds.config.diffraction_loss_per_event);
    w.f64(ds.config.reverb_decay);
    w.f64(ds.config.reverb_gain_db);

    w.f64(ds.grid_origin.x);
    w.f64(ds.grid_origin.y);
    w.f64(ds.grid_origin.z);
    w.f64(ds.grid_cell_size);
    for (int a = 0; a < 3; ++a) {
        w.u32(static_cast<std::uint32_t>(ds.grid_dims[a]));
    }
    w.f64(ds.probe_spacing);
    for (int a = 0; a < 3; ++a) {
        w.u32(static_cast<std::uint32_t>(ds.emitters.stride[a]));
    }
    for (int a = 0; a < 3; ++a) {
        w.u32(static_cast<std::uint32_t>(ds.emitters.dims[a]));
    }

    w.u32(static_cast<std::uint32_t>(ds.probes.probes.size()));
    for (const Probe &p : ds.probes.probes) {
        w.f64(p.position.x);
        w.f64(p.position.y);
        w.f64(p.position.z);
        w.i32(p.portal_id);
    }

    const std::size_t n = ds.emitters.cell_count();
    for (const ParameterField &f : ds.fields) {
        std::vector<std::uint8_t> bitmap((n + 7) / 8, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (f.valid[i]) {
                bitmap[i / 8] |= std::uint8_t(1u << (i % 8));
            }
        }
        w.bytes(bitmap.data(), bitmap.size());
        for (std::size_t i = 0; i < n; ++i) {
            w.u16(f.tau0_q[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            w.i16(f.loudness_cdb[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < 6; ++j) {
                w.i16(f.reflections_cdb[i][j]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) {
                w.f32(f.dir_out[i][a]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) {
                w.f32(f.dir_in[i][a]);
            }
        }
    }
}

inline void save_dataset(const BakedDataset &ds, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw BakeFileError("cannot write bake file: " + path);
    }
    save_dataset(ds, out);
    if (!out) {
        throw BakeFileError("write failed: " + path);
    }
}

inline BakedDataset load_dataset(std::istream &in) {
    detail::LeReader r(in);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kBakeMagic, 4) != 0) {
        throw BakeFileError("not a bake file (bad magic)");
    }
    const std::uint32_t version = r.u32();
    if (version != kBakeVersion) {
        throw BakeFileError("unsupported bake file version " + std::to_string(version));
    }
    BakedDataset ds;
    r.bytes(ds.scene_hash.data(), ds.scene_hash.size());

    ds.config.c = r.f64();
    ds.config.delay_quantum = r.f64();
    ds.config.loudness_quantum = r.f64();
    ds.config.initial_window = r.f64();
    ds.config.reflections_window = r.f64();
    ds.config.diffraction_loss_per_event = r.f64();
    ds.config.reverb_decay = r.f64();
    ds.config.reverb_gain_db = r.f64();

    ds.grid_origin = {r.f64(), r.f64(), r.f64()};
    ds.grid_cell_size = r.f64();
    for (int a = 0; a < 3; ++a) {
        ds.grid_dims[a] = static_cast<int>(r.u32());
    }
    ds.probe_spacing = r.f64();
    ds.emitters.origin = ds.grid_origin;
    ds.emitters.cell_size = ds.grid_cell_size;
    ds.emitters.fine_dims = ds.grid_dims;
    for (int a = 0; a < 3; ++a) {
        ds.emitters.stride[a] = static_cast<int>(r.u32());
    }
    for (int a = 0; a < 3; ++a) {
        ds.emitters.dims[a] = static_cast<int>(r.u32());
        if (ds.emitters.dims[a] < 1) {
            throw BakeFileError("corrupt emitter layout");
        }
    }

    const std::uint32_t probe_count = r.u32();
    ds.probes.probes.resize(probe_count);
    for (auto &p : ds.probes.probes) {
        p.position = {r.f64(), r.f64(), r.f64()};
        p.portal_id = r.i32();
    }
    for (std::size_t i = 0; i < ds.probes.probes.size(); ++i) {
        if (ds.probes.probes[i].portal_id > 0) {
            ds.probes.portal_probe_index[ds.probes.probes[i].portal_id] = static_cast<int>(i);
        }
    }

    const std::size_t n = ds.emitters.cell_count();
    ds.fields.resize(probe_count);
    for (std::size_t pi = 0; pi < probe_count; ++pi) {
        ParameterField &f = ds.fields[pi];
        f.probe_index = static_cast<int>(pi);
        f.resize(n);
        std::vector<std::uint8_t> bitmap((n + 7) / 8, 0);
        r.bytes(bitmap.data(), bitmap.size());
        for (std::size_t i = 0; i < n; ++i) {
            f.valid[i] = (bitmap[i / 8] >> (i % 8)) & 1u;
        }
        for (std::size_t i = 0; i < n; ++i) {
            f.tau0_q[i] = r.u16();
        }
        for (std::size_t i = 0; i < n; ++i) {
            f.loudness_cdb[i] = r.i16();
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int j = 0; j < 6; ++j) {
                f.reflections_cdb[i][j] = r.i16();
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) {
                f.dir_out[i][a] = r.f32();
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) {
                f.dir_in[i][a] = r.f32();
            }
        }
    }
    ds.rebuild_probe_index();
    return ds;
}

inline BakedDataset load_dataset(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw BakeFileError("cannot open bake file: " + path);
    }
    return load_dataset(in);
}

} // namespace portalwave
