#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "ssdm/toy_denoiser.hpp"

namespace ssdm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace detail {

inline void ck_write(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void ck_read(std::istream& is, void* p, size_t n, const std::string& what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    require(static_cast<size_t>(is.gcount()) == n, Errc::denoiser_load,
            "checkpoint truncated while reading " + what);
}

inline void ck_write_u32(std::ostream& os, uint32_t v) { ck_write(os, &v, 4); }
inline void ck_write_u64(std::ostream& os, uint64_t v) { ck_write(os, &v, 8); }
inline void ck_write_f64(std::ostream& os, double v) { ck_write(os, &v, 8); }

inline uint32_t ck_read_u32(std::istream& is, const std::string& what) {
    uint32_t v;
    ck_read(is, &v, 4, what);
    return v;
}
inline uint64_t ck_read_u64(std::istream& is, const std::string& what) {
    uint64_t v;
    ck_read(is, &v, 8, what);
    return v;
}

}  // namespace detail

// Binary snapshot of a trained network: magic "SSDM1", seven u32 shape
// fields (dim, max window, conditions, time embed, cond embed, width, hidden
// layers), per-coordinate mean then std as f64, a u64 parameter count, and
// the flat parameter vector as f64. Everything little-endian.
inline void save_checkpoint(const ToyDenoiser& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io, "cannot open checkpoint for writing: " + path);
    detail::ck_write(os, "SSDM1", 5);
    const auto& c = net.config();
    for (int v : {c.dim, c.max_window, c.conditions, c.time_embed, c.cond_embed, c.width,
                  c.hidden_layers})
        detail::ck_write_u32(os, static_cast<uint32_t>(v));
    const FeatureStats st = net.stats();
    for (int i = 0; i < c.dim; ++i) detail::ck_write_f64(os, st.mean[i]);
    for (int i = 0; i < c.dim; ++i) detail::ck_write_f64(os, st.std[i]);
    detail::ck_write_u64(os, static_cast<uint64_t>(net.parameter_count()));
    detail::ck_write(os, net.params().data(),
                     static_cast<size_t>(net.parameter_count()) * sizeof(double));
    require(os.good(), Errc::io, "write failed for checkpoint: " + path);
}

inline ToyDenoiser load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::denoiser_load, "cannot open checkpoint: " + path);
    char magic[5];
    detail::ck_read(is, magic, 5, "magic");
    require(std::memcmp(magic, "SSDM1", 5) == 0, Errc::denoiser_load,
            "bad checkpoint magic in " + path);

    ToyDenoiserConfig cfg;
    cfg.dim = static_cast<int>(detail::ck_read_u32(is, "dim"));
    cfg.max_window = static_cast<int>(detail::ck_read_u32(is, "max window"));
    cfg.conditions = static_cast<int>(detail::ck_read_u32(is, "conditions"));
    cfg.time_embed = static_cast<int>(detail::ck_read_u32(is, "time embed"));
    cfg.cond_embed = static_cast<int>(detail::ck_read_u32(is, "cond embed"));
    cfg.width = static_cast<int>(detail::ck_read_u32(is, "width"));
    cfg.hidden_layers = static_cast<int>(detail::ck_read_u32(is, "hidden layers"));
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(Errc::denoiser_load,
                    "invalid checkpoint header in " + path + ": " + e.what());
    }

    ToyDenoiser net(cfg);
    FeatureStats st;
    st.mean.resize(cfg.dim);
    st.std.resize(cfg.dim);
    detail::ck_read(is, st.mean.data(), static_cast<size_t>(cfg.dim) * 8, "feature means");
    detail::ck_read(is, st.std.data(), static_cast<size_t>(cfg.dim) * 8, "feature stds");
    for (int i = 0; i < cfg.dim; ++i)
        require(std::isfinite(st.mean[i]) && std::isfinite(st.std[i]) && st.std[i] > 0.0,
                Errc::denoiser_load, "invalid feature stats in " + path);
    net.set_stats(std::move(st));

    const uint64_t count = detail::ck_read_u64(is, "parameter count");
    require(count == static_cast<uint64_t>(net.parameter_count()), Errc::denoiser_load,
            strfmt("checkpoint parameter count %llu does not match architecture (%lld)",
                   static_cast<unsigned long long>(count),
                   static_cast<long long>(net.parameter_count())));
    detail::ck_read(is, net.params().data(), static_cast<size_t>(count) * 8, "parameters");
    is.peek();
    require(is.eof(), Errc::denoiser_load, "trailing bytes in checkpoint: " + path);
    return net;
}

}  // namespace ssdm
