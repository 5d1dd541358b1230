#pragma once
// On-disk formats.
//
//  * density CSV: header "q,p,value", one row per cell, row-major in q,
//    %.17g (lossless round-trip through text);
//  * density binary (.vfpd): magic "VFPD", version byte 1, four little-
//    endian float64 bounds (q_min,q_max,p_min,p_max), two uint32 sizes
//    (n_q,n_p), then n_q*n_p float64 cell values -- byte-exact round-trip;
//  * ensemble binary (.vfpe): magic "VFPE", version byte 1, uint64 N,
//    float64 t, uint64 seed, N float64 positions, N float64 momenta.
//    The integrator's step counter is not part of the format; a loaded
//    ensemble restarts its noise stream, so treat resumed runs as new
//    realizations.
//  * run series / particle series / phase scan CSVs with fixed headers.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfp/grid.hpp"
#include "vfp/particles.hpp"
#include "vfp/pde.hpp"
#include "vfp/stationary.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace vfp {

namespace detail {

class File {
public:
    File(const std::string& path, const char* mode) : f_(std::fopen(path.c_str(), mode)) {
        if (f_ == nullptr) throw std::runtime_error("cannot open " + path);
        path_ = path;
    }
    ~File() {
        if (f_ != nullptr) std::fclose(f_);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;

    void write(const void* data, std::size_t bytes) {
        if (std::fwrite(data, 1, bytes, f_) != bytes)
            throw std::runtime_error("short write to " + path_);
    }
    void read(void* data, std::size_t bytes) {
        if (std::fread(data, 1, bytes, f_) != bytes)
            throw std::runtime_error("truncated read from " + path_);
    }
    void puts(const char* s) {
        if (std::fputs(s, f_) < 0) throw std::runtime_error("short write to " + path_);
    }
    std::FILE* get() { return f_; }

private:
    std::FILE* f_;
    std::string path_;
};

inline void put_double(File& f, double x) { f.write(&x, sizeof x); }
inline void put_u32(File& f, std::uint32_t x) { f.write(&x, sizeof x); }
inline void put_u64(File& f, std::uint64_t x) { f.write(&x, sizeof x); }
inline double get_double(File& f) {
    double x;
    f.read(&x, sizeof x);
    return x;
}
inline std::uint32_t get_u32(File& f) {
    std::uint32_t x;
    f.read(&x, sizeof x);
    return x;
}
inline std::uint64_t get_u64(File& f) {
    std::uint64_t x;
    f.read(&x, sizeof x);
    return x;
}

inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

inline void write_density_csv(const std::string& path, const PhaseDensity& rho) {
    detail::File f(path, "w");
    f.puts("q,p,value\n");
    const PhaseGrid& g = rho.grid();
    std::string line;
    for (std::size_t i = 0; i < g.n_q(); ++i)
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            line = detail::num(g.q_center(i));
            line += ',';
            line += detail::num(g.p_center(j));
            line += ',';
            line += detail::num(rho.at(i, j));
            line += '\n';
            f.puts(line.c_str());
        }
}

inline void write_density_binary(const std::string& path, const PhaseDensity& rho) {
    detail::File f(path, "wb");
    f.write("VFPD", 4);
    const std::uint8_t version = 1;
    f.write(&version, 1);
    const PhaseGrid& g = rho.grid();
    detail::put_double(f, g.q_min());
    detail::put_double(f, g.q_max());
    detail::put_double(f, g.p_min());
    detail::put_double(f, g.p_max());
    detail::put_u32(f, static_cast<std::uint32_t>(g.n_q()));
    detail::put_u32(f, static_cast<std::uint32_t>(g.n_p()));
    f.write(rho.values().data(), rho.values().size() * sizeof(double));
}

inline PhaseDensity read_density_binary(const std::string& path) {
    detail::File f(path, "rb");
    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, "VFPD", 4) != 0)
        throw std::runtime_error(path + ": not a density file (bad magic)");
    std::uint8_t version;
    f.read(&version, 1);
    if (version != 1)
        throw std::runtime_error(path + ": unsupported density format version " +
                                 std::to_string(version));
    const double q_min = detail::get_double(f);
    const double q_max = detail::get_double(f);
    const double p_min = detail::get_double(f);
    const double p_max = detail::get_double(f);
    const std::uint32_t n_q = detail::get_u32(f);
    const std::uint32_t n_p = detail::get_u32(f);
    PhaseGrid grid(q_min, q_max, p_min, p_max, n_q, n_p);
    std::vector<double> values(grid.size());
    f.read(values.data(), values.size() * sizeof(double));
    return PhaseDensity(std::move(grid), std::move(values));
}

inline void write_ensemble_binary(const std::string& path, const ParticleEnsemble& e) {
    detail::File f(path, "wb");
    f.write("VFPE", 4);
    const std::uint8_t version = 1;
    f.write(&version, 1);
    detail::put_u64(f, e.size());
    detail::put_double(f, e.t);
    detail::put_u64(f, e.seed);
    f.write(e.q.data(), e.q.size() * sizeof(double));
    f.write(e.p.data(), e.p.size() * sizeof(double));
}

inline ParticleEnsemble read_ensemble_binary(const std::string& path) {
    detail::File f(path, "rb");
    char magic[4];
    f.read(magic, 4);
    if (std::memcmp(magic, "VFPE", 4) != 0)
        throw std::runtime_error(path + ": not an ensemble file (bad magic)");
    std::uint8_t version;
    f.read(&version, 1);
    if (version != 1)
        throw std::runtime_error(path + ": unsupported ensemble format version " +
                                 std::to_string(version));
    ParticleEnsemble e;
    const std::uint64_t n = detail::get_u64(f);
    e.t = detail::get_double(f);
    e.seed = detail::get_u64(f);
    e.q.resize(n);
    e.p.resize(n);
    f.read(e.q.data(), n * sizeof(double));
    f.read(e.p.data(), n * sizeof(double));
    return e;
}

/// Diagnostics series of a grid run.
inline void write_frames_csv(const std::string& path, const std::vector<Frame>& frames) {
    detail::File f(path, "w");
    f.puts("t,free_energy,kinetic,confinement,interaction,entropy,dissipation,mass,M1,M2,"
           "boundary_mass\n");
    std::string line;
    for (const Frame& fr : frames) {
        line = detail::num(fr.t);
        for (double x : {fr.energy.free_energy, fr.energy.kinetic, fr.energy.confinement,
                         fr.energy.interaction, fr.energy.entropy, fr.dissipation,
                         fr.moments.mass, fr.moments.m1_q, fr.moments.m2_q,
                         fr.moments.boundary_mass}) {
            line += ',';
            line += detail::num(x);
        }
        line += '\n';
        f.puts(line.c_str());
    }
}

/// One recorded observation of a particle run.
struct ParticleFrame {
    double t = 0.0;
    ParticleStats stats;
    double kde_entropy = 0.0;
    bool has_kde = false;
};

inline void write_particle_frames_csv(const std::string& path,
                                      const std::vector<ParticleFrame>& frames) {
    detail::File f(path, "w");
    bool any_kde = false;
    for (const auto& fr : frames) any_kde = any_kde || fr.has_kde;
    f.puts(any_kde ? "t,M1_q,M2_q,M1_p,M2_p,kde_entropy\n" : "t,M1_q,M2_q,M1_p,M2_p\n");
    std::string line;
    for (const auto& fr : frames) {
        line = detail::num(fr.t);
        for (double x : {fr.stats.m1_q, fr.stats.m2_q, fr.stats.m1_p, fr.stats.m2_p}) {
            line += ',';
            line += detail::num(x);
        }
        if (any_kde) {
            line += ',';
            line += fr.has_kde ? detail::num(fr.kde_entropy) : "";
        }
        line += '\n';
        f.puts(line.c_str());
    }
}

/// Every temperature probed by a phase scan with its branch means.
inline void write_phase_scan_csv(const std::string& path, const PhaseScanResult& scan) {
    detail::File f(path, "w");
    f.puts("lambda,branch_count,m_roots\n");
    std::string line;
    for (const auto& pt : scan.points) {
        line = detail::num(pt.lambda);
        line += ',';
        line += std::to_string(pt.roots.size());
        line += ',';
        for (std::size_t k = 0; k < pt.roots.size(); ++k) {
            if (k > 0) line += ';';
            line += detail::num(pt.roots[k]);
        }
        line += '\n';
        f.puts(line.c_str());
    }
}

}  // namespace vfp
