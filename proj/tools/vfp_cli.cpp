// Command-line front end: model checking, grid and particle simulation,
// stationary states, and phase scans, driven by one INI-style config file.
//
// Exit codes:
//   0  success
//   1  configuration / usage / IO error
//   2  model assumptions violated (or model not constructible)
//   3  transport CFL violated (the message reports the admissible dt)
//   4  numerical blow-up (state lost finiteness)
//   5  iteration failed to converge
//
// Primary outputs (CSV / binary artifacts) are byte-identical across reruns
// with the same config, seed, and version; provenance.json additionally
// records wall time and is exempt from that guarantee.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vfp/config.hpp"
#include "vfp/diagnostics.hpp"
#include "vfp/errors.hpp"
#include "vfp/grid.hpp"
#include "vfp/model.hpp"
#include "vfp/parallel.hpp"
#include "vfp/particles.hpp"
#include "vfp/pde.hpp"
#include "vfp/serialize.hpp"
#include "vfp/stationary.hpp"
#include "vfp/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAssumptions = 2;
constexpr int kExitCfl = 3;
constexpr int kExitBlowup = 4;
constexpr int kExitNoConvergence = 5;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;  // --out overrides env overrides [output].dir
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seed) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides VFP_OUTPUT_DIR)");
    cmd->add_option("--threads", args.threads, "worker threads (results are identical)");
    if (with_seed) cmd->add_option("--seed", args.seed, "override [particles].seed");
}

std::string resolve_out_dir(const CommonArgs& args, const vfp::RunConfig& cfg) {
    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("VFP_OUTPUT_DIR"); env != nullptr && *env != '\0')
        dir = env;
    if (!args.out_dir.empty()) dir = args.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw vfp::ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_provenance(const std::string& dir, const std::string& command,
                      const std::string& config_text, const CommonArgs& args,
                      std::uint64_t seed_used, double wall_seconds) {
    nlohmann::json j;
    j["command"] = command;
    j["version"] = vfp::kVersion;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    j["config_fnv1a64"] = hash;
    j["threads"] = args.threads;
    j["seed"] = seed_used;
    j["wall_seconds"] = wall_seconds;
    std::ofstream out(dir + "/provenance.json");
    out << j.dump(2) << '\n';
}

vfp::ConfiningPotential make_v(const vfp::RunConfig& cfg) {
    return vfp::ConfiningPotential(cfg.model.v_coeffs);
}

vfp::InteractionPotential make_g(const vfp::RunConfig& cfg) {
    if (cfg.model.g_coeffs.empty()) return vfp::InteractionPotential{};
    return vfp::InteractionPotential(cfg.model.g_coeffs);
}

vfp::PhaseGrid make_grid(const vfp::RunConfig& cfg) {
    return {cfg.grid.q_min, cfg.grid.q_max, cfg.grid.p_min,
            cfg.grid.p_max, cfg.grid.n_q,  cfg.grid.n_p};
}

vfp::PhaseDensity initial_density(const vfp::RunConfig& cfg, const vfp::InitConfig& init) {
    if (init.kind == vfp::InitConfig::Kind::density_file)
        return vfp::read_density_binary(init.file);
    const double cq = init.mean_q, sq = init.sd_q;
    const double cp = init.mean_p, sp = init.sd_p;
    return vfp::density_from_function(make_grid(cfg), [=](double q, double p) {
        const double xq = (q - cq) / sq, xp = (p - cp) / sp;
        return std::exp(-0.5 * (xq * xq + xp * xp));
    });
}

// ---------------------------------------------------------------------------

int cmd_check(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    vfp::AssumptionReport report;
    try {
        const auto v = make_v(cfg);
        const auto g = make_g(cfg);
        std::optional<vfp::PhaseDensity> rho0;
        if (cfg.pde) rho0 = initial_density(cfg, cfg.pde->init);
        report = vfp::check_assumptions(v, g, rho0 ? &*rho0 : nullptr);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "model not constructible: %s\n", e.what());
        return kExitAssumptions;
    }

    const std::string text_report = report.to_text();
    std::fputs(text_report.c_str(), stdout);
    std::ofstream(dir + "/assumptions.txt") << text_report;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "check", text, args, 0, wall);
    return report.model_ok() ? kExitOk : kExitAssumptions;
}

int cmd_simulate_pde(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    if (!cfg.pde) throw vfp::ConfigError("simulate-pde needs a [pde] section");
    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const auto v = make_v(cfg);
    const auto g = make_g(cfg);
    vfp::PhaseDensity rho0 = initial_density(cfg, cfg.pde->init);

    vfp::SolverConfig sc;
    sc.lambda = cfg.model.lambda;
    sc.dt = cfg.pde->dt;
    sc.record_stride = cfg.pde->stride;
    sc.transport = cfg.pde->muscl ? vfp::TransportScheme::muscl2 : vfp::TransportScheme::upwind1;

    const vfp::ThreadPool pool(args.threads);
    const auto result = vfp::run(std::move(rho0), v, g, sc, cfg.pde->t_end,
                                 [](const vfp::Frame& f) {
                                     std::printf("t=%-10.4f  free_energy=%.10f  dissipation=%.3e\n",
                                                 f.t, f.energy.free_energy, f.dissipation);
                                     std::fflush(stdout);
                                 },
                                 &pool);

    vfp::write_frames_csv(dir + "/diagnostics.csv", result.series);
    vfp::write_density_binary(dir + "/final_density.vfpd", result.final);
    vfp::write_density_csv(dir + "/final_density.csv", result.final);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "simulate-pde", text, args, 0, wall);
    std::printf("done: %zu steps, artifacts in %s\n", result.steps, dir.c_str());
    return kExitOk;
}

int cmd_simulate_particles(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    if (!cfg.particles) throw vfp::ConfigError("simulate-particles needs a [particles] section");
    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const auto v = make_v(cfg);
    const auto g = make_g(cfg);
    const vfp::ParticlesConfig& pc = *cfg.particles;
    const std::uint64_t seed = args.seed.value_or(pc.seed);

    std::optional<vfp::PhaseDensity> source;
    vfp::InitialLaw law = vfp::GaussianLaw{pc.init.mean_q, pc.init.sd_q, pc.init.mean_p,
                                           pc.init.sd_p};
    if (pc.init.kind == vfp::InitConfig::Kind::two_point)
        law = vfp::TwoPointLaw{pc.init.q_a, pc.init.q_b, pc.init.p0, pc.init.weight_a};
    else if (pc.init.kind == vfp::InitConfig::Kind::density_file) {
        source = vfp::read_density_binary(pc.init.file);
        law = vfp::DensityLaw{&*source};
    }

    vfp::ParticleEnsemble ens = vfp::init_ensemble(pc.n, seed, law);
    const vfp::ThreadPool pool(args.threads);
    const auto n_steps = static_cast<std::size_t>(std::floor(pc.t_end / pc.dt + 1e-9));

    std::vector<vfp::ParticleFrame> frames;
    const auto record = [&](bool final_frame) {
        vfp::ParticleFrame f;
        f.t = ens.t;
        f.stats = vfp::ensemble_stats(ens);
        if (pc.kde && final_frame) {
            f.kde_entropy = vfp::kde_entropy(ens);
            f.has_kde = true;
        }
        frames.push_back(f);
    };

    record(n_steps == 0);
    for (std::size_t k = 1; k <= n_steps; ++k) {
        vfp::step_particles(ens, v, g, cfg.model.lambda, pc.dt, &pool);
        if (k % pc.stride == 0 || k == n_steps) record(k == n_steps);
    }

    vfp::write_particle_frames_csv(dir + "/particles.csv", frames);
    vfp::write_ensemble_binary(dir + "/final_ensemble.vfpe", ens);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "simulate-particles", text, args, seed, wall);
    std::printf("done: %zu particles, %zu steps, artifacts in %s\n", ens.size(), n_steps,
                dir.c_str());
    return kExitOk;
}

int cmd_stationary(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    if (!cfg.stationary) throw vfp::ConfigError("stationary needs a [stationary] section");
    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const auto v = make_v(cfg);
    const auto g = make_g(cfg);
    const vfp::StationaryConfig& sc = *cfg.stationary;
    vfp::PhaseDensity rho0 = initial_density(cfg, sc.init);

    const auto fp = vfp::fixed_point(std::move(rho0), v, g, cfg.model.lambda, sc.theta, sc.tol,
                                     sc.max_iter);
    vfp::write_density_binary(dir + "/stationary.vfpd", fp.density);
    vfp::write_density_csv(dir + "/stationary.csv", fp.density);

    nlohmann::json j;
    j["lambda"] = cfg.model.lambda;
    j["converged"] = fp.converged;
    j["iterations"] = fp.iterations;
    j["residual_l1"] = fp.residual;
    j["mean_q"] = fp.density.q_moments(1)[1];
    std::ofstream(dir + "/stationary.json") << j.dump(2) << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "stationary", text, args, 0, wall);
    std::printf("%s after %zu iterations, residual %.3e, mean %.8f\n",
                fp.converged ? "converged" : "NOT converged", fp.iterations, fp.residual,
                fp.density.q_moments(1)[1]);
    return fp.converged ? kExitOk : kExitNoConvergence;
}

int cmd_phase_scan(const CommonArgs& args) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    if (!cfg.stationary) throw vfp::ConfigError("phase-scan needs a [stationary] section");
    const vfp::StationaryConfig& sc = *cfg.stationary;
    if (!(sc.scan_lambda_lo > 0.0 && sc.scan_lambda_hi > sc.scan_lambda_lo))
        throw vfp::ConfigError(
            "phase-scan needs [stationary].scan_lambda_lo < scan_lambda_hi (both > 0)");
    const vfp::Polynomial gp = vfp::InteractionPotential(cfg.model.g_coeffs).poly();
    if (gp.degree() != 2 || !(gp.coeff(2) > 0.0) || gp.coeff(1) != 0.0)
        throw vfp::ConfigError(
            "phase-scan needs a quadratic interaction G = alpha q^2 / 2 (G = [c, 0, alpha/2])");
    const double alpha = 2.0 * gp.coeff(2);

    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const auto v = make_v(cfg);

    const auto scan = vfp::phase_scan(v, alpha, sc.scan_lambda_lo, sc.scan_lambda_hi,
                                      sc.scan_width_tol, sc.m_max, sc.root_tol, sc.half_width);
    vfp::write_phase_scan_csv(dir + "/phase_scan.csv", scan);

    nlohmann::json j;
    j["count_low"] = scan.count_low;
    j["count_high"] = scan.count_high;
    j["bracket_lo"] = scan.bracket_lo;
    j["bracket_hi"] = scan.bracket_hi;
    j["bracket_width"] = scan.bracket_hi - scan.bracket_lo;
    j["lambda_variance_match"] = scan.lambda_variance_match;
    std::ofstream(dir + "/phase_scan.json") << j.dump(2) << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "phase-scan", text, args, 0, wall);
    std::printf("branch count %zu -> %zu, transition in [%.6f, %.6f] (width %.2e), "
                "variance criterion %.6f\n",
                scan.count_low, scan.count_high, scan.bracket_lo, scan.bracket_hi,
                scan.bracket_hi - scan.bracket_lo, scan.lambda_variance_match);
    return kExitOk;
}

int cmd_free_energy(const CommonArgs& args, const std::string& density_path) {
    const std::string text = read_file(args.config_path);
    const vfp::RunConfig cfg = vfp::make_run_config(vfp::ConfigTable::parse(text));
    const std::string dir = resolve_out_dir(args, cfg);
    const auto t0 = std::chrono::steady_clock::now();

    const auto v = make_v(cfg);
    const auto g = make_g(cfg);
    const vfp::PhaseDensity rho = vfp::read_density_binary(density_path);
    const auto fe = vfp::free_energy(rho, v, g, cfg.model.lambda);
    const double diss = vfp::dissipation(rho, cfg.model.lambda);
    const auto split = vfp::entropy_split(rho);
    const auto lb = vfp::lower_bound(v, cfg.model.lambda, rho.grid());
    const auto mom = vfp::moment_report(rho);

    nlohmann::json j;
    j["lambda"] = fe.lambda;
    j["free_energy"] = fe.free_energy;
    j["kinetic"] = fe.kinetic;
    j["confinement"] = fe.confinement;
    j["interaction"] = fe.interaction;
    j["entropy"] = fe.entropy;
    j["entropy_high_part"] = split.i_plus;
    j["entropy_low_part"] = split.i_minus;
    j["dissipation"] = diss;
    j["lower_bound"] = lb.bound;
    j["mass"] = mom.mass;
    j["m1_q"] = mom.m1_q;
    j["m2_q"] = mom.m2_q;
    j["m1_p"] = mom.m1_p;
    j["m2_p"] = mom.m2_p;
    j["boundary_mass"] = mom.boundary_mass;
    std::ofstream(dir + "/free_energy.json") << j.dump(2) << '\n';
    std::printf("%s\n", j.dump(2).c_str());

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_provenance(dir, "free-energy", text, args, 0, wall);
    return kExitOk;
}

int dispatch(int (*fn)(const CommonArgs&), const CommonArgs& args) {
    try {
        return fn(args);
    } catch (const vfp::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const vfp::CflError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitCfl;
    } catch (const vfp::BlowupError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitBlowup;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid request: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for kinetic mean-field dynamics"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string density_path;

    CLI::App* check = app.add_subcommand("check", "report which model hypotheses hold");
    add_common(check, args, false);
    CLI::App* pde = app.add_subcommand("simulate-pde", "run the deterministic grid solver");
    add_common(pde, args, false);
    CLI::App* particles =
        app.add_subcommand("simulate-particles", "run the interacting-particle system");
    add_common(particles, args, true);
    CLI::App* stationary =
        app.add_subcommand("stationary", "solve the self-consistency fixed point");
    add_common(stationary, args, false);
    CLI::App* scan = app.add_subcommand("phase-scan", "bracket the branch-count transition");
    add_common(scan, args, false);
    CLI::App* fe = app.add_subcommand("free-energy", "one-shot diagnostics of a saved density");
    add_common(fe, args, false);
    fe->add_option("--density", density_path, "density snapshot (.vfpd)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    if (check->parsed()) return dispatch(&cmd_check, args);
    if (pde->parsed()) return dispatch(&cmd_simulate_pde, args);
    if (particles->parsed()) return dispatch(&cmd_simulate_particles, args);
    if (stationary->parsed()) return dispatch(&cmd_stationary, args);
    if (scan->parsed()) return dispatch(&cmd_phase_scan, args);
    if (fe->parsed()) {
        const auto body = [&]() { return cmd_free_energy(args, density_path); };
        try {
            return body();
        } catch (const vfp::ConfigError& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return kExitConfig;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kExitConfig;
        }
    }
    return kExitConfig;
}
