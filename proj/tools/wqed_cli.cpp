// wqed_cli.cpp — command-line front end: evolve / sweep / spectrum / disorder.
//
// Configuration comes from an optional JSON file (--config) with command-line
// flags taking precedence. Every output CSV gets a JSON sidecar sufficient to
// re-run it exactly. Exit codes: 0 success, 2 configuration error, 3 solver
// abort, 4 --check failure.

#include "wqed/wqed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int n{-1};
    int n_p{-1};
    double spacing{1.0};
    double gamma{1.0};
    double gamma_nr{0.0};
    double gamma_phi{0.0};
    std::vector<double> positions;  // optional override

    std::string solver{"full"};
    double t_final{10.0};
    double dt{0.0};
    int stride{0};  // 0 -> auto (~400 samples)
    bool to_steady{false};
    double t_max{50.0};

    int n_min{2};
    int n_max{20};

    double d_min{0.05};
    double d_max{1.0};
    double d_step{0.05};

    double epsilon{0.0};
    int samples{200};
    std::string kind{"positional"};
    std::vector<double> epsilons{0.001, 0.01, 0.1};

    std::string out_dir{"."};
    std::uint64_t seed{0};
    int threads{1};
    bool check{false};
    bool dark_projections{false};
    bool dark_weighted{false};
    bool per_site{false};
};

template <typename T>
void load_field(const json& j, const std::string& key, T& dst, const std::string& scope) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + scope + key + "' has the wrong type");
    }
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (const char* env = std::getenv("WQED_OUT_DIR")) cfg.out_dir = env;
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (j.contains("chain")) {
        const json& c = j["chain"];
        load_field(c, "n", cfg.n, "chain.");
        load_field(c, "n_p", cfg.n_p, "chain.");
        load_field(c, "spacing", cfg.spacing, "chain.");
        load_field(c, "gamma", cfg.gamma, "chain.");
        load_field(c, "gamma_nr", cfg.gamma_nr, "chain.");
        load_field(c, "gamma_phi", cfg.gamma_phi, "chain.");
        load_field(c, "positions", cfg.positions, "chain.");
    }
    load_field(j, "solver", cfg.solver, "");
    if (j.contains("time")) {
        const json& t = j["time"];
        load_field(t, "t_final", cfg.t_final, "time.");
        load_field(t, "dt", cfg.dt, "time.");
        load_field(t, "stride", cfg.stride, "time.");
        load_field(t, "to_steady", cfg.to_steady, "time.");
        load_field(t, "t_max", cfg.t_max, "time.");
    }
    if (j.contains("sweep")) {
        load_field(j["sweep"], "n_min", cfg.n_min, "sweep.");
        load_field(j["sweep"], "n_max", cfg.n_max, "sweep.");
    }
    if (j.contains("spectrum")) {
        load_field(j["spectrum"], "d_min", cfg.d_min, "spectrum.");
        load_field(j["spectrum"], "d_max", cfg.d_max, "spectrum.");
        load_field(j["spectrum"], "d_step", cfg.d_step, "spectrum.");
    }
    if (j.contains("disorder")) {
        load_field(j["disorder"], "epsilon", cfg.epsilon, "disorder.");
        load_field(j["disorder"], "samples", cfg.samples, "disorder.");
        load_field(j["disorder"], "kind", cfg.kind, "disorder.");
        load_field(j["disorder"], "epsilons", cfg.epsilons, "disorder.");
    }
    if (j.contains("output")) load_field(j["output"], "dir", cfg.out_dir, "output.");
    load_field(j, "seed", cfg.seed, "");
    load_field(j, "threads", cfg.threads, "");
    if (j.contains("observables")) {
        load_field(j["observables"], "dark_projections", cfg.dark_projections, "observables.");
        load_field(j["observables"], "dark_weighted", cfg.dark_weighted, "observables.");
        load_field(j["observables"], "per_site", cfg.per_site, "observables.");
    }
    return cfg;
}

wqed::EmitterChain make_chain(const RunConfig& cfg) {
    if (cfg.n < 1) throw ConfigError("config field 'chain.n' missing or < 1 (use --n)");
    if (cfg.n_p < 0 || cfg.n_p > cfg.n)
        throw ConfigError("config field 'chain.n_p' must be in [0, n] (use --n-p)");
    wqed::EmitterChain chain = wqed::EmitterChain::uniform(cfg.n, cfg.n_p, cfg.spacing,
                                                           cfg.gamma, cfg.gamma_nr,
                                                           cfg.gamma_phi);
    if (!cfg.positions.empty()) {
        if (cfg.positions.size() != static_cast<std::size_t>(cfg.n))
            throw ConfigError("config field 'chain.positions' must have n entries");
        chain.positions = cfg.positions;
    }
    try {
        chain.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return chain;
}

int auto_stride(double t_final, double dt, int requested) {
    if (requested > 0) return requested;
    const double steps = t_final / dt;
    return std::max(1, static_cast<int>(steps / 400.0));
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

// ------------------------------ --check battery ------------------------------

void check_or_fail(bool ok, const std::string& what) {
    std::cout << "[check] " << what << (ok ? ": ok" : ": FAILED") << "\n";
    if (!ok) throw CheckFailure("check failed: " + what);
}

void run_checks(const wqed::EmitterChain& chain, const std::string& solver) {
    using namespace wqed;
    const CouplingMatrices c = build_couplings(chain);
    check_or_fail((c.j - c.j.transpose()).cwiseAbs().maxCoeff() == 0.0 &&
                      (c.g - c.g.transpose()).cwiseAbs().maxCoeff() == 0.0,
                  "coupling matrices symmetric");
    check_or_fail(c.j.diagonal().cwiseAbs().maxCoeff() == 0.0 &&
                      (c.g.diagonal().array() - chain.gamma).abs().maxCoeff() == 0.0,
                  "coupling diagonals (0 and gamma)");
    const auto spec = decay_spectrum(c);
    double sum = 0.0;
    for (double ev : spec) sum += ev;
    check_or_fail(std::abs(sum - chain.n_total * chain.gamma) <=
                      1e-10 * chain.n_total * chain.gamma,
                  "decay spectrum trace identity");
    if (is_mirror(c, chain.gamma)) {
        const int mmax = darkstates::max_dark_excitation(chain.n_total, chain.n_pumped);
        bool rec = true;
        double proj_sum = 0.0;
        for (int m = 0; m <= mmax; ++m) {
            if (chain.n_total <= exact::kExactLimit)
                rec = rec && darkstates::verify_recursion(
                                 darkstates::dark_state(chain.n_total, chain.n_pumped, m));
            proj_sum += darkstates::steady_projection(chain.n_total, chain.n_pumped, m);
        }
        if (chain.n_total <= exact::kExactLimit)
            check_or_fail(rec, "dark-state coefficient recursion");
        check_or_fail(std::abs(proj_sum - 1.0) <= 1e-10, "steady projections sum to 1");
    }
    if (solver == "full" && chain.n_total <= fullspace::kMaxSites) {
        const auto h = fullspace::build_h_eff(chain, c);
        const auto rho0 = fullspace::DenseState::product_initial(chain);
        const auto rhs = fullspace::lindblad_rhs(rho0, h, c, chain);
        check_or_fail(std::abs(rhs.trace()) <= 1e-12 * chain.n_total * chain.gamma,
                      "generator preserves trace on the initial state");
    }
}

// -------------------------------- subcommands --------------------------------

int cmd_evolve(const RunConfig& cfg) {
    using namespace wqed;
    const EmitterChain chain = make_chain(cfg);
    if (cfg.check) run_checks(chain, cfg.solver);
    ensure_out_dir(cfg.out_dir);

    observables::ObservableChoice choice;
    choice.dark_projections = cfg.dark_projections;
    choice.dark_weighted = cfg.dark_weighted;
    choice.per_site = cfg.per_site;

    EvolveOptions opt;
    opt.t_final = cfg.t_final;
    opt.dt = cfg.dt > 0 ? cfg.dt : 0.01 / (chain.n_total * chain.gamma);
    opt.stride = auto_stride(cfg.to_steady ? cfg.t_max : cfg.t_final, opt.dt, cfg.stride);
    opt.detect_steady = cfg.to_steady;
    opt.t_max = cfg.t_max;

    Trajectory traj;
    if (cfg.solver == "full") {
        if (chain.n_total > fullspace::kMaxSites)
            throw ConfigError("config field 'chain.n' exceeds the full-space solver limit " +
                              std::to_string(fullspace::kMaxSites));
        const CouplingMatrices c = build_couplings(chain);
        const auto basis = fullspace::SectorBasis::build(chain.n_total);
        const auto obs = observables::full_observers(chain, basis, choice);
        const auto rho0 = fullspace::DenseState::product_initial(chain);
        traj = fullspace::evolve(rho0, chain, c, opt, obs).trajectory;
    } else if (cfg.solver == "reduced") {
        const auto obs = observables::reduced_observers(chain, choice);
        traj = dicke::reduced_evolve(dicke::initial_state(chain), chain, opt, obs).trajectory;
    } else if (cfg.solver == "analytic") {
        const CouplingMatrices c = build_couplings(chain);
        if (!is_mirror(c, chain.gamma))
            throw ConfigError("solver 'analytic' requires the mirror configuration");
        // projection trajectories straight from the cascade solution
        const int n = chain.n_total, n_p = chain.n_pumped;
        const int mmax = darkstates::max_dark_excitation(n, n_p);
        std::vector<double> times;
        const long nsteps = std::lround(std::ceil(cfg.t_final / opt.dt - 1e-12));
        for (long s = 0; s <= nsteps; s += opt.stride) times.push_back(s * opt.dt);
        if (nsteps % opt.stride != 0) times.push_back(nsteps * opt.dt);
        traj.times = times;
        std::vector<std::vector<double>> proj;
        for (int m = 0; m <= mmax; ++m) {
            std::vector<double> series;
            if (2 * n_p <= n) {
                series = darkstates::projection_trajectory(n, n_p, m, times, chain.gamma);
            } else {
                // integrate the cascade with a sub-step that divides the
                // output grid exactly, then pick the grid points
                const double rate_cap = 0.25 * (n - 2.0 * m + 1.0) * (n - 2.0 * m + 1.0);
                const double dt_cap = 0.2 / (chain.gamma * rate_cap);
                const int split = std::max(1, static_cast<int>(std::ceil(opt.dt / dt_cap)));
                const double dt_h = opt.dt / split;
                const auto full = darkstates::hierarchy_integrate(n, n_p, m, times.back(), dt_h,
                                                                  chain.gamma);
                for (double t : times) {
                    const auto idx = static_cast<std::size_t>(std::lround(t / dt_h));
                    series.push_back(full[std::min(idx, full.size() - 1)].second);
                }
            }
            traj.names.push_back("proj_dark_M" + std::to_string(m));
            traj.series.push_back(std::move(series));
        }
        // dark-manifold weighted excitation curves
        std::vector<double> wp(times.size(), 0.0), wnp(times.size(), 0.0), tot(times.size(), 0.0);
        for (int m = 0; m <= mmax; ++m) {
            const auto spec = darkstates::dark_state(n, n_p, m);
            for (std::size_t t = 0; t < times.size(); ++t) {
                const double p = traj.series[static_cast<std::size_t>(m)][t];
                wp[t] += p * spec.number_expectation_pumped;
                wnp[t] += p * spec.number_expectation_unpumped;
                tot[t] += p;
            }
        }
        traj.names.push_back("dark_total");
        traj.series.push_back(std::move(tot));
        traj.names.push_back("dark_n_pumped");
        traj.series.push_back(std::move(wp));
        traj.names.push_back("dark_n_unpumped");
        traj.series.push_back(std::move(wnp));
        traj.steady.criterion = "t_final";
        traj.steady.t_end = times.back();
    } else {
        throw ConfigError("config field 'solver' must be full, reduced, or analytic");
    }

    const std::string base = (fs::path(cfg.out_dir) / "traj").string();
    io::write_text(base + ".csv", io::trajectory_csv(traj));
    json sidecar = io::trajectory_sidecar(traj, chain, cfg.solver, opt.dt, cfg.seed);
    sidecar["command"] = "evolve";
    sidecar["stride"] = opt.stride;
    sidecar["t_final"] = cfg.t_final;
    io::write_text(base + ".json", sidecar.dump(2) + "\n");
    std::cout << "wrote " << base << ".csv\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    using namespace wqed;
    if (cfg.n_min < 2 || cfg.n_max < cfg.n_min)
        throw ConfigError("config fields 'sweep.n_min'/'sweep.n_max' must satisfy 2 <= n_min <= n_max");
    if (cfg.check) {
        // spot-check the analytic core on the smallest scan entry
        const int n = cfg.n_min;
        double s = 0.0;
        for (int m = 0; m <= darkstates::max_dark_excitation(n, n / 2); ++m)
            s += darkstates::steady_projection(n, n / 2, m);
        check_or_fail(std::abs(s - 1.0) <= 1e-10, "steady projections sum to 1");
    }
    ensure_out_dir(cfg.out_dir);

    std::string heatmap = "n,n_p,T\n";
    std::string optimum = "n,t_max,n_p_star,ratio\n";
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        for (int n_p = 1; n_p <= n; ++n_p)
            heatmap += std::to_string(n) + "," + std::to_string(n_p) + "," +
                       io::format_double(darkstates::transfer_ratio(n, n_p)) + "\n";
        const auto opt = darkstates::optimal_pumping(n);
        optimum += std::to_string(n) + "," + io::format_double(opt.t_max) + "," +
                   std::to_string(opt.n_p_star) + "," +
                   io::format_double(static_cast<double>(opt.n_p_star) / n) + "\n";
    }
    const fs::path dir(cfg.out_dir);
    io::write_text((dir / "heatmap.csv").string(), heatmap);
    io::write_text((dir / "optimum.csv").string(), optimum);
    json sidecar = {{"artifact_version", io::kArtifactVersion},
                    {"command", "sweep"},
                    {"n_min", cfg.n_min},
                    {"n_max", cfg.n_max},
                    {"seed", cfg.seed},
                    {"tie_break", "smallest n_p"},
                    {"files", {"heatmap.csv", "optimum.csv"}}};
    io::write_text((dir / "sweep.json").string(), sidecar.dump(2) + "\n");
    std::cout << "wrote " << (dir / "heatmap.csv").string() << " and "
              << (dir / "optimum.csv").string() << "\n";
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    using namespace wqed;
    if (cfg.n < 1) throw ConfigError("config field 'chain.n' missing or < 1 (use --n)");
    if (cfg.d_step <= 0 || cfg.d_max < cfg.d_min)
        throw ConfigError("config fields 'spectrum.d_min/d_max/d_step' invalid");
    ensure_out_dir(cfg.out_dir);

    std::string csv = "d,index,eigenvalue\n";
    std::vector<double> negative_ds;
    const int n_steps = static_cast<int>(std::floor((cfg.d_max - cfg.d_min) / cfg.d_step + 1e-9));
    for (int i = 0; i <= n_steps; ++i) {
        const double d = cfg.d_min + i * cfg.d_step;
        const EmitterChain chain = EmitterChain::uniform(cfg.n, 0, d, cfg.gamma);
        if (cfg.check && i == 0) run_checks(chain, "analytic");
        const auto spec = decay_spectrum(build_couplings(chain));
        const auto meta = spectrum_metadata(spec, cfg.gamma);
        if (meta.has_notable_negative) negative_ds.push_back(d);
        for (std::size_t k = 0; k < spec.size(); ++k)
            csv += io::format_double(d) + "," + std::to_string(k) + "," +
                   io::format_double(spec[k]) + "\n";
    }
    const fs::path dir(cfg.out_dir);
    io::write_text((dir / "spectrum.csv").string(), csv);
    json sidecar = {{"artifact_version", io::kArtifactVersion},
                    {"command", "spectrum"},
                    {"n", cfg.n},
                    {"gamma", cfg.gamma},
                    {"d_min", cfg.d_min},
                    {"d_max", cfg.d_max},
                    {"d_step", cfg.d_step},
                    {"seed", cfg.seed},
                    {"negative_eigenvalue_ds", negative_ds}};
    io::write_text((dir / "spectrum.json").string(), sidecar.dump(2) + "\n");
    std::cout << "wrote " << (dir / "spectrum.csv").string() << "\n";
    return 0;
}

int cmd_disorder(const RunConfig& cfg) {
    using namespace wqed;
    const EmitterChain chain = make_chain(cfg);
    if (cfg.check) run_checks(chain, "full");
    if (chain.n_total > fullspace::kMaxSites)
        throw ConfigError("config field 'chain.n' exceeds the full-space solver limit " +
                          std::to_string(fullspace::kMaxSites));
    ensure_out_dir(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    const double dt = cfg.dt > 0 ? cfg.dt : 0.01 / (chain.n_total * chain.gamma);
    const int stride = auto_stride(cfg.t_final, dt, cfg.stride);

    if (cfg.kind == "positional") {
        disorder::DisorderCampaign campaign;
        campaign.base = chain;
        campaign.epsilon = cfg.epsilon;
        campaign.samples = cfg.samples;
        campaign.seed = cfg.seed;
        campaign.t_final = cfg.t_final;
        campaign.dt = dt;
        campaign.stride = stride;
        campaign.threads = cfg.threads;
        const auto basis = fullspace::SectorBasis::build(chain.n_total);
        observables::ObservableChoice choice;
        choice.dark_projections = true;
        const auto obs = observables::full_observers(chain, basis, choice);
        const auto stats = disorder::run_campaign(campaign, obs);
        io::write_text((dir / "campaign.csv").string(), io::ensemble_csv(stats));
        json sidecar = {{"artifact_version", io::kArtifactVersion},
                        {"command", "disorder"},
                        {"kind", "positional"},
                        {"chain", io::chain_json(chain)},
                        {"epsilon", cfg.epsilon},
                        {"samples", cfg.samples},
                        {"seed", cfg.seed},
                        {"dt", dt},
                        {"stride", stride},
                        {"t_final", cfg.t_final},
                        {"any_reordered", stats.any_reordered},
                        {"columns", stats.names}};
        io::write_text((dir / "campaign.json").string(), sidecar.dump(2) + "\n");
        std::cout << "wrote " << (dir / "campaign.csv").string() << "\n";
        return 0;
    }

    disorder::ImperfectionKind kind;
    if (cfg.kind == "nonradiative")
        kind = disorder::ImperfectionKind::nonradiative;
    else if (cfg.kind == "dephasing")
        kind = disorder::ImperfectionKind::dephasing;
    else
        throw ConfigError("config field 'disorder.kind' must be positional, nonradiative, or dephasing");

    const auto runs = disorder::imperfection_scan(chain, kind, cfg.epsilons, cfg.t_final, dt, stride);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string base =
            (dir / ("scan_" + cfg.kind + "_" + std::to_string(i))).string();
        io::write_text(base + ".csv", io::trajectory_csv(runs[i].trajectory));
        EmitterChain mod = chain;
        if (kind == disorder::ImperfectionKind::nonradiative)
            mod.gamma_nr = runs[i].epsilon * chain.gamma;
        else
            mod.gamma_phi = runs[i].epsilon * chain.gamma;
        json sidecar = io::trajectory_sidecar(runs[i].trajectory, mod, "full", dt, cfg.seed);
        sidecar["command"] = "disorder";
        sidecar["kind"] = cfg.kind;
        sidecar["epsilon"] = runs[i].epsilon;
        sidecar["stride"] = stride;
        sidecar["t_final"] = cfg.t_final;
        io::write_text(base + ".json", sidecar.dump(2) + "\n");
        std::cout << "wrote " << base << ".csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Excitation transfer and collective decay in a 1D waveguide-coupled emitter chain"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig flags;  // flag storage; merged over the config file

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file");
        sub->add_option("--out", flags.out_dir, "output directory");
        sub->add_option("--seed", flags.seed, "RNG seed");
        sub->add_option("--threads", flags.threads, "worker threads");
        sub->add_flag("--check", flags.check, "run the invariant battery first");
    };

    CLI::App* evolve = app.add_subcommand("evolve", "time-evolve one configuration");
    add_common(evolve);
    evolve->add_option("--n", flags.n, "total emitters");
    evolve->add_option("--n-p", flags.n_p, "pumped emitters");
    evolve->add_option("--spacing", flags.spacing, "lattice constant, units of lambda0");
    evolve->add_option("--gamma", flags.gamma, "waveguide decay rate");
    evolve->add_option("--gamma-nr", flags.gamma_nr, "nonradiative decay rate");
    evolve->add_option("--gamma-phi", flags.gamma_phi, "dephasing rate");
    evolve->add_option("--solver", flags.solver, "full | reduced | analytic");
    evolve->add_option("--t-final", flags.t_final, "integration horizon, units of 1/gamma");
    evolve->add_option("--dt", flags.dt, "RK4 step (default 0.01/(n*gamma))");
    evolve->add_option("--stride", flags.stride, "sampling stride in steps");
    evolve->add_flag("--to-steady", flags.to_steady, "stop at the detected steady state");
    evolve->add_option("--t-max", flags.t_max, "time cap in steady mode");
    evolve->add_flag("--dark-projections", flags.dark_projections,
                     "emit per-M dark-state projections");
    evolve->add_flag("--dark-weighted", flags.dark_weighted,
                     "emit dark-manifold-weighted excitation curves");
    evolve->add_flag("--per-site", flags.per_site, "emit per-site populations (full solver)");

    CLI::App* sweep = app.add_subcommand("sweep", "transfer-ratio heatmap and optimum trace");
    add_common(sweep);
    sweep->add_option("--n-min", flags.n_min, "smallest chain size");
    sweep->add_option("--n-max", flags.n_max, "largest chain size");

    CLI::App* spectrum = app.add_subcommand("spectrum", "collective decay rates over a d grid");
    add_common(spectrum);
    spectrum->add_option("--n", flags.n, "total emitters");
    spectrum->add_option("--gamma", flags.gamma, "waveguide decay rate");
    spectrum->add_option("--d-min", flags.d_min, "smallest spacing");
    spectrum->add_option("--d-max", flags.d_max, "largest spacing");
    spectrum->add_option("--d-step", flags.d_step, "spacing step");

    CLI::App* disorder_cmd = app.add_subcommand("disorder", "imperfection campaigns");
    add_common(disorder_cmd);
    disorder_cmd->add_option("--n", flags.n, "total emitters");
    disorder_cmd->add_option("--n-p", flags.n_p, "pumped emitters");
    disorder_cmd->add_option("--spacing", flags.spacing, "lattice constant");
    disorder_cmd->add_option("--gamma", flags.gamma, "waveguide decay rate");
    disorder_cmd->add_option("--kind", flags.kind, "positional | nonradiative | dephasing");
    disorder_cmd->add_option("--epsilon", flags.epsilon, "positional disorder std dev");
    disorder_cmd->add_option("--samples", flags.samples, "disorder samples");
    disorder_cmd->add_option("--epsilons", flags.epsilons, "rate-scan epsilon list");
    disorder_cmd->add_option("--t-final", flags.t_final, "integration horizon");
    disorder_cmd->add_option("--dt", flags.dt, "RK4 step");
    disorder_cmd->add_option("--stride", flags.stride, "sampling stride");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path);
        // flags win over the config file
        const auto merge = [&](CLI::App* sub) {
            const auto take = [&](const std::string& name, auto member) {
                const CLI::Option* o = sub->get_option_no_throw(name);
                if (o != nullptr && o->count() > 0) cfg.*member = flags.*member;
            };
            take("--out", &RunConfig::out_dir);
            take("--seed", &RunConfig::seed);
            take("--threads", &RunConfig::threads);
            take("--check", &RunConfig::check);
            take("--n", &RunConfig::n);
            take("--n-p", &RunConfig::n_p);
            take("--spacing", &RunConfig::spacing);
            take("--gamma", &RunConfig::gamma);
            take("--gamma-nr", &RunConfig::gamma_nr);
            take("--gamma-phi", &RunConfig::gamma_phi);
            take("--solver", &RunConfig::solver);
            take("--t-final", &RunConfig::t_final);
            take("--dt", &RunConfig::dt);
            take("--stride", &RunConfig::stride);
            take("--to-steady", &RunConfig::to_steady);
            take("--t-max", &RunConfig::t_max);
            take("--dark-projections", &RunConfig::dark_projections);
            take("--dark-weighted", &RunConfig::dark_weighted);
            take("--per-site", &RunConfig::per_site);
            take("--n-min", &RunConfig::n_min);
            take("--n-max", &RunConfig::n_max);
            take("--d-min", &RunConfig::d_min);
            take("--d-max", &RunConfig::d_max);
            take("--d-step", &RunConfig::d_step);
            take("--kind", &RunConfig::kind);
            take("--epsilon", &RunConfig::epsilon);
            take("--samples", &RunConfig::samples);
            take("--epsilons", &RunConfig::epsilons);
        };

        if (evolve->parsed()) {
            merge(evolve);
            return cmd_evolve(cfg);
        }
        if (sweep->parsed()) {
            merge(sweep);
            return cmd_sweep(cfg);
        }
        if (spectrum->parsed()) {
            merge(spectrum);
            return cmd_spectrum(cfg);
        }
        if (disorder_cmd->parsed()) {
            merge(disorder_cmd);
            return cmd_disorder(cfg);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const CheckFailure& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const wqed::SolverAbort& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
