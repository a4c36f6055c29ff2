// disorder.hpp — imperfection campaigns: deterministic positional-disorder
// sampling, ensemble-averaged full-space trajectories, and nonradiative /
// dephasing scans.

#pragma once

#include "wqed/chain.hpp"
#include "wqed/exact.hpp"
#include "wqed/fullspace.hpp"
#include "wqed/observables.hpp"
#include "wqed/trajectory.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wqed::disorder {

// --------------------- counter-based deterministic RNG -----------------------

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stream key (seed, sample, emitter); draws are indexed by a counter, so the
// value at a given key never depends on evaluation order.
inline std::uint64_t draw(std::uint64_t seed, std::uint64_t sample, std::uint64_t emitter,
                          std::uint64_t counter) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0xd1b54a32d192ed03ull * (sample + 1)));
    h = splitmix64(h ^ (0x8cb92ba72f3d8dd7ull * (emitter + 1)));
    return splitmix64(h ^ counter);
}

inline double to_unit(std::uint64_t x) {
    // (0, 1), never exactly 0 or 1
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// One standard normal per (seed, sample, emitter) via Box-Muller.
inline double standard_normal(std::uint64_t seed, std::uint64_t sample, std::uint64_t emitter) {
    const double u1 = to_unit(draw(seed, sample, emitter, 0));
    const double u2 = to_unit(draw(seed, sample, emitter, 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

// Ideal positions plus independent Gaussian deviations of standard deviation
// epsilon. Positions are not re-sorted: couplings depend only on |x_m - x_n|.
inline std::vector<double> sample_positions(const EmitterChain& base, double epsilon,
                                            std::uint64_t seed, std::uint64_t sample_index) {
    if (epsilon < 0) throw std::invalid_argument("sample_positions: epsilon must be >= 0");
    std::vector<double> x = base.positions;
    if (epsilon == 0.0) return x;
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] += epsilon * rng::standard_normal(seed, sample_index, i);
    return x;
}

// ------------------------------- campaigns -----------------------------------

struct DisorderCampaign {
    EmitterChain base;
    double epsilon{0.0};
    int samples{200};
    std::uint64_t seed{0};
    double t_final{10.0};
    double dt{0.0};  // 0 selects the solver default
    int stride{1};
    int threads{1};
};

struct EnsembleStatistics {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> std_error;
    int samples{0};
    bool any_reordered{false};
    InvariantReport invariants;  // worst case across samples
};

// Run `samples` full-space trajectories with per-sample disordered positions
// and aggregate mean and standard error on the shared time grid. Aggregation
// is a fixed-order reduction, so results are independent of thread count.
inline EnsembleStatistics run_campaign(const DisorderCampaign& campaign,
                                       const std::vector<fullspace::FullObserver>& observers) {
    campaign.base.validate();
    fullspace::check_site_count(campaign.base.n_total);
    if (campaign.samples < 1) throw std::invalid_argument("run_campaign: samples must be >= 1");
    if (campaign.epsilon < 0) throw std::invalid_argument("run_campaign: epsilon must be >= 0");

    const int s_count = campaign.samples;
    std::vector<Trajectory> trajs(static_cast<std::size_t>(s_count));
    std::vector<std::string> errors(static_cast<std::size_t>(s_count));

    EvolveOptions opt;
    opt.t_final = campaign.t_final;
    opt.dt = campaign.dt;
    opt.stride = campaign.stride;

    const auto run_one = [&](int s) {
        EmitterChain chain = campaign.base;
        chain.positions = sample_positions(campaign.base, campaign.epsilon, campaign.seed,
                                           static_cast<std::uint64_t>(s));
        const CouplingMatrices c = build_couplings(chain);
        const fullspace::DenseState rho0 = fullspace::DenseState::product_initial(chain);
        try {
            trajs[static_cast<std::size_t>(s)] = fullspace::evolve(rho0, chain, c, opt, observers).trajectory;
        } catch (const SolverAbort& e) {
            errors[static_cast<std::size_t>(s)] =
                std::string(e.what()) + " [sample " + std::to_string(s) + ", seed " +
                std::to_string(campaign.seed) + "]";
        }
    };

    const int workers = std::max(1, campaign.threads);
    if (workers == 1 || s_count == 1) {
        for (int s = 0; s < s_count; ++s) run_one(s);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int s = next.fetch_add(1); s < s_count; s = next.fetch_add(1)) run_one(s);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (!err.empty()) throw SolverAbort(err);

    EnsembleStatistics stats;
    stats.samples = s_count;
    stats.times = trajs[0].times;
    stats.names = trajs[0].names;
    for (int s = 0; s < s_count; ++s) {
        if (trajs[static_cast<std::size_t>(s)].times.size() != stats.times.size())
            throw std::runtime_error("run_campaign: inconsistent sample time grids");
        const std::vector<double> xs = sample_positions(campaign.base, campaign.epsilon,
                                                        campaign.seed,
                                                        static_cast<std::uint64_t>(s));
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i] <= xs[i - 1]) stats.any_reordered = true;
        const auto& inv = trajs[static_cast<std::size_t>(s)].invariants;
        stats.invariants.max_trace_dev =
            std::max(stats.invariants.max_trace_dev, inv.max_trace_dev);
        stats.invariants.max_herm_dev =
            std::max(stats.invariants.max_herm_dev, inv.max_herm_dev);
        if (inv.positivity_checked) {
            stats.invariants.positivity_checked = true;
            if (std::isnan(stats.invariants.min_eigenvalue))
                stats.invariants.min_eigenvalue = inv.min_eigenvalue;
            else
                stats.invariants.min_eigenvalue =
                    std::min(stats.invariants.min_eigenvalue, inv.min_eigenvalue);
        }
    }

    const std::size_t n_series = stats.names.size();
    const std::size_t n_times = stats.times.size();
    stats.mean.assign(n_series, std::vector<double>(n_times, 0.0));
    stats.std_error.assign(n_series, std::vector<double>(n_times, 0.0));
    for (std::size_t i = 0; i < n_series; ++i) {
        for (std::size_t t = 0; t < n_times; ++t) {
            // centered accumulation: identical samples reproduce the single
            // trajectory bit-exactly
            const double ref = trajs[0].series[i][t];
            exact::KahanSum dev;
            for (int s = 0; s < s_count; ++s)
                dev.add(trajs[static_cast<std::size_t>(s)].series[i][t] - ref);
            const double mean = ref + dev.value() / s_count;
            stats.mean[i][t] = mean;
            if (s_count > 1) {
                exact::KahanSum sq;
                for (int s = 0; s < s_count; ++s) {
                    const double d = trajs[static_cast<std::size_t>(s)].series[i][t] - mean;
                    sq.add(d * d);
                }
                stats.std_error[i][t] =
                    std::sqrt(sq.value() / (static_cast<double>(s_count) * (s_count - 1)));
            }
        }
    }
    return stats;
}

// ----------------------------- rate imperfections ----------------------------

enum class ImperfectionKind { nonradiative, dephasing };

struct ImperfectionRun {
    double epsilon{0.0};
    Trajectory trajectory;
};

// One deterministic full-space run per epsilon with gamma_nr = eps * gamma or
// gamma_phi = eps * gamma. Output always includes the per-M dark-state
// projections and the total ideal-dark-manifold projection.
inline std::vector<ImperfectionRun> imperfection_scan(
    const EmitterChain& chain, ImperfectionKind kind, const std::vector<double>& epsilons,
    double t_final, double dt, int stride,
    const std::vector<fullspace::FullObserver>& extra_observers = {}) {
    chain.validate();
    fullspace::check_site_count(chain.n_total);

    const fullspace::SectorBasis basis = fullspace::SectorBasis::build(chain.n_total);
    observables::ObservableChoice choice;
    choice.dark_projections = true;
    std::vector<fullspace::FullObserver> observers =
        observables::full_observers(chain, basis, choice);
    for (const auto& ob : extra_observers) observers.push_back(ob);

    EvolveOptions opt;
    opt.t_final = t_final;
    opt.dt = dt;
    opt.stride = stride;

    std::vector<ImperfectionRun> runs;
    for (double eps : epsilons) {
        if (eps < 0) throw std::invalid_argument("imperfection_scan: epsilon must be >= 0");
        EmitterChain mod = chain;
        if (kind == ImperfectionKind::nonradiative)
            mod.gamma_nr = eps * chain.gamma;
        else
            mod.gamma_phi = eps * chain.gamma;
        const CouplingMatrices c = build_couplings(mod);
        const fullspace::DenseState rho0 = fullspace::DenseState::product_initial(mod);
        ImperfectionRun run;
        run.epsilon = eps;
        run.trajectory = fullspace::evolve(rho0, mod, c, opt, observers).trajectory;
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace wqed::disorder
