// Cross-validation between the three solution routes at desk scale: the full
// 2^n master equation, the symmetric product-basis reduction, and the
// analytic cascade solution.

#include "wqed/wqed.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace wqed;
using Catch::Matchers::WithinAbs;

namespace {

struct Pair {
    Trajectory full;
    Trajectory reduced;
};

Pair run_both(const EmitterChain& chain, double t_final, double dt, int stride,
              bool with_projections) {
    observables::ObservableChoice choice;
    choice.dark_projections = with_projections;

    EvolveOptions opt;
    opt.t_final = t_final;
    opt.dt = dt;
    opt.stride = stride;

    const auto c = build_couplings(chain);
    const auto basis = fullspace::SectorBasis::build(chain.n_total);
    Pair out;
    out.full = fullspace::evolve(fullspace::DenseState::product_initial(chain), chain, c, opt,
                                 observables::full_observers(chain, basis, choice))
                   .trajectory;
    out.reduced = dicke::reduced_evolve(dicke::initial_state(chain), chain, opt,
                                        observables::reduced_observers(chain, choice))
                      .trajectory;
    return out;
}

}  // namespace

TEST_CASE("full and reduced solvers agree on mirror ensembles") {
    for (auto [n, n_p] : {std::array<int, 2>{2, 1}, {5, 2}, {6, 3}, {6, 4}}) {
        const auto chain = EmitterChain::uniform(n, n_p, 1.0);
        const auto pair = run_both(chain, 4.0, 2e-3, 100, true);
        REQUIRE(pair.full.times == pair.reduced.times);
        for (const char* col : {"n_pumped", "n_unpumped", "trace", "dark_total"}) {
            const auto& a = pair.full.column(col);
            const auto& b = pair.reduced.column(col);
            for (std::size_t i = 0; i < a.size(); ++i)
                REQUIRE_THAT(a[i], WithinAbs(b[i], 1e-6));
        }
    }
}

TEST_CASE("projection trajectories agree between solvers and the cascade") {
    const auto chain = EmitterChain::uniform(6, 2, 1.0);
    const auto pair = run_both(chain, 5.0, 1e-3, 500, true);
    for (int m = 0; m <= 2; ++m) {
        const std::string col = "proj_dark_M" + std::to_string(m);
        const auto& f = pair.full.column(col);
        const auto& r = pair.reduced.column(col);
        const auto analytic =
            darkstates::projection_trajectory(6, 2, m, pair.full.times);
        for (std::size_t i = 0; i < f.size(); ++i) {
            REQUIRE_THAT(f[i], WithinAbs(r[i], 1e-7));
            REQUIRE_THAT(f[i], WithinAbs(analytic[i], 1e-6));
        }
    }
}

TEST_CASE("steady projections agree with the analytic limit") {
    const auto chain = EmitterChain::uniform(6, 3, 1.0);
    const auto pair = run_both(chain, 18.0, 2e-3, 1000, true);
    for (int m = 0; m <= 3; ++m) {
        const double ss = darkstates::steady_projection(6, 3, m);
        const std::string col = "proj_dark_M" + std::to_string(m);
        REQUIRE_THAT(pair.full.column(col).back(), WithinAbs(ss, 1e-7));
        REQUIRE_THAT(pair.reduced.column(col).back(), WithinAbs(ss, 1e-7));
    }
    // dark-manifold weighted curves converge to the ensemble means
    REQUIRE_THAT(pair.full.column("n_pumped").back(),
                 WithinAbs(darkstates::steady_mean_excitations(6, 3).first, 1e-6));
    REQUIRE_THAT(pair.full.column("n_unpumped").back(),
                 WithinAbs(darkstates::steady_mean_excitations(6, 3).second, 1e-6));
}

TEST_CASE("dark-manifold weighted excitations converge to the ensemble means") {
    const auto chain = EmitterChain::uniform(5, 2, 1.0);
    observables::ObservableChoice choice;
    choice.dark_projections = true;
    choice.dark_weighted = true;
    EvolveOptions opt;
    opt.t_final = 16.0;
    opt.dt = 2e-3;
    opt.stride = 400;
    const auto c = build_couplings(chain);
    const auto basis = fullspace::SectorBasis::build(5);
    const auto traj = fullspace::evolve(fullspace::DenseState::product_initial(chain), chain, c,
                                        opt, observables::full_observers(chain, basis, choice))
                          .trajectory;
    REQUIRE_THAT(traj.column("dark_n_pumped").back(),
                 WithinAbs(traj.column("n_pumped").back(), 1e-6));
    REQUIRE_THAT(traj.column("dark_n_unpumped").back(),
                 WithinAbs(traj.column("n_unpumped").back(), 1e-6));
    // at t = 0 the dark manifold holds only part of the excitation
    REQUIRE(traj.column("dark_n_pumped").front() < traj.column("n_pumped").front());
}

TEST_CASE("two-emitter transfer ratio from all three routes") {
    const auto chain = EmitterChain::uniform(2, 1, 1.0);
    const auto pair = run_both(chain, 20.0, 1e-3, 1000, false);
    const double t_full = pair.full.column("n_unpumped").back() / 1.0;
    const double t_reduced = pair.reduced.column("n_unpumped").back() / 1.0;
    const double t_analytic = darkstates::transfer_ratio(2, 1);
    REQUIRE_THAT(t_full, WithinAbs(0.25, 1e-8));
    REQUIRE_THAT(t_reduced, WithinAbs(0.25, 1e-8));
    REQUIRE_THAT(t_analytic, WithinAbs(0.25, 1e-12));
}
