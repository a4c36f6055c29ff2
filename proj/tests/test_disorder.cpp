#include "wqed/disorder.hpp"

#include "wqed/io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace wqed;
using namespace wqed::disorder;
using Catch::Matchers::WithinAbs;

TEST_CASE("position sampling: zero disorder returns the lattice") {
    const auto base = EmitterChain::uniform(8, 3, 1.0);
    REQUIRE(sample_positions(base, 0.0, 7, 0) == base.positions);
}

TEST_CASE("position sampling is deterministic in (seed, sample, emitter)") {
    const auto base = EmitterChain::uniform(8, 3, 1.0);
    const auto a = sample_positions(base, 0.01, 1234, 5);
    const auto b = sample_positions(base, 0.01, 1234, 5);
    REQUIRE(a == b);
    REQUIRE(a != sample_positions(base, 0.01, 1234, 6));
    REQUIRE(a != sample_positions(base, 0.01, 1235, 5));
}

TEST_CASE("pooled deviations have the requested standard deviation") {
    const auto base = EmitterChain::uniform(8, 3, 1.0);
    const double eps = 0.001;
    exact::KahanSum sq;
    long count = 0;
    for (int s = 0; s < 12500; ++s) {
        const auto x = sample_positions(base, eps, 99, static_cast<std::uint64_t>(s));
        for (int i = 0; i < 8; ++i) {
            const double d = x[static_cast<std::size_t>(i)] - base.positions[static_cast<std::size_t>(i)];
            sq.add(d * d);
            ++count;
        }
    }
    const double sd = std::sqrt(sq.value() / count);
    REQUIRE(std::abs(sd - eps) <= 0.02 * eps);
}

TEST_CASE("zero-disorder campaign reproduces the ideal trajectory bit-exactly") {
    DisorderCampaign campaign;
    campaign.base = EmitterChain::uniform(4, 1, 1.0);
    campaign.epsilon = 0.0;
    campaign.samples = 5;
    campaign.seed = 3;
    campaign.t_final = 1.0;
    campaign.dt = 5e-3;
    campaign.stride = 20;

    const auto basis = fullspace::SectorBasis::build(4);
    observables::ObservableChoice choice;
    const auto obs = observables::full_observers(campaign.base, basis, choice);
    const auto stats = run_campaign(campaign, obs);

    EvolveOptions opt;
    opt.t_final = campaign.t_final;
    opt.dt = campaign.dt;
    opt.stride = campaign.stride;
    const auto ideal = fullspace::evolve(fullspace::DenseState::product_initial(campaign.base),
                                         campaign.base, build_couplings(campaign.base), opt, obs)
                           .trajectory;
    REQUIRE(stats.times == ideal.times);
    for (std::size_t i = 0; i < stats.names.size(); ++i) {
        for (std::size_t t = 0; t < stats.times.size(); ++t) {
            REQUIRE(stats.mean[i][t] == ideal.series[i][t]);
            REQUIRE(stats.std_error[i][t] == 0.0);
        }
    }
    REQUIRE_FALSE(stats.any_reordered);
}

TEST_CASE("campaign statistics are independent of the worker count") {
    DisorderCampaign campaign;
    campaign.base = EmitterChain::uniform(4, 2, 1.0);
    campaign.epsilon = 0.02;
    campaign.samples = 6;
    campaign.seed = 11;
    campaign.t_final = 0.5;
    campaign.dt = 5e-3;
    campaign.stride = 10;

    const auto basis = fullspace::SectorBasis::build(4);
    const auto obs =
        observables::full_observers(campaign.base, basis, observables::ObservableChoice{});

    const auto one = run_campaign(campaign, obs);
    campaign.threads = 2;
    const auto two = run_campaign(campaign, obs);
    REQUIRE(one.times == two.times);
    for (std::size_t i = 0; i < one.names.size(); ++i)
        for (std::size_t t = 0; t < one.times.size(); ++t) {
            REQUIRE(one.mean[i][t] == two.mean[i][t]);
            REQUIRE(one.std_error[i][t] == two.std_error[i][t]);
        }
}

TEST_CASE("doubling the sample count shrinks the standard error roughly by sqrt(2)") {
    DisorderCampaign campaign;
    campaign.base = EmitterChain::uniform(3, 1, 1.0);
    campaign.epsilon = 0.05;
    campaign.seed = 21;
    campaign.t_final = 2.0;
    campaign.dt = 5e-3;
    campaign.stride = 40;
    campaign.threads = 2;

    const auto basis = fullspace::SectorBasis::build(3);
    const auto obs =
        observables::full_observers(campaign.base, basis, observables::ObservableChoice{});

    campaign.samples = 32;
    const auto small = run_campaign(campaign, obs);
    campaign.samples = 64;
    const auto large = run_campaign(campaign, obs);

    // compare the time-averaged standard error of the un-pumped excitation
    const std::size_t col = 1;  // n_unpumped
    double se_small = 0.0, se_large = 0.0;
    for (std::size_t t = 1; t < small.times.size(); ++t) {
        se_small += small.std_error[col][t];
        se_large += large.std_error[col][t];
    }
    const double ratio = se_small / se_large;
    REQUIRE(ratio >= 1.2);
    REQUIRE(ratio <= 1.7);
}

TEST_CASE("moderate disorder enhances transfer while dark projections decay") {
    // eps = 0.01 at (8,3): extra decay channels delocalize excitation between
    // the ensembles before dissipation completes, so the ensemble-mean
    // un-pumped excitation runs above the disorder-free case even as the
    // individual dark-state projections fall. Deterministic 8-sample smoke
    // version of the 200-sample campaign.
    DisorderCampaign campaign;
    campaign.base = EmitterChain::uniform(8, 3, 1.0);
    campaign.epsilon = 0.01;
    campaign.samples = 8;
    campaign.seed = 7;
    campaign.t_final = 6.0;
    campaign.dt = 5e-3;
    campaign.stride = 10;
    campaign.threads = 2;

    const auto basis = fullspace::SectorBasis::build(8);
    observables::ObservableChoice choice;
    choice.dark_projections = true;
    const auto obs = observables::full_observers(campaign.base, basis, choice);
    const auto stats = run_campaign(campaign, obs);

    EvolveOptions opt;
    opt.t_final = campaign.t_final;
    opt.dt = campaign.dt;
    opt.stride = campaign.stride;
    const auto ideal = fullspace::evolve(fullspace::DenseState::product_initial(campaign.base),
                                         campaign.base, build_couplings(campaign.base), opt, obs)
                           .trajectory;

    const auto idx = [&](const std::string& name) {
        return static_cast<std::size_t>(ideal.column_index(name));
    };
    double max_enhancement = -1.0;
    for (std::size_t t = 0; t < stats.times.size(); ++t)
        max_enhancement = std::max(max_enhancement, stats.mean[idx("n_unpumped")][t] -
                                                        ideal.column("n_unpumped")[t]);
    REQUIRE(max_enhancement > 0.05);
    REQUIRE(stats.mean[idx("proj_dark_M3")].back() <
            ideal.column("proj_dark_M3").back() - 0.05);
}

TEST_CASE("imperfection scan: zero epsilon reproduces the ideal run") {
    const auto chain = EmitterChain::uniform(4, 2, 1.0);
    const auto runs = imperfection_scan(chain, ImperfectionKind::nonradiative, {0.0, 0.05},
                                        2.0, 5e-3, 40);
    REQUIRE(runs.size() == 2);

    observables::ObservableChoice choice;
    choice.dark_projections = true;
    const auto basis = fullspace::SectorBasis::build(4);
    EvolveOptions opt;
    opt.t_final = 2.0;
    opt.dt = 5e-3;
    opt.stride = 40;
    const auto ideal = fullspace::evolve(fullspace::DenseState::product_initial(chain), chain,
                                         build_couplings(chain), opt,
                                         observables::full_observers(chain, basis, choice))
                           .trajectory;
    for (std::size_t i = 0; i < ideal.names.size(); ++i)
        for (std::size_t t = 0; t < ideal.times.size(); ++t)
            REQUIRE(runs[0].trajectory.series[i][t] == ideal.series[i][t]);

    // the generator stays trace preserving with the recycling term
    REQUIRE(runs[1].trajectory.invariants.max_trace_dev <= 1e-8);
}

TEST_CASE("nonradiative decay drains the top dark state into lower ones") {
    // gamma_nr = 0.01 at (8,3): the M = 3 projection declines first while the
    // M = 1 projection climbs above its ideal-case value
    const auto chain = EmitterChain::uniform(8, 3, 1.0);
    const auto runs = imperfection_scan(chain, ImperfectionKind::nonradiative, {0.0, 0.01},
                                        10.0, 5e-3, 50);
    const auto& ideal = runs[0].trajectory;
    const auto& nr = runs[1].trajectory;
    REQUIRE(nr.column("proj_dark_M3").back() < ideal.column("proj_dark_M3").back() - 0.05);
    REQUIRE(nr.column("proj_dark_M1").back() > ideal.column("proj_dark_M1").back() + 0.02);
}

TEST_CASE("imperfection scan produces the dark-projection columns") {
    const auto chain = EmitterChain::uniform(4, 2, 1.0);
    const auto runs =
        imperfection_scan(chain, ImperfectionKind::dephasing, {0.1}, 1.0, 5e-3, 50);
    const auto& traj = runs[0].trajectory;
    REQUIRE_NOTHROW(traj.column("proj_dark_M0"));
    REQUIRE_NOTHROW(traj.column("proj_dark_M1"));
    REQUIRE_NOTHROW(traj.column("proj_dark_M2"));
    REQUIRE_NOTHROW(traj.column("dark_total"));
    // dephasing bleeds population out of the ideal dark manifold
    REQUIRE(traj.column("dark_total").back() < 1.0 - 1e-4);
    REQUIRE(traj.invariants.max_trace_dev <= 1e-8);
}

TEST_CASE("ensemble CSV carries mean and stderr columns") {
    DisorderCampaign campaign;
    campaign.base = EmitterChain::uniform(3, 1, 1.0);
    campaign.epsilon = 0.0;
    campaign.samples = 2;
    campaign.t_final = 0.2;
    campaign.dt = 5e-3;
    campaign.stride = 10;
    const auto basis = fullspace::SectorBasis::build(3);
    const auto stats = run_campaign(
        campaign, observables::full_observers(campaign.base, basis, observables::ObservableChoice{}));
    const std::string csv = io::ensemble_csv(stats);
    REQUIRE(csv.rfind("time,n_pumped_mean,n_pumped_stderr,n_unpumped_mean,n_unpumped_stderr,"
                      "trace_mean,trace_stderr\n", 0) == 0);
}
