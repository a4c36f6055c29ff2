#include "wqed/dicke.hpp"

#include "wqed/darkstates.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace wqed;
using namespace wqed::dicke;
using Catch::Matchers::WithinAbs;

TEST_CASE("ladder coefficients") {
    REQUIRE_THAT(ladder_coeff(1, -0.5), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(ladder_coeff(2, -1.0), WithinAbs(std::sqrt(2.0), 1e-15));
    REQUIRE_THAT(ladder_coeff(4, 0.0), WithinAbs(std::sqrt(6.0), 1e-15));
    REQUIRE(ladder_coeff(3, 1.5) == 0.0);  // top of the ladder
    REQUIRE_THROWS_AS(ladder_coeff(2, 1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(ladder_coeff(2, -0.5), std::invalid_argument);  // wrong parity
    REQUIRE_THROWS_AS(ladder_coeff(3, -2.5), std::invalid_argument);
}

TEST_CASE("product basis layout") {
    const ProductBasis basis(4, 6);
    REQUIRE(basis.dim() == 5 * 7);
    REQUIRE(basis.index(0, 0) == 0);
    REQUIRE(basis.a_of(basis.index(3, 2)) == 3);
    REQUIRE(basis.b_of(basis.index(3, 2)) == 2);
}

TEST_CASE("collective lowering annihilates the ground state") {
    const ProductBasis basis(3, 4);
    const auto s = collective_lowering(basis, Which::total);
    Eigen::VectorXd ground = Eigen::VectorXd::Zero(basis.dim());
    ground[basis.index(0, 0)] = 1.0;
    REQUIRE((s * ground).norm() == 0.0);

    // and the raising operator annihilates the fully excited state
    Eigen::VectorXd top = Eigen::VectorXd::Zero(basis.dim());
    top[basis.index(3, 4)] = 1.0;
    REQUIRE((s.transpose() * top).norm() == 0.0);
}

TEST_CASE("pumped lowering from the top of a two-emitter ladder") {
    const ProductBasis basis(2, 3);
    const auto sp = collective_lowering(basis, Which::pumped);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(basis.dim());
    v[basis.index(2, 1)] = 1.0;
    const Eigen::VectorXd w = sp * v;
    REQUIRE_THAT(w[basis.index(1, 1)], WithinAbs(std::sqrt(2.0), 1e-14));
    REQUIRE_THAT(w.norm(), WithinAbs(std::sqrt(2.0), 1e-14));
}

TEST_CASE("[S^+, S] = 2 S_z as a matrix identity") {
    for (auto [np, nnp] : {std::array<int, 2>{1, 1}, {2, 3}, {4, 6}, {5, 0}}) {
        const ProductBasis basis(np, nnp);
        const Eigen::SparseMatrix<double> s = collective_lowering(basis, Which::total);
        const Eigen::MatrixXd comm =
            Eigen::MatrixXd(s.transpose() * s) - Eigen::MatrixXd(s * s.transpose());
        const Eigen::MatrixXd expected = 2.0 * Eigen::MatrixXd(sz_total(basis));
        REQUIRE((comm - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("total lowering is the sum of the ensemble operators") {
    const ProductBasis basis(3, 2);
    const Eigen::MatrixXd total = Eigen::MatrixXd(collective_lowering(basis, Which::total));
    const Eigen::MatrixXd split = Eigen::MatrixXd(collective_lowering(basis, Which::pumped)) +
                                  Eigen::MatrixXd(collective_lowering(basis, Which::unpumped));
    REQUIRE((total - split).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initial state") {
    const auto chain = EmitterChain::uniform(10, 4, 1.0);
    const auto v = initial_state(chain);
    const ProductBasis basis(chain);
    REQUIRE_THAT(v.norm(), WithinAbs(1.0, 1e-15));
    REQUIRE(v[basis.index(4, 0)] == Complex(1.0, 0.0));

    const auto empty = initial_state(EmitterChain::uniform(5, 0, 1.0));
    REQUIRE(empty[0] == Complex(1.0, 0.0));
}

TEST_CASE("dark states are annihilated by the collective lowering operator") {
    for (auto [n, n_p, m] : {std::array<int, 3>{2, 1, 1}, {10, 4, 3}, {10, 6, 4}, {40, 17, 12}}) {
        const auto spec = darkstates::dark_state(n, n_p, m);
        const ProductBasis basis(n_p, n - n_p);
        const Eigen::VectorXd v = darkstates::dicke_amplitudes(spec);
        const auto s = collective_lowering(basis, Which::total);
        REQUIRE((s * v).norm() <= 1e-10);
    }
}

TEST_CASE("reduced solver rejects unsupported configurations") {
    EvolveOptions opt;
    opt.t_final = 0.1;
    const std::vector<ReducedObserver> obs;

    const auto non_mirror = EmitterChain::uniform(2, 1, 0.25);
    REQUIRE_THROWS_AS(reduced_evolve(initial_state(non_mirror), non_mirror, opt, obs),
                      std::invalid_argument);

    const auto dephasing = EmitterChain::uniform(2, 1, 1.0, 1.0, 0.0, 0.1);
    REQUIRE_THROWS_AS(reduced_evolve(initial_state(dephasing), dephasing, opt, obs),
                      std::invalid_argument);

    const auto nonradiative = EmitterChain::uniform(2, 1, 1.0, 1.0, 0.1, 0.0);
    REQUIRE_THROWS_AS(reduced_evolve(initial_state(nonradiative), nonradiative, opt, obs),
                      std::invalid_argument);
}

TEST_CASE("reduced solver: two-emitter steady state") {
    const auto chain = EmitterChain::uniform(2, 1, 1.0);
    const ProductBasis basis(chain);
    EvolveOptions opt;
    // the dark-bright coherence decays at rate gamma; e^{-22}/2 ~ 1.4e-10
    opt.t_final = 22.0;
    opt.dt = 1e-3;
    opt.stride = 100;
    const std::vector<ReducedObserver> obs = {observers_reduced::mean_pumped(basis),
                                              observers_reduced::mean_unpumped(basis),
                                              observers_reduced::trace()};
    const auto result = reduced_evolve(initial_state(chain), chain, opt, obs);
    const auto& traj = result.trajectory;
    REQUIRE_THAT(traj.column("n_pumped").back(), WithinAbs(0.25, 1e-8));
    REQUIRE_THAT(traj.column("n_unpumped").back(), WithinAbs(0.25, 1e-8));
    REQUIRE(traj.invariants.max_trace_dev <= 1e-8);
    REQUIRE(traj.invariants.max_herm_dev <= 1e-9);
    REQUIRE(traj.invariants.min_eigenvalue >= -1e-7);
}

TEST_CASE("reduced solver: steady-state detection fires") {
    const auto chain = EmitterChain::uniform(2, 1, 1.0);
    const ProductBasis basis(chain);
    EvolveOptions opt;
    opt.detect_steady = true;
    opt.t_max = 50.0;
    opt.dt = 1e-3;
    opt.stride = 200;
    const std::vector<ReducedObserver> obs = {observers_reduced::mean_unpumped(basis)};
    const auto result = reduced_evolve(initial_state(chain), chain, opt, obs);
    REQUIRE(result.trajectory.steady.detected);
    REQUIRE(result.trajectory.steady.criterion == "rhs_norm");
    REQUIRE(result.trajectory.steady.t_end < 50.0);
    REQUIRE_THAT(result.trajectory.column("n_unpumped").back(), WithinAbs(0.25, 1e-7));
}

TEST_CASE("reduced solver: complementary configurations swap steady excitations") {
    EvolveOptions opt;
    opt.t_final = 12.0;
    opt.dt = 2e-3;
    opt.stride = 500;
    const auto run = [&](int n_p) {
        const auto chain = EmitterChain::uniform(6, n_p, 1.0);
        const ProductBasis basis(chain);
        const std::vector<ReducedObserver> obs = {observers_reduced::mean_pumped(basis),
                                                  observers_reduced::mean_unpumped(basis)};
        const auto result = reduced_evolve(initial_state(chain), chain, opt, obs);
        return std::pair{result.trajectory.column("n_pumped").back(),
                         result.trajectory.column("n_unpumped").back()};
    };
    const auto [p2, np2] = run(2);
    const auto [p4, np4] = run(4);
    REQUIRE_THAT(p2, WithinAbs(np4, 1e-6));
    REQUIRE_THAT(np2, WithinAbs(p4, 1e-6));
}
