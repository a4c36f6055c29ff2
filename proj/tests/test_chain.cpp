#include "wqed/chain.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace wqed;
using Catch::Matchers::WithinAbs;

namespace {

// Independent eigenvalue oracle: cyclic Jacobi rotations with explicit
// Givens products. Slow but convention-proof.
std::vector<double> jacobi_eigenvalues_desc(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double phi = 0.5 * std::atan2(2.0 * a(p, q), a(q, q) - a(p, p));
                Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
                g(p, p) = std::cos(phi);
                g(q, q) = std::cos(phi);
                g(p, q) = std::sin(phi);
                g(q, p) = -std::sin(phi);
                a = g.transpose() * a * g;
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

}  // namespace

TEST_CASE("chain validation") {
    REQUIRE_NOTHROW(EmitterChain::uniform(3, 1, 1.0));
    REQUIRE_THROWS_AS(EmitterChain::uniform(0, 0, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EmitterChain::uniform(3, 4, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EmitterChain::uniform(3, -1, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EmitterChain::uniform(3, 1, -0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(EmitterChain::uniform(3, 1, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(EmitterChain::uniform(3, 1, 1.0, 1.0, -0.1), std::invalid_argument);

    EmitterChain c = EmitterChain::uniform(4, 2, 0.5);
    REQUIRE(c.positions == std::vector<double>{0.0, 0.5, 1.0, 1.5});
    for (std::size_t i = 1; i < c.positions.size(); ++i)
        REQUIRE(c.positions[i] > c.positions[i - 1]);
}

TEST_CASE("couplings in the mirror configuration vanish / are uniform") {
    const auto c = build_couplings(EmitterChain::uniform(3, 1, 1.0));
    REQUIRE(c.j.cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((c.g.array() - 1.0).abs().maxCoeff() <= 1e-12);
    REQUIRE(is_mirror(c, 1.0));
}

TEST_CASE("couplings at quarter-wavelength spacing") {
    const auto c = build_couplings(EmitterChain::uniform(2, 1, 0.25));
    REQUIRE_THAT(c.j(0, 1), WithinAbs(0.5, 1e-14));
    REQUIRE_THAT(c.g(0, 1), WithinAbs(0.0, 1e-14));
    REQUIRE_FALSE(is_mirror(c, 1.0));
}

TEST_CASE("co-located emitters") {
    const auto c = build_couplings(EmitterChain::uniform(2, 1, 0.0));
    REQUIRE(c.j(0, 1) == 0.0);
    REQUIRE(c.g(0, 1) == 1.0);
}

TEST_CASE("coupling matrices are symmetric with fixed diagonals") {
    const double gamma = 1.7;
    for (double d : {0.13, 0.3, 0.5, 0.77, 1.0}) {
        const auto c = build_couplings(EmitterChain::uniform(6, 2, d, gamma));
        REQUIRE((c.j - c.j.transpose()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((c.g - c.g.transpose()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(c.j.diagonal().cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((c.g.diagonal().array() - gamma).abs().maxCoeff() == 0.0);
    }
}

TEST_CASE("couplings are translation invariant") {
    EmitterChain a = EmitterChain::uniform(5, 2, 0.37);
    EmitterChain b = a;
    for (auto& x : b.positions) x += 123.25;
    const auto ca = build_couplings(a);
    const auto cb = build_couplings(b);
    REQUIRE((ca.j - cb.j).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((ca.g - cb.g).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("decay spectrum: rank-1 cases at half-integer spacings") {
    for (double d : {0.5, 1.0, 1.5}) {
        const auto spec = decay_spectrum(build_couplings(EmitterChain::uniform(10, 0, d)));
        REQUIRE(spec.size() == 10);
        REQUIRE_THAT(spec[0], WithinAbs(10.0, 1e-8));
        int nonzero = 0;
        for (double ev : spec)
            if (std::abs(ev) > 1e-8) ++nonzero;
        REQUIRE(nonzero == 1);
    }
}

TEST_CASE("decay spectrum: multiple channels open away from half-integer spacing") {
    const auto spec = decay_spectrum(build_couplings(EmitterChain::uniform(10, 0, 0.3)));
    int nonzero = 0;
    for (double ev : spec)
        if (std::abs(ev) > 1e-8) ++nonzero;
    REQUIRE(nonzero >= 2);
}

TEST_CASE("decay spectrum matches an independent Jacobi eigensolver") {
    for (double d : {0.3, 0.5, 0.77, 1.0}) {
        const auto c = build_couplings(EmitterChain::uniform(10, 0, d));
        const auto spec = decay_spectrum(c);
        const auto oracle = jacobi_eigenvalues_desc(c.g);
        REQUIRE(spec.size() == oracle.size());
        for (std::size_t i = 0; i < spec.size(); ++i)
            REQUIRE_THAT(spec[i], WithinAbs(oracle[i], 1e-10));
    }
}

TEST_CASE("eigenvalue sum equals trace for arbitrary spacings") {
    for (double d : {0.05, 0.21, 0.333, 0.48, 0.6, 0.81, 0.99, 1.23}) {
        const int n = 9;
        const auto spec = decay_spectrum(build_couplings(EmitterChain::uniform(n, 3, d)));
        double sum = 0.0;
        for (double ev : spec) sum += ev;
        REQUIRE_THAT(sum, WithinAbs(n * 1.0, 1e-10 * n));
    }
}

TEST_CASE("spectrum metadata flags notable negative eigenvalues") {
    const auto spec = decay_spectrum(build_couplings(EmitterChain::uniform(10, 0, 0.3)));
    const auto meta = spectrum_metadata(spec, 1.0);
    REQUIRE(meta.min_eigenvalue == spec.back());
    REQUIRE(meta.has_notable_negative == (spec.back() < -1e-8));

    const auto mirror = decay_spectrum(build_couplings(EmitterChain::uniform(4, 0, 1.0)));
    REQUIRE_FALSE(spectrum_metadata(mirror, 1.0).has_notable_negative);
}
