// darkstates.hpp — symmetrized M-excitation dark states of the mirror
// configuration, their projection hierarchy, closed-form time evolution,
// steady-state projections, and the excitation-transfer sweep built on them.
//
// Conventions: a dark state of M excitations shared between a pumped ensemble
// of n_p emitters and an un-pumped ensemble of n - n_p emitters is expanded as
//   sum_k (-1)^k c_k (Sp^+)^(M-k) (Snp^+)^k |G>,   k = 0..M,
// with integer c_k = binom(n_p-M+k, k) * binom(n-n_p-k, M-k). The projection
// hierarchy couples <rho_D^{M,k}> with rates gamma*C_k, C_k = k(C-k),
// C = n - 2M + 1, and closes after l = n_p - M cascade levels.

#pragma once

#include "wqed/exact.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wqed::darkstates {

using exact::BigInt;
using exact::BigRat;

inline int max_dark_excitation(int n, int n_p) { return std::min(n_p, n - n_p); }

inline void check_dark_args(int n, int n_p, int m) {
    if (n < 1) throw std::invalid_argument("dark_state: n must be >= 1");
    if (n_p < 0 || n_p > n) throw std::invalid_argument("dark_state: n_p must be in [0, n]");
    if (m < 0 || m > max_dark_excitation(n, n_p))
        throw std::invalid_argument("dark_state: M must satisfy 0 <= M <= min(n_p, n - n_p)");
}

// Unnormalized expansion coefficients, signs, and the k-distribution of the
// normalized state (probability that k of the M excitations sit in the
// un-pumped ensemble).
struct DarkStateSpec {
    int n{0};
    int n_p{0};
    int m{0};
    std::vector<BigInt> coeffs;            // signed c_k, k = 0..m
    std::vector<double> k_distribution;    // p_k, sums to 1
    double norm{1.0};                      // sqrt(sum_k alpha_k^2); overflows ~n > 120
    double log_norm_sq{0.0};
    double number_expectation_pumped{0.0};
    double number_expectation_unpumped{0.0};
};

namespace detail {

// Squared norm of (S^+)^j applied to the ground state of an nn-emitter
// ensemble: j! * nn! / (nn - j)!.
inline BigInt ladder_norm_sq(int nn, int j) {
    return exact::factorial(j) * exact::falling_factorial(nn, j);
}

inline double log_ladder_norm_sq(int nn, int j) {
    return exact::log_factorial(j) + exact::log_falling_factorial(nn, j);
}

inline BigInt dark_coeff_abs(int n, int n_p, int m, int k) {
    return exact::binomial(n_p - m + k, k) * exact::binomial(n - n_p - k, m - k);
}

inline double log_dark_coeff_abs(int n, int n_p, int m, int k) {
    return exact::log_binomial(n_p - m + k, k) + exact::log_binomial(n - n_p - k, m - k);
}

// log alpha_k^2 for the unnormalized product-basis amplitude alpha_k.
inline double log_amp_sq(int n, int n_p, int m, int k) {
    const int n_np = n - n_p;
    return 2.0 * log_dark_coeff_abs(n, n_p, m, k) + log_ladder_norm_sq(n_p, m - k) +
           log_ladder_norm_sq(n_np, k);
}

}  // namespace detail

inline DarkStateSpec dark_state(int n, int n_p, int m) {
    check_dark_args(n, n_p, m);
    DarkStateSpec spec;
    spec.n = n;
    spec.n_p = n_p;
    spec.m = m;
    const int n_np = n - n_p;

    spec.coeffs.resize(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        BigInt c = detail::dark_coeff_abs(n, n_p, m, k);
        spec.coeffs[static_cast<std::size_t>(k)] = (k % 2 == 0) ? c : -c;
    }

    spec.k_distribution.resize(static_cast<std::size_t>(m) + 1);
    if (n <= exact::kExactLimit) {
        std::vector<BigInt> amp_sq(static_cast<std::size_t>(m) + 1);
        BigInt norm_sq = 0;
        for (int k = 0; k <= m; ++k) {
            const BigInt c = detail::dark_coeff_abs(n, n_p, m, k);
            amp_sq[static_cast<std::size_t>(k)] =
                c * c * detail::ladder_norm_sq(n_p, m - k) * detail::ladder_norm_sq(n_np, k);
            norm_sq += amp_sq[static_cast<std::size_t>(k)];
        }
        BigRat mean_k = 0;
        for (int k = 0; k <= m; ++k) {
            const BigRat pk(amp_sq[static_cast<std::size_t>(k)], norm_sq);
            spec.k_distribution[static_cast<std::size_t>(k)] = exact::to_double(pk);
            mean_k += pk * k;
        }
        spec.number_expectation_unpumped = exact::to_double(mean_k);
        spec.log_norm_sq = std::log(exact::to_double(norm_sq));  // inf if it overflows double
        spec.norm = std::sqrt(exact::to_double(norm_sq));
    } else {
        std::vector<double> log_amp(static_cast<std::size_t>(m) + 1);
        for (int k = 0; k <= m; ++k)
            log_amp[static_cast<std::size_t>(k)] = detail::log_amp_sq(n, n_p, m, k);
        spec.log_norm_sq = exact::log_sum_exp(log_amp);
        exact::KahanSum mean_k;
        for (int k = 0; k <= m; ++k) {
            const double pk = std::exp(log_amp[static_cast<std::size_t>(k)] - spec.log_norm_sq);
            spec.k_distribution[static_cast<std::size_t>(k)] = pk;
            mean_k.add(k * pk);
        }
        spec.number_expectation_unpumped = mean_k.value();
        spec.norm = std::exp(0.5 * spec.log_norm_sq);
    }
    spec.number_expectation_pumped = m - spec.number_expectation_unpumped;
    return spec;
}

// Exact check of the appendix recursion r_k / r_{k-1} =
// (n_p - M + k)(M - k + 1) / (k (n - n_p - k + 1)) on the stored coefficients.
inline bool verify_recursion(const DarkStateSpec& spec) {
    const int n = spec.n, n_p = spec.n_p, m = spec.m;
    if (static_cast<int>(spec.coeffs.size()) != m + 1) return false;
    for (int k = 1; k <= m; ++k) {
        const BigInt prev = abs(spec.coeffs[static_cast<std::size_t>(k - 1)]);
        const BigInt cur = abs(spec.coeffs[static_cast<std::size_t>(k)]);
        const BigInt lhs = cur * k * (n - n_p - k + 1);
        const BigInt rhs = prev * (n_p - m + k) * (m - k + 1);
        if (lhs != rhs) return false;
        // signs must alternate
        const bool neg = spec.coeffs[static_cast<std::size_t>(k)] < 0;
        if (neg != (k % 2 == 1)) return false;
    }
    return spec.coeffs[0] > 0;
}

// Cascade rates gamma * C_k, k = 0..count-1, with C = n - 2M + 1.
inline std::vector<double> hierarchy_rates(int n, int m, int count, double gamma = 1.0) {
    const long c = n - 2L * m + 1;
    std::vector<double> rates(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) rates[static_cast<std::size_t>(k)] = gamma * k * (c - k);
    return rates;
}

// The cascade data for one (n, n_p, M): C = n - 2M + 1, the integer rates
// C_k = k(C - k) for k = 0..l with l = n_p - M, and the initial weight of the
// top level. C_0 = 0 always; the C_k are positive and pairwise distinct for
// n_p <= n/2.
struct HierarchyCoefficients {
    int m{0};
    long big_c{0};
    int ell{0};
    std::vector<long> c_k;
    double initial_top{0.0};
};

inline HierarchyCoefficients hierarchy_coefficients(int n, int n_p, int m);

namespace detail {

inline double log_initial_top(int n, int n_p, int m) {
    const int ell = n_p - m;
    const double log_norm_sq = [&] {
        std::vector<double> v(static_cast<std::size_t>(m) + 1);
        for (int k = 0; k <= m; ++k) v[static_cast<std::size_t>(k)] = log_amp_sq(n, n_p, m, k);
        return exact::log_sum_exp(v);
    }();
    return exact::log_factorial(ell) + exact::log_falling_factorial(n_p, ell) +
           log_amp_sq(n, n_p, m, 0) - log_norm_sq;
}

inline BigRat exact_initial_top(int n, int n_p, int m) {
    const int ell = n_p - m;
    const int n_np = n - n_p;
    BigInt norm_sq = 0;
    for (int k = 0; k <= m; ++k) {
        const BigInt c = dark_coeff_abs(n, n_p, m, k);
        norm_sq += c * c * ladder_norm_sq(n_p, m - k) * ladder_norm_sq(n_np, k);
    }
    const BigInt c0 = dark_coeff_abs(n, n_p, m, 0);
    const BigInt amp0_sq = c0 * c0 * ladder_norm_sq(n_p, m);
    return BigRat(exact::factorial(ell) * exact::falling_factorial(n_p, ell) * amp0_sq, norm_sq);
}

}  // namespace detail

// <rho_D^{M, l}> at t = 0 with l = n_p - M: the squared overlap of S^l applied
// to the fully-inverted-pumped product state with the dark state. Only the
// top cascade level is populated initially; S^k |Psi(0)> carries n_p - k
// excitations, which matches M excitations only at k = l.
inline double initial_top_projection(int n, int n_p, int m) {
    check_dark_args(n, n_p, m);
    if (n <= exact::kExactLimit) return exact::to_double(detail::exact_initial_top(n, n_p, m));
    return std::exp(detail::log_initial_top(n, n_p, m));
}

inline HierarchyCoefficients hierarchy_coefficients(int n, int n_p, int m) {
    check_dark_args(n, n_p, m);
    HierarchyCoefficients hc;
    hc.m = m;
    hc.big_c = n - 2L * m + 1;
    hc.ell = n_p - m;
    hc.c_k.resize(static_cast<std::size_t>(hc.ell) + 1);
    for (int k = 0; k <= hc.ell; ++k) hc.c_k[static_cast<std::size_t>(k)] = k * (hc.big_c - k);
    hc.initial_top = initial_top_projection(n, n_p, m);
    return hc;
}

// Closed-form projection trajectory (valid for n_p <= n/2, where the cascade
// rates are all distinct). Partial-fraction denominators are products of the
// exact integers (k - j)(C - k - j), evaluated in log-magnitude + sign form.
inline std::vector<double> projection_trajectory(int n, int n_p, int m,
                                                 const std::vector<double>& times,
                                                 double gamma = 1.0) {
    check_dark_args(n, n_p, m);
    if (2 * n_p > n)
        throw std::invalid_argument(
            "projection_trajectory: closed form requires n_p <= n/2 "
            "(degenerate cascade rates otherwise; use hierarchy_integrate)");
    const int ell = n_p - m;
    const long c = n - 2L * m + 1;
    const double log_p0 = (n <= exact::kExactLimit)
                              ? std::log(exact::to_double(detail::exact_initial_top(n, n_p, m)))
                              : detail::log_initial_top(n, n_p, m);

    std::vector<double> log_coeff(static_cast<std::size_t>(ell) + 1);
    std::vector<double> sign_coeff(static_cast<std::size_t>(ell) + 1);
    std::vector<double> rate(static_cast<std::size_t>(ell) + 1);
    for (int k = 0; k <= ell; ++k) {
        double logden = 0.0;
        double sign = (ell % 2 == 0) ? 1.0 : -1.0;
        for (int j = 0; j <= ell; ++j) {
            if (j == k) continue;
            const long diff = static_cast<long>(k - j) * (c - k - j);
            if (diff == 0)
                throw std::logic_error("projection_trajectory: degenerate cascade rates");
            logden += std::log(std::abs(static_cast<double>(diff)));
            if (diff < 0) sign = -sign;
        }
        log_coeff[static_cast<std::size_t>(k)] = -logden;
        sign_coeff[static_cast<std::size_t>(k)] = sign;
        rate[static_cast<std::size_t>(k)] = gamma * k * (c - k);
    }

    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (t < 0) throw std::invalid_argument("projection_trajectory: times must be >= 0");
        exact::KahanSum s;
        for (int k = 0; k <= ell; ++k)
            s.add(sign_coeff[static_cast<std::size_t>(k)] *
                  std::exp(log_p0 + log_coeff[static_cast<std::size_t>(k)] -
                           rate[static_cast<std::size_t>(k)] * t));
        out.push_back(s.value());
    }
    return out;
}

// Fixed-step RK4 integration of the cascade
//   d<rho^{M,k}>/dt = -gamma C_k <rho^{M,k}> + gamma <rho^{M,k+1}>,
// initial condition all weight at the top level k = l. Valid for any n_p,
// including n_p > n/2 where the closed form does not apply. Returns
// (t, <rho_D^M>) at every step.
inline std::vector<std::pair<double, double>> hierarchy_integrate(int n, int n_p, int m,
                                                                  double t_final, double dt,
                                                                  double gamma = 1.0) {
    check_dark_args(n, n_p, m);
    if (!(dt > 0)) throw std::invalid_argument("hierarchy_integrate: dt must be > 0");
    if (t_final < 0) throw std::invalid_argument("hierarchy_integrate: t_final must be >= 0");
    const HierarchyCoefficients hc = hierarchy_coefficients(n, n_p, m);
    const int ell = hc.ell;
    std::vector<double> rates(static_cast<std::size_t>(ell) + 1);
    for (int k = 0; k <= ell; ++k)
        rates[static_cast<std::size_t>(k)] = gamma * hc.c_k[static_cast<std::size_t>(k)];

    Eigen::VectorXd x = Eigen::VectorXd::Zero(ell + 1);
    x[ell] = hc.initial_top;

    const auto rhs = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd dy(ell + 1);
        for (int k = 0; k <= ell; ++k) {
            dy[k] = -rates[static_cast<std::size_t>(k)] * y[k];
            if (k < ell) dy[k] += gamma * y[k + 1];
        }
        return dy;
    };

    const long nsteps = std::lround(std::ceil(t_final / dt - 1e-12));
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(nsteps) + 1);
    out.emplace_back(0.0, x[0]);
    for (long step = 0; step < nsteps; ++step) {
        const Eigen::VectorXd k1 = rhs(x);
        const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = rhs(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.emplace_back((step + 1) * dt, x[0]);
    }
    return out;
}

// Steady-state projection. For n_p <= n/2 this is the t -> infinity limit of
// the cascade, P0 * prod_{k=1..l} 1/C_k; for n_p > n/2 the steady projections
// coincide with those of the complementary configuration (n, n - n_p).
inline double steady_projection(int n, int n_p, int m) {
    check_dark_args(n, n_p, m);
    if (2 * n_p > n) return steady_projection(n, n - n_p, m);
    const int ell = n_p - m;
    const long c = n - 2L * m + 1;
    if (n <= exact::kExactLimit) {
        BigRat p = detail::exact_initial_top(n, n_p, m);
        for (int k = 1; k <= ell; ++k) p /= BigInt(static_cast<long>(k) * (c - k));
        return exact::to_double(p);
    }
    double log_p = detail::log_initial_top(n, n_p, m);
    for (int k = 1; k <= ell; ++k) log_p -= std::log(static_cast<double>(k) * (c - k));
    return std::exp(log_p);
}

// Steady mean excitation per ensemble: sum over M of the steady projection
// weighted by each dark state's per-ensemble number expectation. Coherences
// between different-M dark states carry no excitation-number weight.
inline std::pair<double, double> steady_mean_excitations(int n, int n_p) {
    if (n < 1 || n_p < 0 || n_p > n)
        throw std::invalid_argument("steady_mean_excitations: invalid (n, n_p)");
    exact::KahanSum pumped, unpumped;
    const int mmax = max_dark_excitation(n, n_p);
    for (int m = 0; m <= mmax; ++m) {
        const double p = steady_projection(n, n_p, m);
        const DarkStateSpec spec = dark_state(n, n_p, m);
        pumped.add(p * spec.number_expectation_pumped);
        unpumped.add(p * spec.number_expectation_unpumped);
    }
    return {pumped.value(), unpumped.value()};
}

// Fraction of the initially deposited excitations that ends up stored in the
// un-pumped ensemble.
inline double transfer_ratio(int n, int n_p) {
    if (n_p < 1) throw std::invalid_argument("transfer_ratio: n_p must be >= 1");
    if (n_p > n) throw std::invalid_argument("transfer_ratio: n_p must be <= n");
    return steady_mean_excitations(n, n_p).second / n_p;
}

struct OptimalPumping {
    double t_max{0.0};
    int n_p_star{0};
};

// Exhaustive scan over n_p in [1, n]; ties break toward smaller n_p.
inline OptimalPumping optimal_pumping(int n) {
    if (n < 2) throw std::invalid_argument("optimal_pumping: n must be >= 2");
    OptimalPumping best;
    best.n_p_star = 1;
    best.t_max = transfer_ratio(n, 1);
    for (int n_p = 2; n_p <= n; ++n_p) {
        const double t = transfer_ratio(n, n_p);
        if (t > best.t_max) {
            best.t_max = t;
            best.n_p_star = n_p;
        }
    }
    return best;
}

// Normalized amplitudes on the two-ensemble product-Dicke basis, index
// (a, b) -> a * (n_np + 1) + b with a excitations pumped, b un-pumped. The
// dark state occupies (a, b) = (M - k, k).
inline Eigen::VectorXd dicke_amplitudes(const DarkStateSpec& spec) {
    const int n_np = spec.n - spec.n_p;
    Eigen::VectorXd v = Eigen::VectorXd::Zero((spec.n_p + 1) * (n_np + 1));
    for (int k = 0; k <= spec.m; ++k) {
        const double mag = std::sqrt(spec.k_distribution[static_cast<std::size_t>(k)]);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        v[(spec.m - k) * (n_np + 1) + k] = sign * mag;
    }
    return v;
}

// Expansion over the full 2^n computational basis (bit i set = emitter i
// excited; pumped sites are bits [0, n_p)). Memory guard at n <= 24.
inline Eigen::VectorXcd expand_full(const DarkStateSpec& spec) {
    if (spec.n > 24) throw std::invalid_argument("expand_full: n too large for full expansion");
    const int n = spec.n, n_p = spec.n_p, n_np = n - n_p;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(1) << n);
    const std::uint32_t pumped_mask = (n_p == 32) ? ~0u : ((1u << n_p) - 1u);
    for (std::uint32_t b = 0; b < (1u << n); ++b) {
        const int a_exc = std::popcount(b & pumped_mask);
        const int b_exc = std::popcount(b) - a_exc;
        if (a_exc + b_exc != spec.m || b_exc > spec.m) continue;
        const int k = b_exc;
        if (spec.m - k > n_p || k > n_np) continue;
        const double mag = std::sqrt(spec.k_distribution[static_cast<std::size_t>(k)] /
                                     (exact::to_double(exact::binomial(n_p, spec.m - k)) *
                                      exact::to_double(exact::binomial(n_np, k))));
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        v[b] = sign * mag;
    }
    return v;
}

}  // namespace wqed::darkstates
