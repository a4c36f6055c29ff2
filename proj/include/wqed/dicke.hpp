// dicke.hpp — permutation-symmetric machinery for two emitter ensembles:
// collective ladder algebra, the (n_p+1) x (n_np+1) product-Dicke basis, and
// the symmetry-reduced master-equation solver for the mirror configuration.

#pragma once

#include "wqed/chain.hpp"
#include "wqed/trajectory.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace wqed::dicke {

using Complex = std::complex<double>;

// A_m = sqrt((n/2)(n/2+1) - m(m+1)); S^+|n/2, m> = A_m |n/2, m+1>,
// S|n/2, m> = A_{m-1}|n/2, m-1>. m is integer or half-integer with m + n/2
// integral and |m| <= n/2.
inline double ladder_coeff(int n, double m) {
    if (n < 0) throw std::invalid_argument("ladder_coeff: n must be >= 0");
    const double j = 0.5 * n;
    const double steps = m + j;  // excitation count, must be a nonnegative integer
    if (std::abs(steps - std::round(steps)) > 1e-9 || steps < -1e-9 || m > j + 1e-9)
        throw std::invalid_argument("ladder_coeff: invalid (n, m) combination");
    const double val = j * (j + 1.0) - m * (m + 1.0);
    return std::sqrt(std::max(val, 0.0));
}

// Product basis |n_p/2, -n_p/2 + a> (x) |n_np/2, -n_np/2 + b>, flattened as
// index = a * (n_np + 1) + b.
struct ProductBasis {
    int n_p{0};
    int n_np{0};

    ProductBasis(int np, int nnp) : n_p(np), n_np(nnp) {
        if (np < 0 || nnp < 0) throw std::invalid_argument("ProductBasis: negative ensemble size");
    }
    explicit ProductBasis(const EmitterChain& chain)
        : ProductBasis(chain.n_pumped, chain.n_unpumped()) {}

    int dim() const { return (n_p + 1) * (n_np + 1); }
    int index(int a, int b) const { return a * (n_np + 1) + b; }
    int a_of(int idx) const { return idx / (n_np + 1); }
    int b_of(int idx) const { return idx % (n_np + 1); }
};

enum class Which { pumped, unpumped, total };

// Collective lowering operator on the product basis; matrix elements are the
// ladder coefficients of the addressed ensemble.
inline Eigen::SparseMatrix<double> collective_lowering(const ProductBasis& basis, Which which) {
    std::vector<Eigen::Triplet<double>> trip;
    const auto add_pumped = [&] {
        for (int a = 1; a <= basis.n_p; ++a) {
            const double amp = ladder_coeff(basis.n_p, -0.5 * basis.n_p + a - 1);
            for (int b = 0; b <= basis.n_np; ++b)
                trip.emplace_back(basis.index(a - 1, b), basis.index(a, b), amp);
        }
    };
    const auto add_unpumped = [&] {
        for (int b = 1; b <= basis.n_np; ++b) {
            const double amp = ladder_coeff(basis.n_np, -0.5 * basis.n_np + b - 1);
            for (int a = 0; a <= basis.n_p; ++a)
                trip.emplace_back(basis.index(a, b - 1), basis.index(a, b), amp);
        }
    };
    if (which == Which::pumped || which == Which::total) add_pumped();
    if (which == Which::unpumped || which == Which::total) add_unpumped();
    Eigen::SparseMatrix<double> s(basis.dim(), basis.dim());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

// S_z of the whole chain: diagonal with eigenvalue (a + b) - n/2.
inline Eigen::SparseMatrix<double> sz_total(const ProductBasis& basis) {
    const int n = basis.n_p + basis.n_np;
    std::vector<Eigen::Triplet<double>> trip;
    for (int idx = 0; idx < basis.dim(); ++idx)
        trip.emplace_back(idx, idx, basis.a_of(idx) + basis.b_of(idx) - 0.5 * n);
    Eigen::SparseMatrix<double> s(basis.dim(), basis.dim());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

// |Psi(0)>: pumped ensemble fully excited, un-pumped in the ground state.
inline Eigen::VectorXcd initial_state(const EmitterChain& chain) {
    chain.validate();
    const ProductBasis basis(chain);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis.dim());
    v[basis.index(chain.n_pumped, 0)] = 1.0;
    return v;
}

// ---------------------------- reduced evolution -----------------------------

struct ReducedResult {
    Trajectory trajectory;
    Eigen::MatrixXcd final_state;
    double final_time{0.0};
};

using ReducedObserver = Observer<Eigen::MatrixXcd>;

namespace observers_reduced {

inline ReducedObserver mean_pumped(const ProductBasis& basis) {
    return {"n_pumped", [basis](const Eigen::MatrixXcd& rho) {
                double s = 0.0;
                for (int i = 0; i < basis.dim(); ++i) s += basis.a_of(i) * rho(i, i).real();
                return s;
            }};
}

inline ReducedObserver mean_unpumped(const ProductBasis& basis) {
    return {"n_unpumped", [basis](const Eigen::MatrixXcd& rho) {
                double s = 0.0;
                for (int i = 0; i < basis.dim(); ++i) s += basis.b_of(i) * rho(i, i).real();
                return s;
            }};
}

inline ReducedObserver trace() {
    return {"trace", [](const Eigen::MatrixXcd& rho) { return rho.trace().real(); }};
}

inline ReducedObserver projection(const std::string& name, const Eigen::VectorXd& target) {
    return {name, [target](const Eigen::MatrixXcd& rho) {
                const Complex v = target.cast<Complex>().dot(rho * target.cast<Complex>());
                return v.real();
            }};
}

}  // namespace observers_reduced

// Mirror-configuration master equation on the product basis:
//   rho' = -(gamma/2)(S^+S rho + rho S^+S) + gamma S rho S^+,  S = S_p + S_np.
// Positional disorder breaks permutation symmetry and must use the full-space
// solver. Uniform single-emitter dephasing and nonradiative decay do not
// close on the fully symmetric product sector either (local jumps populate
// lower-symmetry irreps), so gamma_phi > 0 and gamma_nr > 0 are rejected and
// deferred to the full-space solver.
inline ReducedResult reduced_evolve(const Eigen::MatrixXcd& rho0, const EmitterChain& chain,
                                    const EvolveOptions& opt,
                                    const std::vector<ReducedObserver>& observers) {
    chain.validate();
    if (chain.gamma_phi > 0.0)
        throw std::invalid_argument(
            "reduced_evolve: dephasing leaves the symmetric product sector; use the full-space "
            "solver");
    if (chain.gamma_nr > 0.0)
        throw std::invalid_argument(
            "reduced_evolve: nonradiative decay leaves the symmetric product sector; use the "
            "full-space solver");
    const CouplingMatrices c = build_couplings(chain);
    if (!is_mirror(c, chain.gamma))
        throw std::invalid_argument("reduced_evolve: non-mirror chain rejected");

    const ProductBasis basis(chain);
    const int dim = basis.dim();
    if (rho0.rows() != dim || rho0.cols() != dim)
        throw std::invalid_argument("reduced_evolve: state dimension mismatch");
    if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("reduced_evolve: initial state must be Hermitian");

    const double gamma = chain.gamma;
    const Eigen::SparseMatrix<double> s_low_d = collective_lowering(basis, Which::total);
    const Eigen::SparseMatrix<Complex> s_low = s_low_d.cast<Complex>();
    const Eigen::SparseMatrix<Complex> s_raise = Eigen::SparseMatrix<Complex>(s_low.adjoint());
    const Eigen::SparseMatrix<Complex> ssd = s_raise * s_low;  // S^+ S

    Eigen::MatrixXcd tmp_low(dim, dim);
    const auto rhs = [&](const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
        out.noalias() = ssd * rho;
        out = -0.5 * gamma * (out + out.adjoint().eval());
        tmp_low.noalias() = s_low * rho;
        out.noalias() += gamma * (tmp_low * s_raise);
    };

    const double dt = (opt.dt > 0) ? opt.dt : 0.01 / (chain.n_total * gamma);
    const double horizon = opt.detect_steady ? opt.t_max : opt.t_final;
    const long nsteps = detail::step_count(horizon, dt);
    const int stride = std::max(opt.stride, 1);

    ReducedResult result;
    Trajectory& traj = result.trajectory;
    traj.steady.requested = opt.detect_steady;
    for (const auto& ob : observers) traj.names.push_back(ob.first);
    traj.series.resize(observers.size());

    Eigen::MatrixXcd rho = rho0;
    Eigen::MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), work(dim, dim);

    const auto sample = [&](long step) -> bool {
        const double t = step * dt;
        traj.times.push_back(t);
        for (std::size_t i = 0; i < observers.size(); ++i)
            traj.series[i].push_back(observers[i].second(rho));
        const double trace_dev = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
        const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        traj.invariants.max_trace_dev = std::max(traj.invariants.max_trace_dev, trace_dev);
        traj.invariants.max_herm_dev = std::max(traj.invariants.max_herm_dev, herm_dev);
        if (trace_dev > opt.trace_abort)
            throw SolverAbort("reduced_evolve: trace drift " + std::to_string(trace_dev) +
                              " at t = " + std::to_string(t) +
                              "; decrease dt (currently " + std::to_string(dt) + ")");
        if (opt.detect_steady) {
            rhs(rho, work);
            const double rhs_max = work.cwiseAbs().maxCoeff();
            traj.steady.final_rhs_max = rhs_max;
            if (rhs_max < opt.steady_tol * gamma) {
                traj.steady.detected = true;
                traj.steady.criterion = "rhs_norm";
                return true;
            }
        }
        return false;
    };

    bool stopped = sample(0);
    long step = 0;
    while (!stopped && step < nsteps) {
        rhs(rho, k1);
        work = rho + (0.5 * dt) * k1;
        rhs(work, k2);
        work = rho + (0.5 * dt) * k2;
        rhs(work, k3);
        work = rho + dt * k3;
        rhs(work, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++step;
        if (step % stride == 0 || step == nsteps) stopped = sample(step);
    }

    if (opt.detect_steady && !traj.steady.detected) {
        traj.steady.criterion = "t_max";
    } else if (!opt.detect_steady) {
        traj.steady.criterion = "t_final";
    }
    traj.steady.t_end = step * dt;

    if (opt.positivity_check) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint().eval()));
        traj.invariants.min_eigenvalue = es.eigenvalues().minCoeff();
        traj.invariants.positivity_checked = true;
    }

    result.final_state = std::move(rho);
    result.final_time = step * dt;
    return result;
}

inline ReducedResult reduced_evolve(const Eigen::VectorXcd& psi0, const EmitterChain& chain,
                                    const EvolveOptions& opt,
                                    const std::vector<ReducedObserver>& observers) {
    const Eigen::MatrixXcd rho0 = psi0 * psi0.adjoint();
    return reduced_evolve(rho0, chain, opt, observers);
}

}  // namespace wqed::dicke
