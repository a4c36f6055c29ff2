// chain.hpp — emitter chain geometry, waveguide-mediated coupling matrices,
// and the collective decay-rate spectrum.
//
// Unit conventions used throughout the library: lengths in units of the
// transition wavelength lambda0, rates in units of the waveguide decay rate
// gamma, times in units of 1/gamma.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wqed {

// Two emitter ensembles on a 1D chain: sites [0, n_pumped) form the pumped
// ensemble, sites [n_pumped, n_total) the un-pumped one.
struct EmitterChain {
    int n_total{0};
    int n_pumped{0};
    double spacing{1.0};            // lattice constant d, units of lambda0
    double gamma{1.0};              // waveguide decay rate
    double gamma_nr{0.0};           // nonradiative decay rate per emitter
    double gamma_phi{0.0};          // pure dephasing rate per emitter
    std::vector<double> positions;  // x_i, units of lambda0

    int n_unpumped() const { return n_total - n_pumped; }

    // Default geometry x_i = i*d; positions may be overwritten afterwards
    // (disorder sampling passes arbitrary lists).
    static EmitterChain uniform(int n, int n_p, double d, double gamma = 1.0,
                                double gamma_nr = 0.0, double gamma_phi = 0.0) {
        EmitterChain c;
        c.n_total = n;
        c.n_pumped = n_p;
        c.spacing = d;
        c.gamma = gamma;
        c.gamma_nr = gamma_nr;
        c.gamma_phi = gamma_phi;
        c.positions.resize(static_cast<std::size_t>(std::max(n, 0)));
        for (int i = 0; i < n; ++i) c.positions[static_cast<std::size_t>(i)] = i * d;
        c.validate();
        return c;
    }

    void validate() const {
        if (n_total < 1) throw std::invalid_argument("EmitterChain: n_total must be >= 1");
        if (n_pumped < 0 || n_pumped > n_total)
            throw std::invalid_argument("EmitterChain: n_pumped must be in [0, n_total]");
        if (spacing < 0.0) throw std::invalid_argument("EmitterChain: spacing must be >= 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("EmitterChain: gamma must be > 0");
        if (gamma_nr < 0.0) throw std::invalid_argument("EmitterChain: gamma_nr must be >= 0");
        if (gamma_phi < 0.0) throw std::invalid_argument("EmitterChain: gamma_phi must be >= 0");
        if (positions.size() != static_cast<std::size_t>(n_total))
            throw std::invalid_argument("EmitterChain: positions must have n_total entries");
    }
};

// Pairwise interaction matrices: j holds the coherent part J_{m,n}, g the
// dissipative part gamma_{m,n}. Both depend only on |x_m - x_n|, hence are
// real symmetric; g's diagonal is the bare rate gamma.
struct CouplingMatrices {
    Eigen::MatrixXd j;
    Eigen::MatrixXd g;

    int size() const { return static_cast<int>(g.rows()); }
};

inline CouplingMatrices build_couplings(const EmitterChain& chain) {
    chain.validate();
    const int n = chain.n_total;
    const double g0 = chain.gamma;
    CouplingMatrices c;
    c.j = Eigen::MatrixXd::Zero(n, n);
    c.g = Eigen::MatrixXd::Zero(n, n);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int m = 0; m < n; ++m) {
        c.g(m, m) = g0;
        for (int nn = m + 1; nn < n; ++nn) {
            const double x = std::abs(chain.positions[static_cast<std::size_t>(m)] -
                                      chain.positions[static_cast<std::size_t>(nn)]);
            const double jv = 0.5 * g0 * std::sin(two_pi * x);
            const double gv = g0 * std::cos(two_pi * x);
            c.j(m, nn) = jv;
            c.j(nn, m) = jv;
            c.g(m, nn) = gv;
            c.g(nn, m) = gv;
        }
    }
    return c;
}

// Eigenvalues of the dissipative matrix, sorted descending. These are the
// decay rates of the independent collective jump channels; for spacings away
// from half-integer multiples of lambda0 more than one is nonzero. Values may
// be negative for general spacings; they are reported as-is.
inline std::vector<double> decay_spectrum(const CouplingMatrices& c) {
    if (c.g.rows() != c.g.cols()) throw std::invalid_argument("decay_spectrum: g must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.g);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("decay_spectrum: eigendecomposition failed");
    std::vector<double> ev(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<double>());
    return ev;
}

struct SpectrumMetadata {
    double min_eigenvalue{0.0};
    bool has_notable_negative{false};  // any eigenvalue < -1e-8 * gamma
};

inline SpectrumMetadata spectrum_metadata(const std::vector<double>& spectrum, double gamma) {
    SpectrumMetadata meta;
    if (spectrum.empty()) return meta;
    meta.min_eigenvalue = spectrum.back();
    meta.has_notable_negative = meta.min_eigenvalue < -1e-8 * gamma;
    return meta;
}

// Mirror configuration: spacing an integer multiple of lambda0, so the
// coherent coupling vanishes and the dissipative coupling is uniform.
inline bool is_mirror(const CouplingMatrices& c, double gamma, double tol = 1e-10) {
    const double jmax = c.j.cwiseAbs().maxCoeff();
    const double gdev = (c.g.array() - gamma).abs().maxCoeff();
    return jmax <= tol * gamma && gdev <= tol * gamma;
}

}  // namespace wqed
