// fullspace.hpp — brute-force master-equation solver on the full 2^n space.
//
// States are stored as density-matrix blocks between excitation-number
// sectors. The effective Hamiltonian conserves excitation number and every
// dissipative channel lowers it by exactly one on both sides, so the set of
// populated blocks only ever flows toward lower sectors; evolving the
// populated blocks is exactly equivalent to integrating the full 2^n x 2^n
// matrix (the unit tests check this against the plain dense right-hand side).
// Basis convention: bit i set = emitter i excited; pumped sites are bits
// [0, n_pumped).

#pragma once

#include "wqed/chain.hpp"
#include "wqed/trajectory.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wqed::fullspace {

using Complex = std::complex<double>;
using SparseC = Eigen::SparseMatrix<Complex>;

// Dense-oracle memory guard.
inline constexpr int kMaxSites = 12;

inline void check_site_count(int n) {
    if (n < 1) throw std::invalid_argument("fullspace: n must be >= 1");
    if (n > kMaxSites)
        throw std::invalid_argument("fullspace: n = " + std::to_string(n) +
                                    " exceeds the dense-solver limit of " +
                                    std::to_string(kMaxSites));
}

// ------------------------------- basis --------------------------------------

struct SectorBasis {
    int n{0};
    std::vector<std::vector<std::uint32_t>> states;  // states[e]: ascending bitmasks
    std::vector<int> index_in_sector;                // flat lookup over 2^n

    static SectorBasis build(int n) {
        check_site_count(n);
        SectorBasis b;
        b.n = n;
        b.states.resize(static_cast<std::size_t>(n) + 1);
        b.index_in_sector.resize(std::size_t{1} << n);
        for (std::uint32_t s = 0; s < (1u << n); ++s) {
            const int e = std::popcount(s);
            b.index_in_sector[s] = static_cast<int>(b.states[static_cast<std::size_t>(e)].size());
            b.states[static_cast<std::size_t>(e)].push_back(s);
        }
        return b;
    }

    int dim(int e) const { return static_cast<int>(states[static_cast<std::size_t>(e)].size()); }
};

// --------------------------- full-space state --------------------------------

struct DenseState {
    Eigen::MatrixXcd rho;
    int n{0};
    double time{0.0};

    static DenseState from_pure(const Eigen::VectorXcd& psi, int n) {
        check_site_count(n);
        if (psi.size() != (Eigen::Index{1} << n))
            throw std::invalid_argument("DenseState: vector dimension mismatch");
        DenseState s;
        s.n = n;
        s.rho = psi * psi.adjoint();
        return s;
    }

    // |e>^(n_p) (x) |g>^(n_np)
    static DenseState product_initial(const EmitterChain& chain) {
        chain.validate();
        check_site_count(chain.n_total);
        const std::uint32_t mask =
            (chain.n_pumped == 0) ? 0u : ((1u << chain.n_pumped) - 1u);
        DenseState s;
        s.n = chain.n_total;
        s.rho = Eigen::MatrixXcd::Zero(Eigen::Index{1} << s.n, Eigen::Index{1} << s.n);
        s.rho(mask, mask) = 1.0;
        return s;
    }

    double trace_deviation() const { return std::abs(rho.trace() - Complex(1.0, 0.0)); }
    double herm_deviation() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint().eval()));
        return es.eigenvalues().minCoeff();
    }
};

// --------------------------- full-space operators ----------------------------

inline SparseC site_lowering(int n, int site) {
    check_site_count(n);
    if (site < 0 || site >= n) throw std::invalid_argument("site_lowering: site out of range");
    std::vector<Eigen::Triplet<Complex>> trip;
    const std::uint32_t bit = 1u << site;
    for (std::uint32_t b = 0; b < (1u << n); ++b)
        if (b & bit) trip.emplace_back(static_cast<int>(b & ~bit), static_cast<int>(b), 1.0);
    SparseC s(Eigen::Index{1} << n, Eigen::Index{1} << n);
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

struct EffectiveHamiltonian {
    SparseC h;
    int n{0};
};

// H_eff = sum_{m,n} (J_{m,n} - i gamma_{m,n}/2) sigma_m^+ sigma_n
//         - i (gamma_nr + 2 gamma_phi)/2 * sum_n sigma_n^+ sigma_n.
inline EffectiveHamiltonian build_h_eff(const EmitterChain& chain, const CouplingMatrices& c) {
    chain.validate();
    check_site_count(chain.n_total);
    if (c.size() != chain.n_total)
        throw std::invalid_argument("build_h_eff: chain/coupling dimension mismatch");
    const int n = chain.n_total;
    const double imp = chain.gamma_nr + 2.0 * chain.gamma_phi;
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::uint32_t b = 0; b < (1u << n); ++b) {
        Complex diag(0.0, 0.0);
        for (int m = 0; m < n; ++m) {
            if (!(b & (1u << m))) continue;
            diag += Complex(c.j(m, m), -0.5 * (c.g(m, m) + imp));
            for (int k = 0; k < n; ++k) {
                if (k == m || (b & (1u << k))) continue;
                // sigma_k^+ sigma_m moves the excitation from site m to site k
                const std::uint32_t b2 = (b & ~(1u << m)) | (1u << k);
                trip.emplace_back(static_cast<int>(b2), static_cast<int>(b),
                                  Complex(c.j(k, m), -0.5 * c.g(k, m)));
            }
        }
        if (diag != Complex(0.0, 0.0))
            trip.emplace_back(static_cast<int>(b), static_cast<int>(b), diag);
    }
    EffectiveHamiltonian h;
    h.n = n;
    h.h.resize(Eigen::Index{1} << n, Eigen::Index{1} << n);
    h.h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

// Plain dense right-hand side of the master equation,
//   rho' = -i(H rho - rho H^+) + sum_{m,n} gamma_{m,n} sigma_m rho sigma_n^+
//          + gamma_nr sum_n sigma_n rho sigma_n^+
//          + 2 gamma_phi sum_n (sigma_n^+ sigma_n) rho (sigma_n^+ sigma_n).
// This is the reference implementation the blocked generator is tested
// against; it is used directly for one-shot evaluations.
inline Eigen::MatrixXcd lindblad_rhs(const DenseState& state, const EffectiveHamiltonian& heff,
                                     const CouplingMatrices& c, const EmitterChain& chain) {
    const int n = chain.n_total;
    if (state.n != n || heff.n != n || c.size() != n)
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const Eigen::MatrixXcd& rho = state.rho;
    const Eigen::Index dim = rho.rows();

    const SparseC h_adj = SparseC(heff.h.adjoint());
    Eigen::MatrixXcd out = Complex(0.0, -1.0) * (heff.h * rho - rho * h_adj);

    std::vector<SparseC> sigma;
    sigma.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) sigma.push_back(site_lowering(n, m));

    for (int m = 0; m < n; ++m) {
        // K_m = sum_k gamma_{m,k} sigma_k, so the pair sum is sum_m sigma_m rho K_m^+
        std::vector<Eigen::Triplet<Complex>> trip;
        for (int k = 0; k < n; ++k) {
            const double w = c.g(m, k);
            for (int outer = 0; outer < sigma[static_cast<std::size_t>(k)].outerSize(); ++outer)
                for (SparseC::InnerIterator it(sigma[static_cast<std::size_t>(k)], outer); it;
                     ++it)
                    trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                      w * it.value());
        }
        SparseC km(dim, dim);
        km.setFromTriplets(trip.begin(), trip.end());
        const Eigen::MatrixXcd bm = sigma[static_cast<std::size_t>(m)] * rho;
        out.noalias() += bm * SparseC(km.adjoint());
    }

    if (chain.gamma_nr > 0.0) {
        for (int m = 0; m < n; ++m) {
            const Eigen::MatrixXcd bm = sigma[static_cast<std::size_t>(m)] * rho;
            out.noalias() += chain.gamma_nr * (bm * SparseC(sigma[static_cast<std::size_t>(m)].adjoint()));
        }
    }
    if (chain.gamma_phi > 0.0) {
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                out(i, j) += 2.0 * chain.gamma_phi *
                             std::popcount(static_cast<std::uint32_t>(i) &
                                           static_cast<std::uint32_t>(j)) *
                             rho(i, j);
    }
    return out;
}

// ------------------------------ blocked state --------------------------------

using BlockKey = std::pair<int, int>;  // (row sector, column sector)

struct BlockedDensity {
    const SectorBasis* basis{nullptr};
    std::map<BlockKey, Eigen::MatrixXcd> block;
    bool hermitian_stripe{true};  // only diagonal blocks, each Hermitian

    // Slice a dense matrix into sector blocks, keeping nonzero ones and
    // closing the set downward so dissipative flow always has a target block.
    static BlockedDensity from_dense(const Eigen::MatrixXcd& rho, const SectorBasis& basis) {
        const Eigen::Index dim = Eigen::Index{1} << basis.n;
        if (rho.rows() != dim || rho.cols() != dim)
            throw std::invalid_argument("BlockedDensity: dimension mismatch");
        BlockedDensity s;
        s.basis = &basis;
        std::vector<BlockKey> seeds;
        for (int e = 0; e <= basis.n; ++e) {
            for (int ep = 0; ep <= basis.n; ++ep) {
                Eigen::MatrixXcd blk(basis.dim(e), basis.dim(ep));
                for (int i = 0; i < basis.dim(e); ++i)
                    for (int j = 0; j < basis.dim(ep); ++j)
                        blk(i, j) = rho(basis.states[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)],
                                        basis.states[static_cast<std::size_t>(ep)][static_cast<std::size_t>(j)]);
                if (blk.cwiseAbs().maxCoeff() > 0.0) {
                    s.block.emplace(BlockKey{e, ep}, std::move(blk));
                    seeds.push_back({e, ep});
                }
            }
        }
        // downward closure
        for (auto [e, ep] : seeds)
            while (e > 0 && ep > 0) {
                --e;
                --ep;
                s.block.try_emplace(BlockKey{e, ep},
                                    Eigen::MatrixXcd::Zero(basis.dim(e), basis.dim(ep)));
            }
        for (const auto& [key, blk] : s.block) {
            if (key.first != key.second) s.hermitian_stripe = false;
            (void)blk;
        }
        return s;
    }

    Eigen::MatrixXcd to_dense() const {
        const Eigen::Index dim = Eigen::Index{1} << basis->n;
        Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
        for (const auto& [key, blk] : block) {
            const auto& rows = basis->states[static_cast<std::size_t>(key.first)];
            const auto& cols = basis->states[static_cast<std::size_t>(key.second)];
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < cols.size(); ++j)
                    rho(rows[i], cols[j]) = blk(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(j));
        }
        return rho;
    }

    void set_zero() {
        for (auto& [key, blk] : block) blk.setZero();
    }
    double max_abs() const {
        double m = 0.0;
        for (const auto& [key, blk] : block)
            if (blk.size() > 0) m = std::max(m, blk.cwiseAbs().maxCoeff());
        return m;
    }
    double trace_real() const {
        double t = 0.0;
        for (const auto& [key, blk] : block)
            if (key.first == key.second) t += blk.trace().real();
        return t;
    }
    double trace_imag() const {
        double t = 0.0;
        for (const auto& [key, blk] : block)
            if (key.first == key.second) t += blk.trace().imag();
        return t;
    }
    double herm_deviation() const {
        double m = 0.0;
        for (const auto& [key, blk] : block) {
            if (key.first == key.second) {
                m = std::max(m, (blk - blk.adjoint().eval()).cwiseAbs().maxCoeff());
            } else {
                const auto it = block.find(BlockKey{key.second, key.first});
                if (it == block.end())
                    m = std::max(m, blk.cwiseAbs().maxCoeff());
                else
                    m = std::max(m, (blk - it->second.adjoint().eval()).cwiseAbs().maxCoeff());
            }
        }
        return m;
    }
    // Minimum eigenvalue; cheap per-sector solve when the state is block
    // diagonal, full assembly otherwise.
    double min_eigenvalue() const {
        bool diagonal = true;
        for (const auto& [key, blk] : block) {
            (void)blk;
            if (key.first != key.second) diagonal = false;
        }
        if (diagonal) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& [key, blk] : block) {
                (void)key;
                if (blk.rows() == 0) continue;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                    0.5 * (blk + blk.adjoint().eval()));
                m = std::min(m, es.eigenvalues().minCoeff());
            }
            return m;
        }
        const Eigen::MatrixXcd rho = to_dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint().eval()));
        return es.eigenvalues().minCoeff();
    }
};

inline void bd_copy(BlockedDensity& dst, const BlockedDensity& src) {
    for (auto& [key, blk] : dst.block) blk = src.block.at(key);
}

inline void bd_axpy(BlockedDensity& y, double a, const BlockedDensity& x) {
    for (auto& [key, blk] : y.block) blk += a * x.block.at(key);
}

// ------------------------------- generator -----------------------------------

// Precomputed sector-blocked form of the master-equation generator.
struct Generator {
    int n{0};
    int e_max{0};
    double gamma{1.0};
    double gamma_nr{0.0};
    double gamma_phi{0.0};
    const SectorBasis* basis{nullptr};

    std::vector<SparseC> h;      // per-sector Hamiltonian block (square)
    std::vector<SparseC> h_adj;  // adjoints, for non-Hermitian-stripe states

    struct Channel {
        double weight{0.0};
        std::vector<SparseC> op;      // op[e]: sector e -> e-1
        std::vector<SparseC> op_adj;  // op_adj[e]: sector e-1 -> e
    };
    std::vector<Channel> channels;  // collective eigenchannels + local recycling

    static Generator build(const EmitterChain& chain, const CouplingMatrices& c,
                           const SectorBasis& basis, int e_max) {
        chain.validate();
        const int n = chain.n_total;
        if (basis.n != n || c.size() != n)
            throw std::invalid_argument("Generator: dimension mismatch");
        Generator gen;
        gen.n = n;
        gen.e_max = e_max;
        gen.gamma = chain.gamma;
        gen.gamma_nr = chain.gamma_nr;
        gen.gamma_phi = chain.gamma_phi;
        gen.basis = &basis;

        const double imp = chain.gamma_nr + 2.0 * chain.gamma_phi;
        gen.h.resize(static_cast<std::size_t>(e_max) + 1);
        gen.h_adj.resize(static_cast<std::size_t>(e_max) + 1);
        for (int e = 0; e <= e_max; ++e) {
            std::vector<Eigen::Triplet<Complex>> trip;
            const auto& st = basis.states[static_cast<std::size_t>(e)];
            for (int col = 0; col < static_cast<int>(st.size()); ++col) {
                const std::uint32_t b = st[static_cast<std::size_t>(col)];
                Complex diag(0.0, 0.0);
                for (int m = 0; m < n; ++m) {
                    if (!(b & (1u << m))) continue;
                    diag += Complex(c.j(m, m), -0.5 * (c.g(m, m) + imp));
                    for (int k = 0; k < n; ++k) {
                        if (k == m || (b & (1u << k))) continue;
                        const std::uint32_t b2 = (b & ~(1u << m)) | (1u << k);
                        trip.emplace_back(basis.index_in_sector[b2], col,
                                          Complex(c.j(k, m), -0.5 * c.g(k, m)));
                    }
                }
                if (diag != Complex(0.0, 0.0)) trip.emplace_back(col, col, diag);
            }
            SparseC& he = gen.h[static_cast<std::size_t>(e)];
            he.resize(basis.dim(e), basis.dim(e));
            he.setFromTriplets(trip.begin(), trip.end());
            gen.h_adj[static_cast<std::size_t>(e)] = SparseC(he.adjoint());
        }

        // Collective jump channels: eigendecomposition of the dissipative
        // matrix. Near-zero eigenvalues are dropped; their superoperator
        // contribution is bounded by the dropped weight.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.g);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("Generator: eigendecomposition of g failed");
        const double drop = 1e-12 * chain.gamma * n;
        for (int i = 0; i < n; ++i) {
            const double w = es.eigenvalues()[i];
            if (std::abs(w) <= drop) continue;
            gen.channels.push_back(
                make_channel(basis, e_max, es.eigenvectors().col(i), w));
        }
        if (chain.gamma_nr > 0.0) {
            for (int m = 0; m < n; ++m) {
                Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
                v[m] = 1.0;
                gen.channels.push_back(make_channel(basis, e_max, v, chain.gamma_nr));
            }
        }
        return gen;
    }

    // Apply the generator; x must be downward-closed and out must share its
    // block layout.
    void apply(const BlockedDensity& x, BlockedDensity& out) const {
        out.set_zero();
        out.hermitian_stripe = x.hermitian_stripe;
        const Complex mi(0.0, -1.0);
        for (const auto& [key, B] : x.block) {
            const auto [e, ep] = key;
            Eigen::MatrixXcd& dst = out.block.at(key);
            // commutator -i(H_e B - B H_ep^+)
            if (x.hermitian_stripe && e == ep) {
                const Eigen::MatrixXcd a = h[static_cast<std::size_t>(e)] * B;
                dst.noalias() += mi * a;
                dst.noalias() -= mi * a.adjoint();
            } else {
                dst.noalias() += mi * (h[static_cast<std::size_t>(e)] * B);
                dst.noalias() -= mi * (B * h_adj[static_cast<std::size_t>(ep)]);
            }
            // dephasing recycling: entrywise weight 2 gamma_phi |b_i & b_j|
            if (gamma_phi > 0.0) {
                const auto& rows = basis->states[static_cast<std::size_t>(e)];
                const auto& cols = basis->states[static_cast<std::size_t>(ep)];
                for (Eigen::Index i = 0; i < B.rows(); ++i)
                    for (Eigen::Index j = 0; j < B.cols(); ++j)
                        dst(i, j) += 2.0 * gamma_phi *
                                     std::popcount(rows[static_cast<std::size_t>(i)] &
                                                   cols[static_cast<std::size_t>(j)]) *
                                     B(i, j);
            }
            // dissipative flow into (e-1, ep-1)
            if (e >= 1 && ep >= 1) {
                Eigen::MatrixXcd& low = out.block.at(BlockKey{e - 1, ep - 1});
                for (const Channel& ch : channels) {
                    const Eigen::MatrixXcd t = ch.op[static_cast<std::size_t>(e)] * B;
                    low.noalias() += ch.weight * (t * ch.op_adj[static_cast<std::size_t>(ep)]);
                }
            }
        }
    }

  private:
    static Channel make_channel(const SectorBasis& basis, int e_max, const Eigen::VectorXd& v,
                                double weight) {
        Channel ch;
        ch.weight = weight;
        ch.op.resize(static_cast<std::size_t>(e_max) + 1);
        ch.op_adj.resize(static_cast<std::size_t>(e_max) + 1);
        const int n = basis.n;
        for (int e = 0; e <= e_max; ++e) {
            std::vector<Eigen::Triplet<Complex>> trip;
            if (e >= 1) {
                const auto& st = basis.states[static_cast<std::size_t>(e)];
                for (int col = 0; col < static_cast<int>(st.size()); ++col) {
                    const std::uint32_t b = st[static_cast<std::size_t>(col)];
                    for (int m = 0; m < n; ++m) {
                        if (!(b & (1u << m)) || v[m] == 0.0) continue;
                        trip.emplace_back(basis.index_in_sector[b & ~(1u << m)], col, v[m]);
                    }
                }
            }
            SparseC& op = ch.op[static_cast<std::size_t>(e)];
            op.resize(e >= 1 ? basis.dim(e - 1) : 0, basis.dim(e));
            op.setFromTriplets(trip.begin(), trip.end());
            ch.op_adj[static_cast<std::size_t>(e)] = SparseC(op.adjoint());
        }
        return ch;
    }
};

// ------------------------------ observables ----------------------------------

// Read-only view handed to observers during sampling.
class StateView {
  public:
    StateView(const BlockedDensity& state, double time) : state_(state), time_(time) {}

    const BlockedDensity& blocks() const { return state_; }
    const SectorBasis& basis() const { return *state_.basis; }
    double time() const { return time_; }

    double trace() const { return state_.trace_real(); }

    double site_population(int site) const {
        const std::uint32_t bit = 1u << site;
        double s = 0.0;
        for (const auto& [key, blk] : state_.block) {
            if (key.first != key.second) continue;
            const auto& st = basis().states[static_cast<std::size_t>(key.first)];
            for (Eigen::Index i = 0; i < blk.rows(); ++i)
                if (st[static_cast<std::size_t>(i)] & bit) s += blk(i, i).real();
        }
        return s;
    }

    double mean_excitation(const std::vector<int>& sites) const {
        double s = 0.0;
        for (int j : sites) {
            if (j < 0 || j >= basis().n)
                throw std::invalid_argument("mean_excitation: site index out of range");
            s += site_population(j);
        }
        return s;
    }

    // <v| rho |v> for a full-space vector pre-sliced by sector.
    double projection(const std::vector<Eigen::VectorXcd>& v_by_sector) const {
        Complex s(0.0, 0.0);
        for (const auto& [key, blk] : state_.block) {
            const Eigen::VectorXcd& vr = v_by_sector[static_cast<std::size_t>(key.first)];
            const Eigen::VectorXcd& vc = v_by_sector[static_cast<std::size_t>(key.second)];
            if (vr.size() == 0 || vc.size() == 0) continue;
            s += vr.dot(blk * vc);
        }
        return s.real();
    }

  private:
    const BlockedDensity& state_;
    double time_;
};

using FullObserver = Observer<StateView>;

inline std::vector<Eigen::VectorXcd> slice_by_sector(const Eigen::VectorXcd& v,
                                                     const SectorBasis& basis) {
    std::vector<Eigen::VectorXcd> out(static_cast<std::size_t>(basis.n) + 1);
    for (int e = 0; e <= basis.n; ++e) {
        const auto& st = basis.states[static_cast<std::size_t>(e)];
        Eigen::VectorXcd seg(st.size());
        bool any = false;
        for (std::size_t i = 0; i < st.size(); ++i) {
            seg[static_cast<Eigen::Index>(i)] = v[st[i]];
            if (seg[static_cast<Eigen::Index>(i)] != Complex(0.0, 0.0)) any = true;
        }
        out[static_cast<std::size_t>(e)] = any ? seg : Eigen::VectorXcd();
    }
    return out;
}

namespace observers_full {

inline FullObserver mean_excitation(const std::string& name, std::vector<int> sites) {
    return {name,
            [sites = std::move(sites)](const StateView& v) { return v.mean_excitation(sites); }};
}

inline FullObserver site_population(int site) {
    return {"pop_" + std::to_string(site),
            [site](const StateView& v) { return v.site_population(site); }};
}

inline FullObserver trace() {
    return {"trace", [](const StateView& v) { return v.trace(); }};
}

inline FullObserver projection(const std::string& name, const Eigen::VectorXcd& target,
                               const SectorBasis& basis) {
    auto sliced = slice_by_sector(target, basis);
    return {name, [sliced = std::move(sliced)](const StateView& v) {
                return v.projection(sliced);
            }};
}

}  // namespace observers_full

inline std::vector<int> pumped_sites(const EmitterChain& chain) {
    std::vector<int> s;
    for (int i = 0; i < chain.n_pumped; ++i) s.push_back(i);
    return s;
}

inline std::vector<int> unpumped_sites(const EmitterChain& chain) {
    std::vector<int> s;
    for (int i = chain.n_pumped; i < chain.n_total; ++i) s.push_back(i);
    return s;
}

// ------------------------------- evolution -----------------------------------

struct FullResult {
    Trajectory trajectory;
    DenseState final_state;
};

// Fixed-step RK4 integration of the master equation. Sampling happens every
// `stride` steps; trace/Hermiticity drift is tracked at samples and a drift
// beyond opt.trace_abort raises SolverAbort with a step-size diagnostic.
inline FullResult evolve(const DenseState& rho0, const EmitterChain& chain,
                         const CouplingMatrices& c, const EvolveOptions& opt,
                         const std::vector<FullObserver>& observers) {
    chain.validate();
    check_site_count(chain.n_total);
    if (rho0.n != chain.n_total)
        throw std::invalid_argument("evolve: state/chain dimension mismatch");

    static thread_local std::map<int, SectorBasis> basis_cache;
    SectorBasis& basis = basis_cache.try_emplace(chain.n_total)
                             .first->second;
    if (basis.n != chain.n_total) basis = SectorBasis::build(chain.n_total);

    BlockedDensity rho = BlockedDensity::from_dense(rho0.rho, basis);
    int e_max = 0;
    for (const auto& [key, blk] : rho.block) {
        (void)blk;
        e_max = std::max({e_max, key.first, key.second});
    }
    const Generator gen = Generator::build(chain, c, basis, e_max);

    const double gamma = chain.gamma;
    const double dt = (opt.dt > 0) ? opt.dt : 0.01 / (chain.n_total * gamma);
    const double horizon = opt.detect_steady ? opt.t_max : opt.t_final;
    const long nsteps = detail::step_count(horizon, dt);
    const int stride = std::max(opt.stride, 1);

    FullResult result;
    Trajectory& traj = result.trajectory;
    traj.steady.requested = opt.detect_steady;
    for (const auto& ob : observers) traj.names.push_back(ob.first);
    traj.series.resize(observers.size());

    BlockedDensity k1 = rho, k2 = rho, k3 = rho, k4 = rho, work = rho;

    const auto sample = [&](long step) -> bool {
        const double t = step * dt;
        StateView view(rho, t);
        traj.times.push_back(t);
        for (std::size_t i = 0; i < observers.size(); ++i)
            traj.series[i].push_back(observers[i].second(view));
        const double trace_dev =
            std::abs(rho.trace_real() - 1.0) + std::abs(rho.trace_imag());
        traj.invariants.max_trace_dev = std::max(traj.invariants.max_trace_dev, trace_dev);
        traj.invariants.max_herm_dev =
            std::max(traj.invariants.max_herm_dev, rho.herm_deviation());
        if (trace_dev > opt.trace_abort)
            throw SolverAbort("evolve: trace drift " + std::to_string(trace_dev) + " at t = " +
                              std::to_string(t) + "; decrease dt (currently " +
                              std::to_string(dt) + ")");
        if (opt.detect_steady) {
            gen.apply(rho, work);
            const double rhs_max = work.max_abs();
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
        gen.apply(rho, k1);
        bd_copy(work, rho);
        bd_axpy(work, 0.5 * dt, k1);
        gen.apply(work, k2);
        bd_copy(work, rho);
        bd_axpy(work, 0.5 * dt, k2);
        gen.apply(work, k3);
        bd_copy(work, rho);
        bd_axpy(work, dt, k3);
        gen.apply(work, k4);
        bd_axpy(rho, dt / 6.0, k1);
        bd_axpy(rho, dt / 3.0, k2);
        bd_axpy(rho, dt / 3.0, k3);
        bd_axpy(rho, dt / 6.0, k4);
        ++step;
        if (step % stride == 0 || step == nsteps) stopped = sample(step);
    }

    if (opt.detect_steady && !traj.steady.detected)
        traj.steady.criterion = "t_max";
    else if (!opt.detect_steady)
        traj.steady.criterion = "t_final";
    traj.steady.t_end = step * dt;

    if (opt.positivity_check) {
        traj.invariants.min_eigenvalue = rho.min_eigenvalue();
        traj.invariants.positivity_checked = true;
    }

    result.final_state.n = chain.n_total;
    result.final_state.time = step * dt;
    result.final_state.rho = rho.to_dense();
    return result;
}

// ---------------------- dense-state observable helpers -----------------------

inline double mean_excitation(const DenseState& state, const std::vector<int>& sites) {
    double s = 0.0;
    for (int j : sites) {
        if (j < 0 || j >= state.n)
            throw std::invalid_argument("mean_excitation: site index out of range");
        const std::uint32_t bit = 1u << j;
        for (Eigen::Index b = 0; b < state.rho.rows(); ++b)
            if (static_cast<std::uint32_t>(b) & bit) s += state.rho(b, b).real();
    }
    return s;
}

// <target| rho |target>, clamped to [0, 1] for reporting.
inline double project(const DenseState& state, const Eigen::VectorXcd& target) {
    if (target.size() != state.rho.rows())
        throw std::invalid_argument("project: dimension mismatch");
    if (std::abs(target.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("project: target must be normalized");
    const double raw = target.dot(state.rho * target).real();
    return std::clamp(raw, 0.0, 1.0);
}

}  // namespace wqed::fullspace
