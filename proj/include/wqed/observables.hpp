// observables.hpp — standard named observable sets for the two solvers:
// ensemble mean excitations, trace, per-site populations, per-M dark-state
// projections, and the dark-manifold-weighted excitation curves.

#pragma once

#include "wqed/chain.hpp"
#include "wqed/darkstates.hpp"
#include "wqed/dicke.hpp"
#include "wqed/fullspace.hpp"

#include <string>
#include <vector>

namespace wqed::observables {

struct DarkTarget {
    int m{0};
    double n_exp_pumped{0.0};
    double n_exp_unpumped{0.0};
    std::vector<Eigen::VectorXcd> full_sliced;  // full-space sector slices
    Eigen::VectorXd reduced;                    // product-basis amplitudes
};

inline std::vector<DarkTarget> dark_targets(const EmitterChain& chain,
                                            const fullspace::SectorBasis* basis) {
    std::vector<DarkTarget> out;
    const int mmax = darkstates::max_dark_excitation(chain.n_total, chain.n_pumped);
    for (int m = 0; m <= mmax; ++m) {
        const auto spec = darkstates::dark_state(chain.n_total, chain.n_pumped, m);
        DarkTarget t;
        t.m = m;
        t.n_exp_pumped = spec.number_expectation_pumped;
        t.n_exp_unpumped = spec.number_expectation_unpumped;
        if (basis != nullptr)
            t.full_sliced = fullspace::slice_by_sector(darkstates::expand_full(spec), *basis);
        t.reduced = darkstates::dicke_amplitudes(spec);
        out.push_back(std::move(t));
    }
    return out;
}

struct ObservableChoice {
    bool dark_projections{false};   // proj_dark_M*, dark_total
    bool dark_weighted{false};      // dark_n_pumped / dark_n_unpumped
    bool per_site{false};           // pop_0 .. pop_{n-1} (full solver only)
};

// Column order: n_pumped, n_unpumped, trace, [pop_*], [proj_dark_M*,
// dark_total], [dark_n_pumped, dark_n_unpumped].
inline std::vector<fullspace::FullObserver> full_observers(const EmitterChain& chain,
                                                           const fullspace::SectorBasis& basis,
                                                           const ObservableChoice& choice) {
    using fullspace::StateView;
    std::vector<fullspace::FullObserver> obs;
    obs.push_back(fullspace::observers_full::mean_excitation("n_pumped",
                                                             fullspace::pumped_sites(chain)));
    obs.push_back(fullspace::observers_full::mean_excitation("n_unpumped",
                                                             fullspace::unpumped_sites(chain)));
    obs.push_back(fullspace::observers_full::trace());
    if (choice.per_site)
        for (int j = 0; j < chain.n_total; ++j)
            obs.push_back(fullspace::observers_full::site_population(j));
    if (choice.dark_projections || choice.dark_weighted) {
        auto targets = dark_targets(chain, &basis);
        if (choice.dark_projections) {
            for (const auto& t : targets) {
                obs.push_back({"proj_dark_M" + std::to_string(t.m),
                               [sl = t.full_sliced](const StateView& v) {
                                   return v.projection(sl);
                               }});
            }
            obs.push_back({"dark_total", [targets](const StateView& v) {
                               double s = 0.0;
                               for (const auto& t : targets) s += v.projection(t.full_sliced);
                               return s;
                           }});
        }
        if (choice.dark_weighted) {
            obs.push_back({"dark_n_pumped", [targets](const StateView& v) {
                               double s = 0.0;
                               for (const auto& t : targets)
                                   s += t.n_exp_pumped * v.projection(t.full_sliced);
                               return s;
                           }});
            obs.push_back({"dark_n_unpumped", [targets](const StateView& v) {
                               double s = 0.0;
                               for (const auto& t : targets)
                                   s += t.n_exp_unpumped * v.projection(t.full_sliced);
                               return s;
                           }});
        }
    }
    return obs;
}

inline std::vector<dicke::ReducedObserver> reduced_observers(const EmitterChain& chain,
                                                             const ObservableChoice& choice) {
    const dicke::ProductBasis basis(chain);
    std::vector<dicke::ReducedObserver> obs;
    obs.push_back(dicke::observers_reduced::mean_pumped(basis));
    obs.push_back(dicke::observers_reduced::mean_unpumped(basis));
    obs.push_back(dicke::observers_reduced::trace());
    if (choice.dark_projections || choice.dark_weighted) {
        auto targets = dark_targets(chain, nullptr);
        if (choice.dark_projections) {
            for (const auto& t : targets)
                obs.push_back(dicke::observers_reduced::projection(
                    "proj_dark_M" + std::to_string(t.m), t.reduced));
            obs.push_back({"dark_total", [targets](const Eigen::MatrixXcd& rho) {
                               double s = 0.0;
                               for (const auto& t : targets) {
                                   const auto tv = t.reduced.cast<dicke::Complex>().eval();
                                   s += tv.dot(rho * tv).real();
                               }
                               return s;
                           }});
        }
        if (choice.dark_weighted) {
            obs.push_back({"dark_n_pumped", [targets](const Eigen::MatrixXcd& rho) {
                               double s = 0.0;
                               for (const auto& t : targets) {
                                   const auto tv = t.reduced.cast<dicke::Complex>().eval();
                                   s += t.n_exp_pumped * tv.dot(rho * tv).real();
                               }
                               return s;
                           }});
            obs.push_back({"dark_n_unpumped", [targets](const Eigen::MatrixXcd& rho) {
                               double s = 0.0;
                               for (const auto& t : targets) {
                                   const auto tv = t.reduced.cast<dicke::Complex>().eval();
                                   s += t.n_exp_unpumped * tv.dot(rho * tv).real();
                               }
                               return s;
                           }});
        }
    }
    return obs;
}

}  // namespace wqed::observables
