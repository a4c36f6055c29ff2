// trajectory.hpp — sampled observable series shared by all solvers, evolve
// options, and the solver abort exception.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wqed {

struct SolverAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SteadyInfo {
    bool requested{false};
    bool detected{false};
    std::string criterion;  // "rhs_norm" or "t_max" (or "t_final" when not requested)
    double t_end{0.0};
    double final_rhs_max{std::numeric_limits<double>::quiet_NaN()};
};

struct InvariantReport {
    double max_trace_dev{0.0};
    double max_herm_dev{0.0};
    double min_eigenvalue{std::numeric_limits<double>::quiet_NaN()};
    bool positivity_checked{false};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;  // series[i] parallel to times
    SteadyInfo steady;
    InvariantReport invariants;

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("Trajectory: no column named '" + name + "'");
    }
    const std::vector<double>& column(const std::string& name) const {
        return series[static_cast<std::size_t>(column_index(name))];
    }
};

template <class State>
using Observer = std::pair<std::string, std::function<double(const State&)>>;

struct EvolveOptions {
    double t_final{10.0};
    double dt{0.0};           // 0 selects the solver default 0.01 / (n * gamma)
    int stride{1};            // sample every `stride` steps
    bool detect_steady{false};
    double steady_tol{1e-8};  // RHS max-entry threshold, units of gamma
    double t_max{50.0};       // time cap in steady-detection mode
    double trace_abort{1e-6};
    bool positivity_check{true};  // eigenvalue check on the final state
};

namespace detail {

inline long step_count(double t_final, double dt) {
    if (!(dt > 0)) throw std::invalid_argument("evolve: dt must be > 0");
    if (t_final < 0) throw std::invalid_argument("evolve: t_final must be >= 0");
    return std::lround(std::ceil(t_final / dt - 1e-12));
}

}  // namespace detail

}  // namespace wqed
