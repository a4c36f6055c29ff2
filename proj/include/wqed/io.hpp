// io.hpp — CSV emission (17 significant digits) and JSON sidecars carrying
// enough metadata to re-run any output exactly.

#pragma once

#include "wqed/chain.hpp"
#include "wqed/disorder.hpp"
#include "wqed/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wqed::io {

inline constexpr const char* kArtifactVersion = "1.0.0";

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "time";
    for (const auto& name : traj.names) out += "," + name;
    out += "\n";
    for (std::size_t t = 0; t < traj.times.size(); ++t) {
        out += format_double(traj.times[t]);
        for (const auto& series : traj.series) out += "," + format_double(series[t]);
        out += "\n";
    }
    return out;
}

inline std::string ensemble_csv(const disorder::EnsembleStatistics& stats) {
    std::string out = "time";
    for (const auto& name : stats.names) out += "," + name + "_mean," + name + "_stderr";
    out += "\n";
    for (std::size_t t = 0; t < stats.times.size(); ++t) {
        out += format_double(stats.times[t]);
        for (std::size_t i = 0; i < stats.names.size(); ++i) {
            out += "," + format_double(stats.mean[i][t]);
            out += "," + format_double(stats.std_error[i][t]);
        }
        out += "\n";
    }
    return out;
}

inline nlohmann::json chain_json(const EmitterChain& chain) {
    return {{"n", chain.n_total},
            {"n_p", chain.n_pumped},
            {"spacing", chain.spacing},
            {"gamma", chain.gamma},
            {"gamma_nr", chain.gamma_nr},
            {"gamma_phi", chain.gamma_phi},
            {"positions", chain.positions}};
}

inline nlohmann::json trajectory_sidecar(const Trajectory& traj, const EmitterChain& chain,
                                         const std::string& solver, double dt,
                                         std::uint64_t seed) {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["chain"] = chain_json(chain);
    j["solver"] = solver;
    j["dt"] = dt;
    j["seed"] = seed;
    j["columns"] = traj.names;
    j["steady"] = {{"requested", traj.steady.requested},
                   {"detected", traj.steady.detected},
                   {"criterion", traj.steady.criterion},
                   {"t_end", traj.steady.t_end}};
    j["invariants"] = {{"max_trace_dev", traj.invariants.max_trace_dev},
                       {"max_herm_dev", traj.invariants.max_herm_dev},
                       {"positivity_checked", traj.invariants.positivity_checked},
                       {"min_eigenvalue", traj.invariants.min_eigenvalue}};
    return j;
}

}  // namespace wqed::io
