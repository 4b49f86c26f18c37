#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssn/geometry.hpp"
#include "ssn/solver.hpp"

namespace ssn::cli {

/// One experiment: a battery field, a start point, solver settings, and the
/// diagnostics to report. `start` is either comma-separated ambient
/// coordinates or "auto:distance=<r>,seed=<s>", which samples a point at
/// geodesic distance r from the field's known solution.
struct ExperimentConfig {
    std::string field_id;
    std::optional<ManifoldKind> manifold; // cross-checked against the field when set
    std::string start;                    // empty means auto:distance=0.1,seed=<seed>
    SolverConfig solver;
    std::vector<std::string> analyses; // subset of {order, semismooth-scan,
                                       //  kantorovich, kp, lipschitz, regularity}
    std::string out;                   // artifact base path; empty means field_id
    std::uint64_t seed = 0;
};

/// Runs the solve, writes <out>.trace.csv, and when analyses were requested
/// writes <out>.report.txt with one record per analysis. Returns the process
/// exit code: 0 on convergence, 2 on a singular element, 3 on the iteration
/// cap, 1 on configuration errors.
int run_experiment(const ExperimentConfig& cfg);

/// Battery listing: id, manifold, dimension, expected order exponent, known
/// solution. Stable across runs.
std::string list_fields();

/// Full command-line entry point (subcommands solve, analyze, list-fields,
/// batch).
int run_main(int argc, const char* const* argv);

} // namespace ssn::cli
