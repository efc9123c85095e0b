#pragma once

#include <cstdint>
#include <iosfwd>

#include "pplab/config.hpp"
#include "pplab/measure.hpp"
#include "pplab/solver.hpp"

namespace pplab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "PPLAB_OUT_ROOT";

enum class TaskKind { Morrey, Capacity, Cdc, Solve, Barrier, Holder, Embed, Wolff, Necessity };

struct TaskSpec {
    TaskKind kind;
    ConfigTable params;
};

struct ExperimentConfig {
    Domain2D domain = Domain2D::unit_square();
    double p = 2;
    std::vector<ConfigTable> charge_tables;
    std::vector<double> mesh_levels; // target_h, strictly decreasing
    std::vector<TaskSpec> tasks;
    std::uint64_t seed = 1;
    std::string output = "out";
    std::string source;
    std::string hash; // content hash, used by `compare` to match manifests

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_text(const std::string& text, const std::string& name);

    RadonCharge build_charge(std::size_t index) const;
    RadonCharge build_combined_charge() const;
};

struct RunOptions {
    int threads = 1;
    bool deterministic = false; // force single-threaded ordered execution
    std::string output_root;    // empty: $PPLAB_OUT_ROOT or "."
};

// Executes all tasks at every mesh level; writes one CSV per task per level
// plus a manifest of inputs and empirical constants. Returns 0 when every
// task contract held, 1 otherwise (the violated contract is printed).
int run_experiment(const ExperimentConfig& config, const RunOptions& options,
                   std::ostream& log);

struct CompareRow {
    std::string key;
    double a = 0, b = 0, ratio = 0;
    bool flagged = false; // ratio outside [0.5, 2]
};

struct CompareReport {
    std::vector<CompareRow> rows;
    int flagged = 0;
};

// Ratio table between two manifests of the same config at different levels.
CompareReport compare_manifests(const std::string& manifest_a, const std::string& manifest_b);

} // namespace pplab
