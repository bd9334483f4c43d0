#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixneu/analysis.hpp"
#include "mixneu/fields.hpp"

namespace mixneu {

struct Geometry {
    double a = 0.0;
    double b = 1.0;
    int n_in = 64;
    double R = 1.0;
    int n_col = 16;

    bool operator==(const Geometry&) const = default;
};

inline constexpr std::string_view kTasks[] = {"solve-eigen", "solve-source", "verify",
                                              "convergence", "audit"};

/// Batch run description, read from JSON. See README for the schema.
struct RunConfig {
    std::string task = "solve-eigen";
    Geometry geometry;
    OperatorParams op;
    PiecewiseField weight;
    std::optional<PiecewiseField> coefficient;
    std::optional<PiecewiseField> source;
    double q = 4.0;
    int k_pos = 3;
    int k_neg = 3;
    std::uint64_t seed = 0;
    std::string output = "out";
    bool diagnostic = false;
    int quad_order = 8;
    int split_depth = 6;
    std::vector<int> levels{128, 256, 512};
    std::uint64_t audit_samples = 1000000;
    std::uint64_t graph_samples = 10000;
    std::uint64_t v_samples = 1000;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON config; unknown keys and violated module
/// preconditions raise Error(Config).
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

struct SpectrumRow {
    std::string label;
    int index = 0;
    double lambda = 0.0;
    double lambda_seminorm = 0.0;  ///< lambda / 2, the [u]^2 convention
    double normalization = 0.0;
    double residual = 0.0;

    bool operator==(const SpectrumRow&) const = default;
};

struct ResidualRow {
    std::string label;
    std::uint64_t node = 0;
    double x = 0.0;
    double ns = 0.0;

    bool operator==(const ResidualRow&) const = default;
};

struct NormalDerivRow {
    std::string label;
    double left = 0.0;
    double right = 0.0;

    bool operator==(const NormalDerivRow&) const = default;
};

struct DeGiorgiEntry {
    std::string label;
    DeGiorgiReport report;

    bool operator==(const DeGiorgiEntry&) const = default;
};

struct ConvergenceRow {
    int n_in = 0;
    double h = 0.0;
    std::vector<double> lambdas;
    std::vector<double> errors;  ///< empty without a closed-form reference

    bool operator==(const ConvergenceRow&) const = default;
};

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;

    bool operator==(const Check&) const = default;
};

struct Report {
    RunConfig config;
    std::optional<WeightDiagnostics> weight;
    std::vector<SpectrumRow> spectrum;
    std::vector<double> nodes;
    std::vector<std::string> eigen_labels;
    std::vector<std::vector<double>> eigenfunctions;  ///< one vector per label
    std::optional<std::vector<double>> source_solution;
    std::vector<ResidualRow> residuals;
    std::vector<NormalDerivRow> normal_derivs;
    std::vector<DeGiorgiEntry> degiorgi;
    std::vector<AuditCounter> audits;
    std::string convergence_reference;  ///< "closed-form", "richardson" or empty
    std::vector<ConvergenceRow> convergence;
    std::vector<double> observed_order;  ///< per eigenvalue index
    std::vector<Check> checks;
    std::vector<std::string> warnings;

    bool all_checks_passed() const;
    bool operator==(const Report&) const = default;
};

/// Executes config.task. Deterministic given (config, config.seed).
Report run(const RunConfig& config);

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view json_text);

/// Writes spectrum.csv, eigenfunctions.csv, residuals.csv, degiorgi.csv,
/// report.json (plus solution.csv / convergence.csv when present) into dir.
std::vector<std::filesystem::path> emit(const Report& report, const std::filesystem::path& dir);

}  // namespace mixneu
