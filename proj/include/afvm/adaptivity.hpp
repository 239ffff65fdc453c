#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "afvm/errors.hpp"
#include "afvm/mesh.hpp"
#include "afvm/problems.hpp"

namespace afvm {

/// Minimal-cardinality Dörfler set: the shortest prefix of the indicators
/// sorted descending (ties by lower id) whose sum reaches θ times the total.
/// Returns the ids sorted ascending; an all-zero input gives ∅.
/// Throws ValidationError for θ ∉ (0, 1] or negative indicators.
ElementSet doerfler_mark(std::span<const double> indicators_sq, double theta);

struct MarkResult {
    ElementSet marked_eta;         ///< M^η
    ElementSet marked;             ///< M ⊇ M^η
    double ratio_card = 1.0;       ///< #M / #M^η
    double osc_fraction_eta = 1.0; ///< osc(M^η)² / osc², 1 when osc = 0
    double osc_fraction = 1.0;     ///< osc(M)² / osc², 1 when osc = 0
    bool converged = false;        ///< all estimator indicators vanish
};

/// M^η from the estimator, then the smallest extension by descending
/// oscillation indicators with θ′ osc² ≤ osc(M)². Requires 0 < θ′ ≤ θ ≤ 1.
MarkResult two_stage_mark(std::span<const double> eta_sq, std::span<const double> osc_sq, double theta,
                          double theta_prime);

/// One line of records.csv. Absent values are NaN.
struct AdaptiveRecord {
    int level = 0;
    long long n_elements = 0;
    long long n_nodes = 0;
    double eta = 0.0;
    double osc = 0.0;
    double energy_error = std::numeric_limits<double>::quiet_NaN();
    double fem_energy_error = std::numeric_limits<double>::quiet_NaN();
    double ratio_card = std::numeric_limits<double>::quiet_NaN();
    double osc_fraction_eta = std::numeric_limits<double>::quiet_NaN();
    double sigma = 0.0;
    long long solve_iters = 0;
    double wall_ms_solve = 0.0;
    double wall_ms_estimate = 0.0;
    double wall_ms_refine = 0.0;

    friend bool operator==(const AdaptiveRecord&, const AdaptiveRecord&) = default;
};

/// Per-level quantities that are not part of the CSV contract.
struct LevelMonitors {
    double galerkin_constant = std::numeric_limits<double>::quiet_NaN();
    double fem_osc = std::numeric_limits<double>::quiet_NaN();
    double osc_fraction = std::numeric_limits<double>::quiet_NaN();
    double eta_fraction = std::numeric_limits<double>::quiet_NaN(); ///< η(M^η)² / η²
    double min_angle = 0.0;
    long long n_marked_eta = 0;
    long long n_marked = 0;
    double solve_residual = 0.0;
    std::string solve_method;
    double fem_solve_residual = std::numeric_limits<double>::quiet_NaN();
};

struct StopCriteria {
    long long max_elements = 3'000'000;
    int max_levels = 0;   ///< number of records; 0 means unlimited
    double eta_tol = 0.0; ///< stop once η ≤ eta_tol
};

struct AdaptiveOptions {
    double theta = 0.5;
    double theta_prime = 0.5;
    StopCriteria stop;
    bool fem_compare = true;                 ///< solve the FEM system on every mesh too
    std::filesystem::path matrix_dump_dir;   ///< non-empty: write the FVM matrix of every level
    std::function<void(const AdaptiveRecord&)> on_level;
};

struct AdaptiveRun {
    std::vector<AdaptiveRecord> records;
    std::vector<LevelMonitors> monitors;
    Triangulation final_mesh;
    std::vector<double> final_solution;
    bool converged = false; ///< stopped because all indicators vanished
};

/// A linear solve failed; carries the records of the completed levels.
class SolverFailure : public Error {
public:
    SolverFailure(int level, const std::string& what, AdaptiveRun partial)
        : Error("level " + std::to_string(level) + ": " + what), level_(level), partial_(std::move(partial)) {}
    int level() const { return level_; }
    const AdaptiveRun& partial() const { return partial_; }

private:
    int level_;
    AdaptiveRun partial_;
};

/// Solve, estimate, mark, refine until a stop criterion holds. Marking is
/// evaluated on every level, so the last record is complete as well.
AdaptiveRun run_adaptive(const ProblemSpec& problem, const AdaptiveOptions& options);

/// Uniform refinement with the same measurements; ratio_card and
/// osc_fraction_eta stay NaN. Runs `n_levels` records unless
/// `options.stop.max_elements` or `eta_tol` stops it earlier.
AdaptiveRun run_uniform(const ProblemSpec& problem, int n_levels, const AdaptiveOptions& options = {});

/// Value of a numeric CSV column; throws ValidationError for unknown names.
double record_field(const AdaptiveRecord& record, const std::string& field);

/// Least-squares slope of log(field) against log(n_elements) over the last
/// `window` records. Throws InsufficientData for fewer than 3 points or
/// non-positive values.
double fit_rate(std::span<const AdaptiveRecord> records, const std::string& field, int window);

} // namespace afvm
