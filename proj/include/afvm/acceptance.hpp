#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "afvm/adaptivity.hpp"
#include "afvm/problems.hpp"

namespace afvm {

/// Outcome of one acceptance criterion. `passed` is empty when the
/// criterion does not apply to the data at hand.
struct CheckResult {
    std::string name;
    std::optional<bool> passed;
    std::vector<std::pair<std::string, double>> measurements;
    std::string detail;

    void measure(std::string key, double value) { measurements.emplace_back(std::move(key), value); }
};

/// Combines sub-checks: passes iff every applicable part passes.
CheckResult combine(std::string name, std::span<const CheckResult> parts);

/// Reference eigenvalue bounds (λ_min, λ_max) quoted for the builtin problems.
std::optional<std::pair<double, double>> reference_eigenvalue_bounds(const std::string& label);

/// Sampled eigenvalue extrema on a grid×grid lattice against the reference
/// bounds, each within `tol`.
CheckResult check_coefficient_bounds(const ProblemSpec& problem, double tol = 1e-3, int grid = 401);

struct RateWindow {
    std::string field;
    double lo;
    double hi;
};

/// Least-squares slopes over the last `window` records, each inside [lo, hi].
CheckResult check_rates(std::string name, std::span<const AdaptiveRecord> records, int window,
                        std::span<const RateWindow> criteria);

/// ratio_card ≤ max_ratio and osc_fraction_eta ≥ min_fraction on every level.
CheckResult check_marking_bounds(std::span<const AdaptiveRecord> records, double max_ratio = 2.0,
                                 double min_fraction = 0.02);

/// Geometric mean of η_{ℓ+1}/η_ℓ over levels ≥ first_level is ≤ limit.
CheckResult check_linear_convergence(std::span<const AdaptiveRecord> records, int first_level = 3,
                                     double limit = 0.98);

/// E/η and η/sqrt(E² + osc²) stay within [1/factor, factor] times their
/// values at `reference_level` for all later levels.
CheckResult check_monitor_drift(std::span<const AdaptiveRecord> records, int reference_level = 5,
                                double factor = 3.0);

/// Observed quasi-Galerkin constants on levels first..last: C_ℓ ≤ factor·C_ref
/// for every level after `reference_level`. Records the maximum.
CheckResult check_galerkin_drift(std::span<const LevelMonitors> monitors, int first = 2, int last = 10,
                                 int reference_level = 4, double factor = 2.0);

/// FVM and FEM matrices agree entrywise for elementwise-constant A on five
/// meshes with up to 1e4 elements.
CheckResult check_fvm_fem_identity(double tol = 1e-12, std::uint64_t seed = 1);

/// With A ≡ I and elementwise-constant f, every interior box satisfies
/// ∫_V (f + div A∇u) − ∫_{∂V ∩ skeleton} [A∇u] = 0.
CheckResult check_box_residual(double tol = 1e-10, std::uint64_t seed = 2);

/// ∫_T (v − I*v) = 0 and ∫_F (v − I*v) = 0 for random discrete functions.
CheckResult check_interpolation_orthogonality(int trials = 100, double tol = 1e-13, std::uint64_t seed = 3);

/// doerfler_mark cardinality equals the brute-force minimum.
CheckResult check_doerfler_minimality(int trials = 200, int max_length = 12, std::uint64_t seed = 4);

/// Conformity, area partition, marked ⊆ refined and a stable minimum angle
/// over `levels` rounds of random marking on both builtin meshes.
CheckResult check_nvb_suite(int levels = 10, double area_tol = 1e-12, std::uint64_t seed = 5);

} // namespace afvm
