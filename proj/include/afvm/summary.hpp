#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "afvm/acceptance.hpp"
#include "afvm/adaptivity.hpp"

namespace afvm {

enum class RunMode { Adaptive, Uniform };

struct RunDescription {
    std::string problem; ///< builtin name or config path
    RunMode mode = RunMode::Adaptive;
    double theta = 0.5;
    double theta_prime = 0.5;
};

/// Rate-fit window: last 8 records for adaptive runs, last 5 for uniform ones.
int rate_window(RunMode mode);

/// Acceptance criteria evaluated on a finished run. Criteria that need a
/// different problem or mode are reported as not applicable. With
/// `include_suites`, the data-independent property suites run as well.
std::vector<CheckResult> evaluate_run(const ProblemSpec& problem, const RunDescription& run_desc,
                                      const AdaptiveRun& run, bool include_suites = true);

nlohmann::json to_json(const CheckResult& check);

/// summary.json: run description, fitted rates, observed constants and the
/// acceptance booleans with their measured values.
nlohmann::json build_summary(const ProblemSpec& problem, const RunDescription& run_desc, const AdaptiveRun& run,
                             const std::vector<CheckResult>& checks);

} // namespace afvm
