#include "afvm/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace afvm {

namespace {

constexpr double kNoBound = std::numeric_limits<double>::infinity();

CheckResult not_applicable(std::string name, std::string why) {
    CheckResult r;
    r.name = std::move(name);
    r.detail = std::move(why);
    return r;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

} // namespace

int rate_window(RunMode mode) { return mode == RunMode::Adaptive ? 8 : 5; }

std::vector<CheckResult> evaluate_run(const ProblemSpec& problem, const RunDescription& run_desc,
                                      const AdaptiveRun& run, bool include_suites) {
    std::vector<CheckResult> checks;
    const bool adaptive = run_desc.mode == RunMode::Adaptive;
    const int window = rate_window(run_desc.mode);

    checks.push_back(check_coefficient_bounds(problem));

    if (problem.label == "square-smooth" && adaptive) {
        const std::vector<RateWindow> rates{{"eta", -0.60, -0.45}, {"energy_error", -0.60, -0.45}, {"osc", -kNoBound, -0.80}};
        checks.push_back(check_rates("smooth_rates", run.records, window, rates));
    } else {
        checks.push_back(not_applicable("smooth_rates", "requires an adaptive run of square-smooth"));
    }

    if (problem.label == "lshape-singular") {
        const std::vector<RateWindow> rates = adaptive
            ? std::vector<RateWindow>{{"energy_error", -0.60, -0.45}, {"eta", -0.60, -0.45}}
            : std::vector<RateWindow>{{"energy_error", -0.38, -0.29}};
        checks.push_back(check_rates("lshape_rates", run.records, window, rates));
    } else {
        checks.push_back(not_applicable("lshape_rates", "requires a run of lshape-singular"));
    }

    if (adaptive) {
        checks.push_back(check_marking_bounds(run.records));
        checks.push_back(check_linear_convergence(run.records));
    } else {
        checks.push_back(not_applicable("marking_bounds", "uniform run"));
        checks.push_back(not_applicable("linear_convergence", "uniform run"));
    }
    checks.push_back(check_monitor_drift(run.records));
    checks.push_back(check_galerkin_drift(run.monitors));

    if (include_suites) {
        checks.push_back(check_fvm_fem_identity());
        checks.push_back(check_box_residual());
        checks.push_back(check_interpolation_orthogonality());
        checks.push_back(check_doerfler_minimality());
        checks.push_back(check_nvb_suite());
    }
    return checks;
}

nlohmann::json to_json(const CheckResult& check) {
    nlohmann::json j;
    j["passed"] = check.passed ? nlohmann::json(*check.passed) : nlohmann::json(nullptr);
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : check.measurements) values[k] = number_or_null(v);
    j["measured"] = values;
    j["detail"] = check.detail;
    return j;
}

nlohmann::json build_summary(const ProblemSpec& problem, const RunDescription& run_desc, const AdaptiveRun& run,
                             const std::vector<CheckResult>& checks) {
    nlohmann::json s;
    s["problem"] = problem.label;
    s["source"] = run_desc.problem;
    s["mode"] = run_desc.mode == RunMode::Adaptive ? "adaptive" : "uniform";
    s["theta"] = run_desc.theta;
    s["theta_prime"] = run_desc.theta_prime;
    s["levels"] = run.records.size();
    s["final_elements"] = run.records.empty() ? 0 : run.records.back().n_elements;
    s["converged"] = run.converged;

    const int window = rate_window(run_desc.mode);
    nlohmann::json rates;
    rates["window"] = window;
    for (const char* field : {"eta", "osc", "energy_error", "fem_energy_error"}) {
        try {
            rates[field] = fit_rate(run.records, field, window);
        } catch (const Error&) {
            rates[field] = nullptr;
        }
    }
    s["rates"] = rates;

    // unset extrema stay infinite and are written as null
    double galerkin_max = -kNoBound, reliability_max = -kNoBound, efficiency_max = -kNoBound;
    double ratio_max = -kNoBound, fraction_min = std::numeric_limits<double>::infinity();
    for (const LevelMonitors& m : run.monitors)
        if (std::isfinite(m.galerkin_constant)) galerkin_max = std::max(galerkin_max, m.galerkin_constant);
    for (const AdaptiveRecord& r : run.records) {
        if (std::isfinite(r.energy_error)) {
            reliability_max = std::max(reliability_max, r.energy_error / r.eta);
            efficiency_max = std::max(efficiency_max, r.eta / std::hypot(r.energy_error, r.osc));
        }
        if (std::isfinite(r.ratio_card)) ratio_max = std::max(ratio_max, r.ratio_card);
        if (std::isfinite(r.osc_fraction_eta)) fraction_min = std::min(fraction_min, r.osc_fraction_eta);
    }
    nlohmann::json constants;
    constants["galerkin_constant_max"] = number_or_null(galerkin_max);
    constants["reliability_ratio_max"] = number_or_null(reliability_max);
    constants["efficiency_ratio_max"] = number_or_null(efficiency_max);
    constants["ratio_card_max"] = number_or_null(ratio_max);
    constants["osc_fraction_eta_min"] = number_or_null(fraction_min);
    s["observed_constants"] = constants;

    nlohmann::json acceptance = nlohmann::json::object();
    for (const CheckResult& c : checks) acceptance[c.name] = to_json(c);
    s["acceptance"] = acceptance;
    return s;
}

} // namespace afvm
