#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "afvm/adaptivity.hpp"
#include "afvm/errors.hpp"
#include "support.hpp"

using namespace afvm;

namespace {

double sum_over(std::span<const double> v, std::span<const ElementId> ids) {
    double s = 0.0;
    for (ElementId i : ids) s += v[static_cast<std::size_t>(i)];
    return s;
}

// Smallest cardinality of any subset reaching θ·total, by enumeration.
std::size_t brute_force_minimum(const std::vector<double>& v, double theta) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    std::size_t best = v.size();
    for (unsigned mask = 0; mask < (1u << v.size()); ++mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (mask & (1u << i)) s += v[i];
        if (s >= theta * total) best = std::min<std::size_t>(best, static_cast<std::size_t>(std::popcount(mask)));
    }
    return best;
}

std::vector<AdaptiveRecord> power_law(double c, double rate, std::initializer_list<long long> counts) {
    std::vector<AdaptiveRecord> records;
    for (long long n : counts) {
        AdaptiveRecord r;
        r.level = static_cast<int>(records.size());
        r.n_elements = n;
        r.eta = c * std::pow(static_cast<double>(n), rate);
        r.osc = 3.0;
        records.push_back(r);
    }
    return records;
}

AdaptiveOptions quiet_options(long long max_elements) {
    AdaptiveOptions o;
    o.stop.max_elements = max_elements;
    return o;
}

} // namespace

TEST_SUITE("adaptivity") {

TEST_CASE("Doerfler marking examples") {
    const std::vector<double> v{4, 1, 1, 1, 1};
    CHECK(doerfler_mark(v, 0.5) == ElementSet{0});
    CHECK(doerfler_mark(v, 0.9) == ElementSet{0, 1, 2, 3, 4});
    CHECK(doerfler_mark(std::vector<double>{0, 2, 0, 1}, 1.0) == ElementSet{1, 3});
    CHECK(doerfler_mark(std::vector<double>{0, 0, 0}, 0.5).empty());
    // ties go to the lower id
    CHECK(doerfler_mark(std::vector<double>{1, 1, 1, 1}, 0.5) == ElementSet{0, 1});
}

TEST_CASE("Doerfler marking rejects invalid input") {
    const std::vector<double> v{1, 2};
    for (double theta : {0.0, -0.1, 1.5}) {
        CHECK_THROWS_WITH_AS(doerfler_mark(v, theta), "theta must lie in (0,1]", ValidationError);
    }
    CHECK_THROWS_AS(doerfler_mark(std::vector<double>{1, -1}, 0.5), ValidationError);
}

TEST_CASE("Doerfler marking is minimal") {
    std::mt19937_64 rng(51);
    std::uniform_int_distribution<int> length(1, 12);
    std::uniform_int_distribution<int> value(0, 20);
    std::uniform_real_distribution<double> theta_dist(0.05, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(static_cast<std::size_t>(length(rng)));
        for (double& x : v) x = value(rng) / 8.0;
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
        const double theta = theta_dist(rng);
        const ElementSet m = doerfler_mark(v, theta);
        CHECK(std::is_sorted(m.begin(), m.end()));
        CHECK(sum_over(v, m) >= theta * std::accumulate(v.begin(), v.end(), 0.0));
        CHECK(m.size() == brute_force_minimum(v, theta));
    }
}

TEST_CASE("two-stage marking") {
    const std::vector<double> eta{4, 1, 1, 1, 1};
    const std::vector<double> osc{0, 0, 3, 1, 0};
    const MarkResult r = two_stage_mark(eta, osc, 0.5, 0.5);
    CHECK(r.marked_eta == ElementSet{0});
    CHECK(r.marked == ElementSet{0, 2});
    CHECK(r.ratio_card == 2.0);
    CHECK(r.osc_fraction_eta == 0.0);
    CHECK(r.osc_fraction == doctest::Approx(0.75));

    // M^η already carries enough oscillation
    const MarkResult small = two_stage_mark(eta, std::vector<double>{3, 0, 0, 1, 0}, 0.5, 0.1);
    CHECK(small.marked == small.marked_eta);
    CHECK(small.ratio_card == 1.0);

    const MarkResult zero_osc = two_stage_mark(eta, std::vector<double>(5, 0.0), 0.5, 0.5);
    CHECK(zero_osc.marked == zero_osc.marked_eta);
    CHECK(zero_osc.osc_fraction_eta == 1.0);

    const MarkResult done = two_stage_mark(std::vector<double>(3, 0.0), std::vector<double>(3, 0.0), 0.5, 0.5);
    CHECK(done.converged);
    CHECK(done.marked.empty());

    CHECK_THROWS_AS(two_stage_mark(eta, osc, 0.5, 0.6), ValidationError);
    CHECK_THROWS_AS(two_stage_mark(eta, std::vector<double>{1, 2}, 0.5, 0.5), DimensionMismatch);
}

TEST_CASE("two-stage postconditions on random data") {
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> eta(30), osc(30);
        for (std::size_t i = 0; i < eta.size(); ++i) {
            eta[i] = std::pow(val(rng), 4);
            osc[i] = eta[i] * val(rng);
        }
        const double theta = 0.3 + 0.7 * val(rng);
        const double theta_prime = theta * val(rng) + 1e-3;
        const MarkResult r = two_stage_mark(eta, osc, theta, std::min(theta, theta_prime));
        CHECK(std::includes(r.marked.begin(), r.marked.end(), r.marked_eta.begin(), r.marked_eta.end()));
        CHECK(sum_over(eta, r.marked_eta) >= theta * std::accumulate(eta.begin(), eta.end(), 0.0));
        CHECK(sum_over(osc, r.marked) >= std::min(theta, theta_prime) * std::accumulate(osc.begin(), osc.end(), 0.0) * (1 - 1e-14));
        CHECK(r.ratio_card == doctest::Approx(static_cast<double>(r.marked.size()) / static_cast<double>(r.marked_eta.size())));
    }
}

TEST_CASE("fit_rate") {
    const auto exact = power_law(2.5, -0.5, {16, 40, 100, 260, 700, 1900});
    CHECK(std::abs(fit_rate(exact, "eta", 4) - (-0.5)) <= 1e-10);
    CHECK(std::abs(fit_rate(exact, "osc", 6)) <= 1e-12);
    CHECK_THROWS_AS(fit_rate(std::span(exact).first(2), "eta", 8), InsufficientData);
    CHECK_THROWS_AS(fit_rate(exact, "energy_error", 4), InsufficientData);
    CHECK_THROWS_AS(fit_rate(exact, "nonsense", 4), ValidationError);
    // only the last `window` points enter the fit
    auto bent = exact;
    bent[0].eta = 1e6;
    CHECK(std::abs(fit_rate(bent, "eta", 5) - (-0.5)) <= 1e-10);
    CHECK(record_field(exact[2], "n_elements") == 100.0);
}

TEST_CASE("eta tolerance above the initial estimator gives one record") {
    AdaptiveOptions o = quiet_options(1'000'000);
    o.stop.eta_tol = 1e6;
    const AdaptiveRun run = run_adaptive(problem_square_smooth(), o);
    REQUIRE(run.records.size() == 1);
    CHECK(run.records[0].n_elements == 16);
}

TEST_CASE("adaptive run on the smooth problem") {
    AdaptiveOptions o = quiet_options(4000);
    int callbacks = 0;
    o.on_level = [&](const AdaptiveRecord&) { ++callbacks; };
    const ProblemSpec p = problem_square_smooth();
    const AdaptiveRun run = run_adaptive(p, o);
    REQUIRE(run.records.size() >= 5);
    CHECK(callbacks == static_cast<int>(run.records.size()));
    CHECK(run.records.front().n_elements == 16);
    CHECK(run.records.back().n_elements >= 4000);
    CHECK(run.final_mesh.num_elements() == static_cast<std::size_t>(run.records.back().n_elements));
    CHECK(run.final_solution.size() == run.final_mesh.num_vertices());
    for (std::size_t l = 0; l < run.records.size(); ++l) {
        const AdaptiveRecord& r = run.records[l];
        CHECK(r.level == static_cast<int>(l));
        if (l > 0) CHECK(r.n_elements > run.records[l - 1].n_elements);
        CHECK(r.ratio_card <= 2.0);
        CHECK(r.ratio_card >= 1.0);
        CHECK(r.osc <= r.eta);
        CHECK(std::isfinite(r.energy_error));
        CHECK(std::isfinite(r.fem_energy_error));
        CHECK(run.monitors[l].eta_fraction >= 0.5);
        CHECK(run.monitors[l].osc_fraction >= 0.5);
    }
}

TEST_CASE("adaptive run on the L-shape") {
    const AdaptiveRun run = run_adaptive(problem_lshape_singular(), quiet_options(3000));
    CHECK(run.records.front().n_elements == 12);
    for (const AdaptiveRecord& r : run.records) {
        CHECK(r.osc_fraction_eta >= 0.02);
        CHECK(r.ratio_card <= 2.0);
    }
}

TEST_CASE("level limit and disabled FEM comparison") {
    AdaptiveOptions o = quiet_options(1'000'000);
    o.stop.max_levels = 3;
    o.fem_compare = false;
    const AdaptiveRun run = run_adaptive(problem_square_smooth(), o);
    CHECK(run.records.size() == 3);
    for (const AdaptiveRecord& r : run.records) CHECK(std::isnan(r.fem_energy_error));
    for (const LevelMonitors& m : run.monitors) CHECK(std::isnan(m.galerkin_constant));
}

TEST_CASE("problems without an exact solution record nan errors") {
    ProblemSpec p = afvm::test::constant_problem(afvm::test::criss_cross_square(), Mat2::identity(), 1.0);
    AdaptiveOptions o = quiet_options(200);
    const AdaptiveRun run = run_adaptive(p, o);
    for (const AdaptiveRecord& r : run.records) {
        CHECK(std::isnan(r.energy_error));
        CHECK(std::isnan(r.fem_energy_error));
    }
}

TEST_CASE("uniform runs") {
    const AdaptiveRun run = run_uniform(problem_square_smooth(), 4);
    REQUIRE(run.records.size() == 4);
    for (std::size_t l = 1; l < run.records.size(); ++l)
        CHECK(run.records[l].n_elements == 4 * run.records[l - 1].n_elements);
    for (const AdaptiveRecord& r : run.records) {
        CHECK(std::isnan(r.ratio_card));
        CHECK(std::isnan(r.osc_fraction_eta));
    }
    AdaptiveOptions o;
    o.stop.max_elements = 1000;
    CHECK(run_uniform(problem_square_smooth(), 10, o).records.back().n_elements == 1024);
}

} // TEST_SUITE
