#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "afvm/errors.hpp"
#include "afvm/report.hpp"

using namespace afvm;

namespace {

namespace fs = std::filesystem;

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool identical(const AdaptiveRecord& a, const AdaptiveRecord& b) {
    return a.level == b.level && a.n_elements == b.n_elements && a.n_nodes == b.n_nodes && same_bits(a.eta, b.eta) &&
           same_bits(a.osc, b.osc) && same_bits(a.energy_error, b.energy_error) &&
           same_bits(a.fem_energy_error, b.fem_energy_error) && same_bits(a.ratio_card, b.ratio_card) &&
           same_bits(a.osc_fraction_eta, b.osc_fraction_eta) && same_bits(a.sigma, b.sigma) &&
           a.solve_iters == b.solve_iters && same_bits(a.wall_ms_solve, b.wall_ms_solve) &&
           same_bits(a.wall_ms_estimate, b.wall_ms_estimate) && same_bits(a.wall_ms_refine, b.wall_ms_refine);
}

AdaptiveRecord sample_record(int level) {
    AdaptiveRecord r;
    r.level = level;
    r.n_elements = 16 << level;
    r.n_nodes = 13 << level;
    r.eta = 0.1 / 3.0 + level;
    r.osc = 1e-300;
    r.energy_error = level % 2 ? std::numeric_limits<double>::quiet_NaN() : 2.0 / 7.0;
    r.ratio_card = 1.3125;
    r.osc_fraction_eta = 0.1;
    r.sigma = 4.000000000000001;
    r.solve_iters = 17;
    r.wall_ms_solve = 0.123;
    return r;
}

struct CommandResult {
    int exit_code;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "afvm_cli_test.log";
    const std::string cmd = std::string(AFVM_RUN_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream text;
    text << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, text.str()};
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

// records.csv without the three wall-clock columns
std::string mask_timings(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        for (int k = 0; k < 3; ++k) line.erase(line.rfind(','));
        out += line + '\n';
    }
    return out;
}

} // namespace

TEST_SUITE("reporting_cli") {

TEST_CASE("number formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(1e-300) == "1e-300");
}

TEST_CASE("one record gives header plus one row") {
    std::ostringstream out;
    const AdaptiveRecord r = sample_record(1);
    write_records_csv(std::span(&r, 1), out);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.rfind(kRecordsHeader, 0) == 0);
    // the missing energy error is written as nan
    CHECK(text.find(",nan,nan,") != std::string::npos);
}

TEST_CASE("CSV round trip is bit exact") {
    std::vector<AdaptiveRecord> records;
    for (int l = 0; l < 6; ++l) records.push_back(sample_record(l));
    std::stringstream io;
    write_records_csv(records, io);
    const auto back = read_records_csv(io);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(identical(back[i], records[i]));

    const fs::path path = fs::temp_directory_path() / "afvm_records_roundtrip.csv";
    write_records_csv(records, path);
    const auto from_file = read_records_csv(path);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(identical(from_file[i], records[i]));
    fs::remove(path);
}

TEST_CASE("CSV errors") {
    CHECK_THROWS_AS(write_records_csv(std::vector<AdaptiveRecord>{}, fs::temp_directory_path() / "afvm_empty.csv"),
                    ValidationError);
    const AdaptiveRecord r = sample_record(0);
    CHECK_THROWS_AS(write_records_csv(std::span(&r, 1), fs::path("/nonexistent-dir/records.csv")), IoError);
    std::istringstream bad_header("level,n\n1,2\n");
    CHECK_THROWS_AS(read_records_csv(bad_header), ParseError);
    std::istringstream bad_value(std::string(kRecordsHeader) + "\n0,16,13,x,1,1,1,1,1,1,1,1,1,1\n");
    CHECK_THROWS_AS(read_records_csv(bad_value), ParseError);
    std::istringstream short_row(std::string(kRecordsHeader) + "\n0,16,13\n");
    CHECK_THROWS_AS(read_records_csv(short_row), ParseError);
}

TEST_CASE("CLI rejects invalid parameters") {
    const CommandResult theta = run_cli("--theta 1.5 --out " + (fs::temp_directory_path() / "afvm_cli_bad").string());
    CHECK(theta.exit_code == 2);
    CHECK(theta.output.find("theta must lie in (0,1]") != std::string::npos);
    CHECK(run_cli("--theta-prime 0.9 --theta 0.5").exit_code == 2);
    CHECK(run_cli("--problem no-such-problem").exit_code == 2);
    CHECK(run_cli("--mode sideways").exit_code == 2);
    CHECK(run_cli("--bogus-flag").exit_code == 2);
}

TEST_CASE("CLI runs are deterministic and write a summary") {
    const fs::path a = fs::temp_directory_path() / "afvm_cli_a";
    const fs::path b = fs::temp_directory_path() / "afvm_cli_b";
    for (const fs::path& dir : {a, b}) {
        fs::remove_all(dir);
        const CommandResult r =
            run_cli("--problem lshape-singular --max-elements 2000 --skip-suites --quiet --out " + dir.string());
        REQUIRE(r.exit_code == 0);
    }
    const std::string csv = read_file(a / "records.csv");
    CHECK(mask_timings(csv) == mask_timings(read_file(b / "records.csv")));

    const auto records = read_records_csv(a / "records.csv");
    REQUIRE(records.size() >= 3);
    for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].n_elements > records[i - 1].n_elements);

    const nlohmann::json summary = nlohmann::json::parse(read_file(a / "summary.json"));
    CHECK(summary["problem"] == "lshape-singular");
    CHECK(summary["mode"] == "adaptive");
    CHECK(summary["levels"] == records.size());
    for (const char* key : {"coefficient_bounds", "smooth_rates", "lshape_rates", "marking_bounds",
                            "linear_convergence", "reliability_efficiency", "quasi_galerkin_defect"}) {
        REQUIRE(summary["acceptance"].contains(key));
        CHECK(summary["acceptance"][key].contains("passed"));
        CHECK(summary["acceptance"][key].contains("measured"));
    }
    CHECK(summary["acceptance"]["smooth_rates"]["passed"].is_null());
    CHECK(summary["acceptance"]["marking_bounds"]["passed"] == true);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("CLI uniform mode with a level limit") {
    const fs::path dir = fs::temp_directory_path() / "afvm_cli_uniform";
    fs::remove_all(dir);
    const CommandResult r = run_cli("--problem square-smooth --mode uniform --levels 3 --skip-suites --quiet --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    const auto records = read_records_csv(dir / "records.csv");
    REQUIRE(records.size() == 3);
    CHECK(records[2].n_elements == 256);
    CHECK(std::isnan(records[0].ratio_card));
    fs::remove_all(dir);
}

TEST_CASE("CLI accepts a custom problem config") {
    const fs::path dir = fs::temp_directory_path() / "afvm_cli_custom";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "problem.json") << R"({
        "mesh": {"vertices": [[0,0],[1,0],[1,1],[0,1],[0.5,0.5]], "elements": [[0,1,4],[1,2,4],[2,3,4],[3,0,4]]},
        "coefficient": [[1, 0], [0, 1]],
        "source": 1})";
    const CommandResult r =
        run_cli("--problem " + (dir / "problem.json").string() + " --max-elements 500 --skip-suites --quiet --out " +
                (dir / "out").string());
    REQUIRE(r.exit_code == 0);
    const auto records = read_records_csv(dir / "out" / "records.csv");
    for (const AdaptiveRecord& rec : records) CHECK(std::isnan(rec.energy_error));
    fs::remove_all(dir);
}

} // TEST_SUITE
