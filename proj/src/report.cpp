#include "afvm/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace afvm {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

double parse_double(std::string_view s, int line) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("records line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
    return v;
}

long long parse_integer(std::string_view s, int line) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("records line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_records_csv(std::span<const AdaptiveRecord> records, std::ostream& out) {
    out << kRecordsHeader << '\n';
    for (const AdaptiveRecord& r : records) {
        out << r.level << ',' << r.n_elements << ',' << r.n_nodes << ',' << format_double(r.eta) << ','
            << format_double(r.osc) << ',' << format_double(r.energy_error) << ',' << format_double(r.fem_energy_error)
            << ',' << format_double(r.ratio_card) << ',' << format_double(r.osc_fraction_eta) << ','
            << format_double(r.sigma) << ',' << r.solve_iters << ',' << format_double(r.wall_ms_solve) << ','
            << format_double(r.wall_ms_estimate) << ',' << format_double(r.wall_ms_refine) << '\n';
    }
}

void write_records_csv(std::span<const AdaptiveRecord> records, const std::filesystem::path& path) {
    if (records.empty()) throw ValidationError("no records to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_records_csv(records, out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<AdaptiveRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader) throw ParseError("records: missing or unexpected header");
    std::vector<AdaptiveRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 14)
            throw ParseError("records line " + std::to_string(line_no) + ": expected 14 fields, got " +
                             std::to_string(f.size()));
        AdaptiveRecord r;
        r.level = static_cast<int>(parse_integer(f[0], line_no));
        r.n_elements = parse_integer(f[1], line_no);
        r.n_nodes = parse_integer(f[2], line_no);
        r.eta = parse_double(f[3], line_no);
        r.osc = parse_double(f[4], line_no);
        r.energy_error = parse_double(f[5], line_no);
        r.fem_energy_error = parse_double(f[6], line_no);
        r.ratio_card = parse_double(f[7], line_no);
        r.osc_fraction_eta = parse_double(f[8], line_no);
        r.sigma = parse_double(f[9], line_no);
        r.solve_iters = parse_integer(f[10], line_no);
        r.wall_ms_solve = parse_double(f[11], line_no);
        r.wall_ms_estimate = parse_double(f[12], line_no);
        r.wall_ms_refine = parse_double(f[13], line_no);
        records.push_back(r);
    }
    return records;
}

std::vector<AdaptiveRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    return read_records_csv(in);
}

} // namespace afvm
