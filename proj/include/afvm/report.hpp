#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "afvm/adaptivity.hpp"

namespace afvm {

inline constexpr const char* kRecordsHeader =
    "level,n_elements,n_nodes,eta,osc,energy_error,fem_energy_error,ratio_card,osc_fraction_eta,sigma,solve_iters,"
    "wall_ms_solve,wall_ms_estimate,wall_ms_refine";

/// Shortest decimal that round-trips; NaN is written as `nan`.
std::string format_double(double v);

void write_records_csv(std::span<const AdaptiveRecord> records, std::ostream& out);
/// Throws ValidationError for an empty record list, IoError on write failure.
void write_records_csv(std::span<const AdaptiveRecord> records, const std::filesystem::path& path);

/// Inverse of write_records_csv. Throws ParseError or IoError.
std::vector<AdaptiveRecord> read_records_csv(std::istream& in);
std::vector<AdaptiveRecord> read_records_csv(const std::filesystem::path& path);

} // namespace afvm
