#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "amest/sim.hpp"

namespace amest::cli {

/// Column names of run.csv, in order.
const std::vector<std::string>& csv_columns();

/// Writes the header and one row per log entry. Every value is printed in
/// scientific notation with 15 significant digits; lines end in '\n'.
void write_csv(std::ostream& out, const SimLog& log);
std::string csv_text(const SimLog& log);

/// Parses text produced by write_csv. The accelerations, which the CSV does
/// not carry, come back as zero. Throws std::runtime_error on a header or
/// shape mismatch.
SimLog read_csv(std::istream& in);

/// Formats one value the way the CSV does.
std::string csv_number(double v);

}  // namespace amest::cli
