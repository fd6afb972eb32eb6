#pragma once

// Long-format CSV ingestion (`subject,t,y`) and round-trip-exact numeric
// formatting shared by the CLI writers.

#include <iosfwd>
#include <string>
#include <vector>

#include "floc/model.hpp"

namespace floc {

// Parses the long format; throws ParseError with a 1-based line number on
// malformed headers or rows. Values are not range-checked here (validate()
// owns that) except for finiteness of the parsed doubles.
std::vector<RawPoint> read_long_csv(std::istream& in);

std::vector<RawPoint> read_long_csv_file(const std::string& path);

// 17 significant digits: every double survives a write/read cycle bit-exact.
std::string fmt17(double v);

// Compact %g formatting for labels (lambda values in file names).
std::string fmtg(double v);

}  // namespace floc
