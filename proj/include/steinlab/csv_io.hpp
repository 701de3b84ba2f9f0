#pragma once

#include "steinlab/base_kernels.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace steinlab {

/// One observation per row, comma separated, '.' decimal point regardless of
/// locale. A first row that does not parse as numbers is taken as a header.
/// Blank lines and lines starting with '#' are skipped; an input with no data rows is an error.
PointSet parse_csv(const std::string& text);
PointSet read_csv(const std::string& path);

/// Shortest representation of v that round-trips (at most 17 significant digits).
std::string format_double(double v);

void write_csv(std::ostream& out, const PointSet& points, const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const PointSet& points, const std::vector<std::string>& header = {});

}  // namespace steinlab
