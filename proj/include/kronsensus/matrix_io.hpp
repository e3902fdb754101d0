#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "kronsensus/matlin.hpp"

namespace kronsensus {

// Text format: "rows cols" on the first line, then one line per row with
// space-separated values at 17 significant digits.
void write_matrix(std::ostream& os, const MatrixXd& m);
void write_matrix(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_matrix(std::istream& is);
MatrixXd read_matrix(const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace kronsensus
