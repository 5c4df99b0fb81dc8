#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace pseudoshrink {

// Plain-text CSV, row-major, no header; '.' decimal point.
Eigen::MatrixXd read_matrix_csv(const std::string& path);
void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);
void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out);

// One value per line (spectrum files); blank lines and '#' comments skipped.
Eigen::VectorXd read_vector_lines(const std::string& path);

// Formats with 17 significant digits, the round-trip-exact width for doubles.
std::string format_double(double v);

}  // namespace pseudoshrink
