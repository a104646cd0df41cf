#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace htz::io {

// All numeric output funnels through one formatter so runs are reproducible
// byte for byte: shortest round-trip representation via %.17g, with the
// "-0" / "0" distinction collapsed.
std::string format_double(double v);

// One CSV line from the given cells; no quoting, callers keep cells clean.
std::string csv_line(const std::vector<std::string>& cells);

// Matrix as CSV rows, each entry through format_double.
std::string csv_matrix(const Eigen::MatrixXd& m);

void write_text_file(const std::string& path, const std::string& body);

}  // namespace htz::io
