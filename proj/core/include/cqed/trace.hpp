#pragma once

#include <complex>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cqed {

// Reflection samples from a VNA sweep. Frequencies in GHz, strictly increasing.
struct ComplexTrace {
  std::vector<double> freqs_ghz;
  std::vector<std::complex<double>> values;
  double power_dbm = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, std::string> metadata;
};

void validate(const ComplexTrace& t);

// Paired real samples, e.g. (f in GHz, |S|) or (t in ns, population).
struct Samples {
  std::vector<double> x;
  std::vector<double> y;
};

void validate(const Samples& s, const char* what);

// Rows follow the slow axis, columns the fast axis.
struct Grid2D {
  std::string slow_name;
  std::string fast_name;
  std::vector<double> slow;
  std::vector<double> fast;
  Eigen::MatrixXd values;
};

void validate(const Grid2D& g);

Samples column(const Grid2D& g, Eigen::Index col);  // along the slow axis
Samples row(const Grid2D& g, Eigen::Index r);        // along the fast axis

}  // namespace cqed
