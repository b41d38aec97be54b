#include "cqed/trace.hpp"

#include <cmath>
#include <string>

#include "cqed/error.hpp"

namespace cqed {

void validate(const ComplexTrace& t) {
  if (t.freqs_ghz.size() != t.values.size()) {
    throw InputError("trace frequency and value arrays differ in length");
  }
  for (std::size_t i = 0; i < t.freqs_ghz.size(); ++i) {
    if (!std::isfinite(t.freqs_ghz[i]) || !std::isfinite(t.values[i].real()) ||
        !std::isfinite(t.values[i].imag())) {
      throw InputError("trace sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(t.freqs_ghz[i] > t.freqs_ghz[i - 1])) {
      throw InputError("trace frequencies must be strictly increasing (sample " +
                       std::to_string(i) + ")");
    }
  }
}

void validate(const Samples& s, const char* what) {
  if (s.x.size() != s.y.size()) throw InputError(std::string(what) + ": x and y differ in length");
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
      throw InputError(std::string(what) + ": sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(s.x[i] > s.x[i - 1])) {
      throw InputError(std::string(what) + ": abscissa must be strictly increasing");
    }
  }
}

void validate(const Grid2D& g) {
  if (g.values.rows() != static_cast<Eigen::Index>(g.slow.size()) ||
      g.values.cols() != static_cast<Eigen::Index>(g.fast.size())) {
    throw InputError("grid values do not match the axis lengths");
  }
}

Samples column(const Grid2D& g, Eigen::Index col) {
  Samples s{g.slow, std::vector<double>(g.slow.size())};
  for (Eigen::Index r = 0; r < g.values.rows(); ++r) s.y[r] = g.values(r, col);
  return s;
}

Samples row(const Grid2D& g, Eigen::Index r) {
  Samples s{g.fast, std::vector<double>(g.fast.size())};
  for (Eigen::Index c = 0; c < g.values.cols(); ++c) s.y[c] = g.values(r, c);
  return s;
}

}  // namespace cqed
