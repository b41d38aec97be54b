#include "cqed/background.hpp"

#include "stats.hpp"

namespace cqed {

Grid2D subtract_background(const Grid2D& map, BackgroundAxis axis) {
  validate(map);
  Grid2D out = map;
  const Eigen::Index rows = map.values.rows(), cols = map.values.cols();
  if (axis == BackgroundAxis::Slow) {
    std::vector<double> buf(static_cast<std::size_t>(rows));
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (Eigen::Index r = 0; r < rows; ++r) buf[r] = map.values(r, c);
      out.values.col(c).array() -= detail::median(buf);
    }
  } else {
    std::vector<double> buf(static_cast<std::size_t>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) buf[c] = map.values(r, c);
      out.values.row(r).array() -= detail::median(buf);
    }
  }
  return out;
}

}  // namespace cqed
