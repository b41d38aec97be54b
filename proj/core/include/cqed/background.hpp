#pragma once

#include "cqed/trace.hpp"

namespace cqed {

enum class BackgroundAxis {
  Slow,  // median over the slow axis (e.g. gate) for each fast-axis column
  Fast,  // median over the fast axis for each slow-axis row
};

// Removes the median along the chosen axis so features that vary along it
// (a gate-dependent qubit line) survive while a static background does not.
Grid2D subtract_background(const Grid2D& map, BackgroundAxis axis = BackgroundAxis::Slow);

}  // namespace cqed
