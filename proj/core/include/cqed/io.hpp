#pragma once

#include <iosfwd>
#include <string>

#include "cqed/trace.hpp"

namespace cqed {

// Trace file formats, one header line each:
//   freq_ghz,re,im   complex reflection
//   freq_ghz,mag_db  scalar magnitude (20 log10 |S|)
//   t_ns,y           time series
// 2D maps: header "<slow>/<fast>,<fast values...>", then one row per slow
// value: "<slow value>,<row values...>".

enum class TraceFormat { Reflection, MagnitudeDb, TimeSeries, Unknown };

TraceFormat detect_format(const std::string& header_line);

std::string reflection_csv(const ComplexTrace& t);
ComplexTrace read_reflection_csv(std::istream& in);
ComplexTrace read_reflection_csv(const std::string& path);

// Input y is linear magnitude; written as dB.
std::string magnitude_db_csv(const Samples& s);
// Returns linear magnitude.
Samples read_magnitude_db_csv(std::istream& in);
Samples read_magnitude_db_csv(const std::string& path);

std::string timeseries_csv(const Samples& s);
Samples read_timeseries_csv(std::istream& in);
Samples read_timeseries_csv(const std::string& path);

std::string grid_csv(const Grid2D& g);
Grid2D read_grid_csv(std::istream& in);
Grid2D read_grid_csv(const std::string& path);

}  // namespace cqed
