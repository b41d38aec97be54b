#include "cqed/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cqed/error.hpp"
#include "cqed/lineshape.hpp"
#include "cqed/textio.hpp"

namespace cqed {
namespace {

void expect_header(const CsvTable& t, std::initializer_list<const char*> names) {
  std::vector<std::string> want(names.begin(), names.end());
  if (t.header != want) {
    std::string w;
    for (const auto& n : want) w += (w.empty() ? "" : ",") + n;
    throw InputError("line 1: expected header '" + w + "'");
  }
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

}  // namespace

TraceFormat detect_format(const std::string& header_line) {
  std::string h;
  for (char c : header_line) {
    if (c != ' ' && c != '\r' && c != '\t') h += c;
  }
  if (h == "freq_ghz,re,im") return TraceFormat::Reflection;
  if (h == "freq_ghz,mag_db") return TraceFormat::MagnitudeDb;
  if (h == "t_ns,y") return TraceFormat::TimeSeries;
  return TraceFormat::Unknown;
}

std::string reflection_csv(const ComplexTrace& t) {
  std::string out = "freq_ghz,re,im\n";
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    out += join_csv_row({t.freqs_ghz[i], t.values[i].real(), t.values[i].imag()}) + '\n';
  }
  return out;
}

ComplexTrace read_reflection_csv(std::istream& in) {
  const auto table = read_csv(in);
  expect_header(table, {"freq_ghz", "re", "im"});
  ComplexTrace t;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2])) {
      throw InputError("line " + std::to_string(table.line_numbers[i]) + ": non-finite value");
    }
    if (!t.freqs_ghz.empty() && !(r[0] > t.freqs_ghz.back())) {
      throw InputError("line " + std::to_string(table.line_numbers[i]) +
                       ": frequencies must be strictly increasing");
    }
    t.freqs_ghz.push_back(r[0]);
    t.values.emplace_back(r[1], r[2]);
  }
  if (t.values.empty()) throw InputError("line 2: no data rows");
  return t;
}

ComplexTrace read_reflection_csv(const std::string& path) {
  auto in = open(path);
  return read_reflection_csv(in);
}

std::string magnitude_db_csv(const Samples& s) {
  std::string out = "freq_ghz,mag_db\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!(s.y[i] > 0.0)) throw InputError("magnitude must be > 0 to express in dB");
    out += join_csv_row({s.x[i], linear_to_db(s.y[i])}) + '\n';
  }
  return out;
}

namespace {

Samples read_pairs(std::istream& in, std::initializer_list<const char*> header) {
  const auto table = read_csv(in);
  expect_header(table, header);
  Samples s;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    if (!std::isfinite(r[0]) || !std::isfinite(r[1])) {
      throw InputError("line " + std::to_string(table.line_numbers[i]) + ": non-finite value");
    }
    if (!s.x.empty() && !(r[0] > s.x.back())) {
      throw InputError("line " + std::to_string(table.line_numbers[i]) +
                       ": abscissa must be strictly increasing");
    }
    s.x.push_back(r[0]);
    s.y.push_back(r[1]);
  }
  if (s.x.empty()) throw InputError("line 2: no data rows");
  return s;
}

}  // namespace

Samples read_magnitude_db_csv(std::istream& in) {
  auto s = read_pairs(in, {"freq_ghz", "mag_db"});
  for (double& y : s.y) y = db_to_linear(y);
  return s;
}

Samples read_magnitude_db_csv(const std::string& path) {
  auto in = open(path);
  return read_magnitude_db_csv(in);
}

std::string timeseries_csv(const Samples& s) {
  std::string out = "t_ns,y\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) out += join_csv_row({s.x[i], s.y[i]}) + '\n';
  return out;
}

Samples read_timeseries_csv(std::istream& in) { return read_pairs(in, {"t_ns", "y"}); }

Samples read_timeseries_csv(const std::string& path) {
  auto in = open(path);
  return read_timeseries_csv(in);
}

std::string grid_csv(const Grid2D& g) {
  validate(g);
  std::string out = g.slow_name + '/' + g.fast_name;
  for (double f : g.fast) out += ',' + format_double(f);
  out += '\n';
  for (Eigen::Index r = 0; r < g.values.rows(); ++r) {
    out += format_double(g.slow[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < g.values.cols(); ++c) out += ',' + format_double(g.values(r, c));
    out += '\n';
  }
  return out;
}

Grid2D read_grid_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InputError("line 1: empty grid file");
  const auto comma = header.find(',');
  const auto label = header.substr(0, comma);
  const auto slash = label.find('/');
  if (comma == std::string::npos || slash == std::string::npos) {
    throw InputError("line 1: expected '<slow>/<fast>,<fast axis values>'");
  }
  Grid2D g;
  g.slow_name = label.substr(0, slash);
  g.fast_name = label.substr(slash + 1);
  // Reparse the whole header as numbers after the label.
  std::stringstream rest;
  rest << "label" << header.substr(comma) << '\n';
  std::string line;
  while (std::getline(in, line)) rest << line << '\n';
  const auto table = read_csv(rest);
  for (std::size_t i = 1; i < table.header.size(); ++i) {
    g.fast.push_back(parse_double(table.header[i]));
  }
  g.values.resize(static_cast<Eigen::Index>(table.rows.size()),
                  static_cast<Eigen::Index>(g.fast.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    g.slow.push_back(table.rows[r][0]);
    for (std::size_t c = 0; c < g.fast.size(); ++c) {
      g.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][c + 1];
    }
  }
  return g;
}

Grid2D read_grid_csv(const std::string& path) {
  auto in = open(path);
  return read_grid_csv(in);
}

}  // namespace cqed
