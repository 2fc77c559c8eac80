#pragma once

#include <string>
#include <vector>

#include "dpsynth/grid.hpp"

namespace dpsynth {

// Per-column min-max scaling observed on ingest. Degenerate columns
// (max == min) map to the constant 0.5 and unscale back to that constant.
struct ColumnScaling {
  std::vector<std::string> names;
  std::vector<double> mins;
  std::vector<double> maxs;

  double scale(double x, std::size_t col) const;
  double unscale(double x, std::size_t col) const;
  std::vector<double> unscale_point(const std::vector<double>& x) const;
};

struct CsvData {
  Dataset dataset;  // rescaled into [0,1]^d
  ColumnScaling scaling;
};

// Header row required, every body cell a finite decimal. Parse failures
// report the row and column. Quoted fields are accepted.
CsvData load_csv(const std::string& path);

// Load with externally supplied bounds (public bounds file: header plus a
// min row and a max row). Values are clamped into the bounds.
CsvData load_csv_with_bounds(const std::string& path, const ColumnScaling& bounds);

ColumnScaling load_bounds(const std::string& path);

// Dataset in original units, one row per point.
void write_csv(const std::string& path, const Dataset& dataset, const ColumnScaling& scaling);

}  // namespace dpsynth
