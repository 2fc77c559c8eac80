#include "dpsynth/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dpsynth {

double ColumnScaling::scale(double x, std::size_t col) const {
  const double lo = mins.at(col), hi = maxs.at(col);
  if (hi == lo) return 0.5;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

double ColumnScaling::unscale(double x, std::size_t col) const {
  const double lo = mins.at(col), hi = maxs.at(col);
  if (hi == lo) return lo;
  return lo + x * (hi - lo);
}

std::vector<double> ColumnScaling::unscale_point(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = unscale(x[j], j);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted)
    throw std::invalid_argument("csv: unterminated quote at row " + std::to_string(row));
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  std::size_t e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawCsv read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  RawCsv raw;
  std::string line;
  std::size_t rownum = 0;
  while (std::getline(in, line)) {
    ++rownum;
    if (line.empty() && in.peek() == EOF) break;
    const auto cells = split_csv_line(line, rownum);
    if (rownum == 1) {
      raw.header = cells;
      continue;
    }
    if (cells.size() != raw.header.size())
      throw std::invalid_argument("csv: row " + std::to_string(rownum) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(raw.header.size()));
    std::vector<double> vals(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      try {
        std::size_t used = 0;
        vals[c] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::invalid_argument("csv: cannot parse cell at row " + std::to_string(rownum) +
                                    ", column " + std::to_string(c + 1) + " ('" + cell + "')");
      }
      if (!std::isfinite(vals[c]))
        throw std::invalid_argument("csv: non-finite value at row " + std::to_string(rownum) +
                                    ", column " + std::to_string(c + 1));
    }
    raw.rows.push_back(std::move(vals));
  }
  if (raw.header.empty()) throw std::invalid_argument("csv: empty file " + path);
  if (raw.rows.empty()) throw std::invalid_argument("csv: no data rows in " + path);
  return raw;
}

}  // namespace

CsvData load_csv(const std::string& path) {
  const RawCsv raw = read_numeric_csv(path);
  const std::size_t d = raw.header.size();
  ColumnScaling scaling;
  scaling.names = raw.header;
  scaling.mins.assign(d, std::numeric_limits<double>::infinity());
  scaling.maxs.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : raw.rows)
    for (std::size_t c = 0; c < d; ++c) {
      scaling.mins[c] = std::min(scaling.mins[c], row[c]);
      scaling.maxs[c] = std::max(scaling.maxs[c], row[c]);
    }
  CsvData out;
  out.scaling = scaling;
  out.dataset.points.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    std::vector<double> p(d);
    for (std::size_t c = 0; c < d; ++c) p[c] = scaling.scale(row[c], c);
    out.dataset.points.push_back(std::move(p));
  }
  return out;
}

CsvData load_csv_with_bounds(const std::string& path, const ColumnScaling& bounds) {
  const RawCsv raw = read_numeric_csv(path);
  if (raw.header.size() != bounds.mins.size())
    throw std::invalid_argument("csv: bounds column count does not match data");
  CsvData out;
  out.scaling = bounds;
  out.scaling.names = raw.header;
  out.dataset.points.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    std::vector<double> p(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) p[c] = bounds.scale(row[c], c);
    out.dataset.points.push_back(std::move(p));
  }
  return out;
}

ColumnScaling load_bounds(const std::string& path) {
  const RawCsv raw = read_numeric_csv(path);
  if (raw.rows.size() != 2)
    throw std::invalid_argument("bounds file must contain exactly a min row and a max row");
  ColumnScaling b;
  b.names = raw.header;
  b.mins = raw.rows[0];
  b.maxs = raw.rows[1];
  for (std::size_t c = 0; c < b.mins.size(); ++c)
    if (!(b.mins[c] <= b.maxs[c]))
      throw std::invalid_argument("bounds file: min exceeds max in column " +
                                  std::to_string(c + 1));
  return b;
}

void write_csv(const std::string& path, const Dataset& dataset, const ColumnScaling& scaling) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  for (std::size_t c = 0; c < scaling.names.size(); ++c)
    out << (c ? "," : "") << scaling.names[c];
  out << "\n";
  char buf[64];
  for (const auto& p : dataset.points) {
    const auto orig = scaling.unscale_point(p);
    for (std::size_t c = 0; c < orig.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", orig[c]);
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

}  // namespace dpsynth
