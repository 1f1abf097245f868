#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpshap/errors.hpp"
#include "fpshap/rng.hpp"

namespace fpshap {

// A numeric table split row-wise into a training block (first `train_rows`
// rows) and an explanation block (the rest).
struct Dataset {
  Eigen::MatrixXd features;  // (train + explain) x p
  Eigen::VectorXd response;
  std::vector<std::string> feature_names;
  std::string response_name;
  Eigen::Index train_rows = 0;

  int feature_count() const { return static_cast<int>(features.cols()); }
  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index explain_rows() const { return rows() - train_rows; }

  auto train_features() const { return features.topRows(train_rows); }
  auto train_response() const { return response.head(train_rows); }
  auto explain_features() const {
    return features.bottomRows(explain_rows());
  }
};

namespace detail {

inline double parse_cell(const std::string& cell, std::size_t row,
                         std::size_t column) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || cell.empty()) {
    throw CsvError("CSV parse error: cell '" + cell + "' at row " +
                       std::to_string(row) + ", column " +
                       std::to_string(column) + " is not numeric",
                   row, column);
  }
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline Eigen::Index split_point(double fraction, Eigen::Index rows) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("split fraction must lie strictly inside (0, 1)");
  }
  const auto train = static_cast<Eigen::Index>(
      std::llround(fraction * static_cast<double>(rows)));
  return std::clamp<Eigen::Index>(train, 1, rows - 1);
}

}  // namespace detail

// Reads a comma-separated file (UTF-8, mandatory header row, '.' decimals, no
// quoting) and splits it deterministically: the first `split_fraction` of the
// rows train, the rest are explained. Cell errors are reported with their
// 1-based (row, column); the header counts as row 1.
inline Dataset load_csv(const std::filesystem::path& path,
                        const std::string& response_column,
                        double split_fraction) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");

  std::string line;
  if (!std::getline(in, line)) {
    throw Error("'" + path.string() + "' is empty; a header row is required");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::ptrdiff_t response_index = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == response_column) {
      response_index = static_cast<std::ptrdiff_t>(i);
      break;
    }
  }
  if (response_index < 0) {
    throw Error("response column '" + response_column + "' not found in '" +
                path.string() + "'");
  }

  std::vector<std::vector<double>> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw CsvError("CSV parse error: row " + std::to_string(line_number) +
                         " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(header.size()),
                     line_number, cells.size());
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      parsed[c] = detail::parse_cell(cells[c], line_number, c + 1);
    }
    rows.push_back(std::move(parsed));
  }
  if (rows.size() < 2) {
    throw Error("'" + path.string() +
                "' needs at least 2 data rows to form a train/explain split");
  }
  if (header.size() < 2) {
    throw Error("'" + path.string() + "' needs a response and at least one feature column");
  }

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(header.size()) - 1;
  ds.features.resize(n, p);
  ds.response.resize(n);
  ds.response_name = response_column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) != response_index) {
      ds.feature_names.push_back(header[c]);
    }
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index f = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(r)][c];
      if (static_cast<std::ptrdiff_t>(c) == response_index) {
        ds.response(r) = v;
      } else {
        ds.features(r, f++) = v;
      }
    }
  }
  ds.train_rows = detail::split_point(split_fraction, n);
  return ds;
}

// Writes a dataset back out in the same dialect load_csv reads. %.17g keeps
// doubles bit-exact through a round trip.
inline void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& name : ds.feature_names) out << name << ',';
  out << ds.response_name << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < ds.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features(r, c));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.response(r));
    out << buf << '\n';
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

struct SyntheticSpec {
  int p = 2;
  Eigen::Index rows = 100;
  double noise_sd = 0.0;
  double beta0 = 1.0;
  std::optional<Eigen::VectorXd> beta;  // drawn from the seed when absent
  double split_fraction = 0.5;
};

// Independent standard-normal features with a linear response. Deterministic
// in the seed; coefficients are either given or drawn once from a dedicated
// seed stream.
inline Dataset generate_synthetic(const SyntheticSpec& spec,
                                  std::uint64_t seed) {
  if (spec.p < 2) throw ArgumentError("generate_synthetic: p must be >= 2");
  if (spec.rows < 2 * (spec.p + 2)) {
    throw ArgumentError("generate_synthetic: need at least 2(p+2) rows");
  }
  if (spec.noise_sd < 0) {
    throw ArgumentError("generate_synthetic: negative noise sd");
  }
  Eigen::VectorXd beta;
  if (spec.beta) {
    if (spec.beta->size() != spec.p) {
      throw ArgumentError("generate_synthetic: beta length mismatch");
    }
    beta = *spec.beta;
  } else {
    Rng beta_rng(derive_seed(seed, seed_stream::kBeta));
    beta.resize(spec.p);
    for (int j = 0; j < spec.p; ++j) beta(j) = 2.0 * beta_rng.normal();
  }

  Dataset ds;
  ds.features.resize(spec.rows, spec.p);
  ds.response.resize(spec.rows);
  ds.response_name = "y";
  for (int j = 0; j < spec.p; ++j) {
    ds.feature_names.push_back("x" + std::to_string(j));
  }
  Rng rng(derive_seed(seed, seed_stream::kData));
  for (Eigen::Index r = 0; r < spec.rows; ++r) {
    for (int j = 0; j < spec.p; ++j) ds.features(r, j) = rng.normal();
  }
  for (Eigen::Index r = 0; r < spec.rows; ++r) {
    double y = spec.beta0 + ds.features.row(r).dot(beta);
    if (spec.noise_sd > 0) y += spec.noise_sd * rng.normal();
    ds.response(r) = y;
  }
  ds.train_rows = detail::split_point(spec.split_fraction, spec.rows);
  return ds;
}

}  // namespace fpshap
