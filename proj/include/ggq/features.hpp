#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ggq/errors.hpp"
#include "ggq/mdp.hpp"
#include "ggq/rng.hpp"

namespace ggq {

/**
 * Feature matrix of shape N x (|S||A|). Column s * |A| + a holds phi_{s,a}.
 * Every column has Euclidean norm at most 1 (tolerance 1e-9).
 */
class FeatureMap {
 public:
  FeatureMap(Matrix table, std::size_t n_states, std::size_t n_actions)
      : table_(std::move(table)), n_states_(n_states), n_actions_(n_actions) {
    if (table_.rows() < 1) throw std::invalid_argument("FeatureMap: need at least one feature");
    if (static_cast<std::size_t>(table_.cols()) != n_states_ * n_actions_)
      throw std::invalid_argument("FeatureMap: column count must equal |S|*|A|");
    if (!table_.allFinite()) throw std::invalid_argument("FeatureMap: non-finite entry");
    for (Eigen::Index c = 0; c < table_.cols(); ++c) {
      const double norm = table_.col(c).norm();
      if (norm > 1.0 + 1e-9) {
        std::ostringstream msg;
        msg << "FeatureMap: column " << c << " has norm " << norm << " > 1";
        throw std::invalid_argument(msg.str());
      }
    }
  }

  std::size_t n_features() const noexcept { return static_cast<std::size_t>(table_.rows()); }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  const Matrix& table() const noexcept { return table_; }

  auto phi(StateId s, ActionId a) const {
    return table_.col(static_cast<Eigen::Index>(s * n_actions_ + a));
  }
  /// The |A| columns of state s, contiguous.
  auto state_block(StateId s) const {
    return table_.middleCols(static_cast<Eigen::Index>(s * n_actions_),
                             static_cast<Eigen::Index>(n_actions_));
  }

  double max_column_norm() const { return table_.colwise().norm().maxCoeff(); }

  bool operator==(const FeatureMap& other) const {
    return n_states_ == other.n_states_ && n_actions_ == other.n_actions_ &&
           table_.rows() == other.table_.rows() && table_ == other.table_;
  }

 private:
  Matrix table_;
  std::size_t n_states_;
  std::size_t n_actions_;
};

/// Gaussian features with every column rescaled to unit norm.
inline FeatureMap random_features(std::size_t n_features, std::size_t n_states,
                                  std::size_t n_actions, std::uint64_t seed) {
  if (n_features < 1) throw std::invalid_argument("random_features: n_features must be >= 1");
  Rng rng(seed, streams::kFeatures);
  const auto rows = static_cast<Eigen::Index>(n_features);
  const auto cols = static_cast<Eigen::Index>(n_states * n_actions);
  Matrix table(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) table(r, c) = rng.normal();
    double norm = table.col(c).norm();
    while (norm == 0.0) {
      for (Eigen::Index r = 0; r < rows; ++r) table(r, c) = rng.normal();
      norm = table.col(c).norm();
    }
    table.col(c) /= norm;
  }
  return {std::move(table), n_states, n_actions};
}

/// Q_theta(s, a) = phi_{s,a}^T theta.
inline double q_value(const FeatureMap& features, const Vector& theta, StateId s, ActionId a) {
  if (static_cast<std::size_t>(theta.size()) != features.n_features())
    throw std::invalid_argument("q_value: weight dimension does not match feature count");
  if (s >= features.n_states() || a >= features.n_actions())
    throw std::invalid_argument("q_value: state or action out of range");
  return features.phi(s, a).dot(theta);
}

// ---------------------------------------------------------------------------
// CSV: one row per feature, columns ordered (s, a) lexicographically.

inline void write_features_csv(const FeatureMap& features, std::ostream& out) {
  char buf[32];
  const Matrix& t = features.table();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", t(r, c));
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

inline FeatureMap read_features_csv(std::istream& in, std::size_t n_states, std::size_t n_actions) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t\r", used) != std::string::npos)
        throw SchemaError("features csv line " + std::to_string(line_no) + ": bad number '" +
                          cell + "'");
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw SchemaError("features csv line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("features csv: no rows");
  Matrix table(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return {std::move(table), n_states, n_actions};
}

}  // namespace ggq
