#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lpwalk {

/// A finite metric space stored as a dense lower triangle (diagonal included).
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;
  explicit FiniteMetricSpace(std::size_t k) : k_(k), tri_(k * (k + 1) / 2, 0.0) {}

  std::size_t size() const { return k_; }

  double operator()(std::size_t i, std::size_t j) const { return tri_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double value) { tri_[index(i, j)] = value; }

  /// Optional time stamps, one per point.
  const std::optional<std::vector<double>>& labels() const { return labels_; }
  void set_labels(std::vector<double> labels);

  double diameter() const;

  /// Zero diagonal, nonnegative entries, and the triangle inequality up to
  /// rel_tol * diameter.
  bool satisfies_metric_axioms(double rel_tol = 1e-9) const;

 private:
  static std::size_t index(std::size_t i, std::size_t j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  std::size_t k_ = 0;
  std::vector<double> tri_;
  std::optional<std::vector<double>> labels_;
};

// Text format:
//   k
//   <k>
//   d(0,0)
//   d(1,0),d(1,1)
//   ...
//   d(k-1,0),...,d(k-1,k-1)
// Floats are written with 17 significant digits. Labels are not stored.
void write_metric_space_csv(std::ostream& out, const FiniteMetricSpace& space);
/// Throws std::invalid_argument on malformed input or a non-metric matrix.
FiniteMetricSpace read_metric_space_csv(std::istream& in);

}  // namespace lpwalk
