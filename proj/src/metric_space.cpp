#include "lpwalk/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lpwalk/error.hpp"
#include "lpwalk/report_io.hpp"

namespace lpwalk {

void FiniteMetricSpace::set_labels(std::vector<double> labels) {
  if (labels.size() != k_) throw std::invalid_argument("label count must match point count");
  labels_ = std::move(labels);
}

double FiniteMetricSpace::diameter() const {
  double d = 0.0;
  for (double v : tri_) d = std::max(d, v);
  return d;
}

bool FiniteMetricSpace::satisfies_metric_axioms(double rel_tol) const {
  const double tol = rel_tol * diameter();
  for (std::size_t i = 0; i < k_; ++i) {
    if ((*this)(i, i) != 0.0) return false;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
    }
  }
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j)
      for (std::size_t l = 0; l < k_; ++l)
        if ((*this)(i, l) > (*this)(i, j) + (*this)(j, l) + tol) return false;
  return true;
}

void write_metric_space_csv(std::ostream& out, const FiniteMetricSpace& space) {
  out << "k\n" << space.size() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (j > 0) out << ',';
      out << format_double(space(i, j));
    }
    out << '\n';
  }
}

FiniteMetricSpace read_metric_space_csv(std::istream& in) {
  std::string line;
  auto next_line = [&] {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line() || line != "k") {
    throw std::invalid_argument("metric space file: expected header 'k'");
  }
  if (!next_line()) throw std::invalid_argument("metric space file: missing point count");
  std::size_t k = 0;
  try {
    std::size_t used = 0;
    const long long parsed = std::stoll(line, &used);
    if (used != line.size() || parsed < 1) throw std::invalid_argument("count");
    k = static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
    throw std::invalid_argument("metric space file: bad point count '" + line + "'");
  }
  if (static_cast<long double>(k) * (k + 1) / 2 > static_cast<long double>(memory_cap())) {
    throw ResourceLimitError("metric space file: " + std::to_string(k) + " points exceed the memory cap");
  }
  FiniteMetricSpace space(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!next_line()) throw std::invalid_argument("metric space file: truncated");
    std::stringstream row(line);
    std::string cell;
    std::size_t j = 0;
    while (std::getline(row, cell, ',')) {
      if (j > i) throw std::invalid_argument("metric space file: row " + std::to_string(i) + " too long");
      try {
        std::size_t used = 0;
        space.set(i, j, std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("metric space file: bad value '" + cell + "'");
      }
      ++j;
    }
    if (j != i + 1) throw std::invalid_argument("metric space file: row " + std::to_string(i) + " too short");
  }
  if (!space.satisfies_metric_axioms()) {
    throw std::invalid_argument("metric space file: matrix violates the metric axioms");
  }
  return space;
}

}  // namespace lpwalk
