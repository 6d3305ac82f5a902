#include "lfi/types.hpp"

#include <cmath>

namespace lfi {

ParameterVector::ParameterVector(Vector v, std::vector<std::string> n)
    : values(std::move(v)), names(std::move(n)) {
  if (values.size() < 1) throw ConfigError("parameter vector must have dimension >= 1");
  if (!values.allFinite()) throw NumericError("parameter vector has non-finite entries");
  if (names.empty()) {
    names.reserve(values.size());
    for (int i = 0; i < values.size(); ++i) names.push_back("theta_" + std::to_string(i + 1));
  }
  if (static_cast<int>(names.size()) != values.size())
    throw ConfigError("parameter names do not match dimension");
}

SummaryStatistic::SummaryStatistic(Vector v, SummaryKind k) : values(std::move(v)), kind(k) {
  if (values.size() < 1) throw ConfigError("summary statistic must have dimension >= 1");
  if (!values.allFinite()) throw NumericError("summary statistic has non-finite entries");
}

WeightMatrix::WeightMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw ConfigError("weight matrix must be square and nonempty");
  if (!m_.allFinite()) throw NumericError("weight matrix has non-finite entries");
  if (!m_.isApprox(m_.transpose(), 1e-12))
    throw ConfigError("weight matrix must be symmetric");
  llt_.compute(m_);
  if (llt_.info() != Eigen::Success)
    throw ConfigError("weight matrix must be positive definite (Cholesky failed)");
}

WeightMatrix WeightMatrix::identity(int q) {
  return WeightMatrix(Matrix::Identity(q, q));
}

double weighted_norm(const Vector& d, const WeightMatrix& M) {
  if (d.size() != M.dim()) throw ConfigError("weighted_norm: dimension mismatch");
  // L'd with M = LL' keeps the quadratic form nonnegative in floating point.
  Vector half = M.llt().matrixL().transpose() * d;
  return half.norm();
}

std::vector<WeightedSample> normalize_weights(std::vector<WeightedSample> samples) {
  double total = 0.0;
  for (const auto& s : samples) {
    if (s.weight < 0.0 || !std::isfinite(s.weight))
      throw NumericError("negative or non-finite weight");
    total += s.weight;
  }
  if (total <= 0.0) throw NumericError("degenerate weight set");
  for (auto& s : samples) s.weight /= total;
  return samples;
}

}  // namespace lfi
