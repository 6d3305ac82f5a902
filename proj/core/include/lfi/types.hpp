#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One simulated or observed replicate.  Time-indexed series and
// location-indexed panels both flatten to this; panels keep their own
// structured type in spatial.hpp.
using Dataset = std::vector<double>;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Generative parameter with component names.  p >= 1, finite entries.
struct ParameterVector {
  Vector values;
  std::vector<std::string> names;

  ParameterVector() = default;
  explicit ParameterVector(Vector v, std::vector<std::string> n = {});

  int dim() const { return static_cast<int>(values.size()); }
};

// Auxiliary parameter plus fit metadata.
struct AuxParameter {
  Vector values;
  double loglik_at_fit = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;

  AuxParameter() = default;
  explicit AuxParameter(Vector v) : values(std::move(v)) {}

  int dim() const { return static_cast<int>(values.size()); }
};

enum class SummaryKind {
  aux_param,
  aux_score,
  composite_param,
  extremal_groups,
  simple,
};

struct SummaryStatistic {
  Vector values;
  SummaryKind kind = SummaryKind::simple;

  SummaryStatistic() = default;
  SummaryStatistic(Vector v, SummaryKind k);

  int dim() const { return static_cast<int>(values.size()); }
};

// Symmetric positive definite weighting matrix.  Construction verifies both
// properties (Cholesky must succeed) so downstream quadratic forms never see
// an indefinite W.
class WeightMatrix {
 public:
  explicit WeightMatrix(Matrix m);
  static WeightMatrix identity(int q);

  const Matrix& entries() const { return m_; }
  const Eigen::LLT<Matrix>& llt() const { return llt_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
};

// (seed, stream_id) fully determines every random draw of a simulation.
struct NoiseSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Universal posterior-output record.
struct WeightedSample {
  ParameterVector theta;
  double weight = 0.0;
  double discrepancy = 0.0;
  std::int64_t seed_id = 0;
};

// sqrt(d' M d).  Zero iff d = 0.
double weighted_norm(const Vector& d, const WeightMatrix& M);

// Rescale weights to sum to one, preserving ratios.  All-zero input is a
// degenerate weight set and rejected.
std::vector<WeightedSample> normalize_weights(std::vector<WeightedSample> samples);

}  // namespace lfi
