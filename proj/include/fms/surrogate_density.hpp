#pragma once

#include "fms/function_space.hpp"
#include "fms/kernels.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace fms {

//! Fixed bandwidth, or one bandwidth per sample curve (never a function of the query point).
class BandwidthRule {
public:
  static BandwidthRule fixed(double h);
  static BandwidthRule per_datum(std::vector<double> h);

  bool is_fixed() const { return fixed_; }
  //! Bandwidth of curve i; for a fixed rule every index maps to the same value.
  double at(std::size_t i) const { return fixed_ ? values_.front() : values_.at(i); }
  const std::vector<double>& values() const { return values_; }
  double min() const;
  //! Restriction to a subset / resample of the curves the rule was built for.
  BandwidthRule select(std::span<const std::size_t> indices) const;

private:
  bool fixed_ = true;
  std::vector<double> values_;
};

//! How the kernel sums are scaled. `pairwise` is the leave-one-out normalizer
//! (n - 1) / sum_{i != j} K_h(X_i, X_j); `none` keeps only the numerator sum.
enum class Normalization { pairwise, none };

//! Immutable bundle of sample, kernel pair, distance, and bandwidth, with the
//! embedded sample and its pairwise distance matrix cached.
class DensityModel {
public:
  DensityModel(FunctionalSample sample, KernelPair pair, DistanceSpec distance, BandwidthRule bandwidth,
               Normalization normalization = Normalization::pairwise);

  const FunctionalSample& sample() const { return *sample_; }
  const KernelPair& pair() const { return *pair_; }
  const Metric& metric() const { return *metric_; }
  const BandwidthRule& bandwidth() const { return bandwidth_; }
  Normalization normalization() const { return normalization_; }
  std::size_t size() const { return sample_->size(); }

  double bandwidth_of(std::size_t i) const { return bandwidth_.at(i); }
  //! Embedded sample curves, one per row.
  const Eigen::MatrixXd& embedded() const { return *embedded_; }
  const Eigen::MatrixXd& pairwise_distances() const { return *distances_; }
  double max_pairwise_distance() const;
  //! Smallest distance between two distinct sample indices; +inf for n = 1.
  double min_pairwise_distance() const;

  //! w_K(S) and w_G(S); 1 when normalization is `none`. Throws NumericalError if the pair sum vanishes.
  double weight_k() const;
  double weight_g() const;

  DensityModel with_bandwidth(BandwidthRule bandwidth) const;
  DensityModel with_normalization(Normalization normalization) const;
  //! Model on sample rows `indices` (repeats allowed), reusing the cached embedding and distances.
  DensityModel resampled(std::span<const std::size_t> indices) const;

  Eigen::VectorXd embed(const Curve& x) const;
  Eigen::VectorXd distances_to(const Eigen::VectorXd& embedded_x) const;

private:
  DensityModel() = default;
  void compute_normalizers();

  std::shared_ptr<const FunctionalSample> sample_;
  std::shared_ptr<const KernelPair> pair_;
  std::shared_ptr<const Metric> metric_;
  BandwidthRule bandwidth_;
  Normalization normalization_ = Normalization::pairwise;
  std::shared_ptr<const Eigen::MatrixXd> embedded_;
  std::shared_ptr<const Eigen::MatrixXd> distances_;
  std::optional<double> weight_k_, weight_g_;
};

//! p-hat(x) = w_K * sum_X k(d(X, x) / h(X)).
double density_k(const DensityModel& model, const Curve& x);
//! p-tilde(x) = w_G * sum_X g(d(X, x) / h(X)), the density the mean-shift ascends.
double density_g(const DensityModel& model, const Curve& x);
//! p-bar(x) = sum_X k(d(X, x) / h(X)) / h(X)^2.
double weighted_density(const DensityModel& model, const Curve& x);

//! Functional gradient of p-tilde: C w_G sum_X k(d/h) (X - x) / h^2.
Curve gradient(const DensityModel& model, const Curve& x);

//! Weighted local mean minus x; nullopt when x lies outside every support ball.
std::optional<Curve> mean_shift_vector(const DensityModel& model, const Curve& x);

//! Gradient-ascent step length s(x) = ||grad|| / (C w_G p-bar(x)); nullopt outside the support.
std::optional<double> step_size(const DensityModel& model, const Curve& x);

//! Second Gateaux differential of p-tilde at x along (y, z).
double hessian_form(const DensityModel& model, const Curve& x, const Curve& y, const Curve& z);

//! Closed-form curvature statistic: C w_G (2 || sum (k'/t) v / h^4 || - sum (k' d / h + (k'/t) / h^2 + k) / h^2).
double lambda_closed_form(const DensityModel& model, const Curve& x);

//! sup over unit y of hessian_form(x, y, y), via an eigenproblem on the span of {X - x}.
double lambda_eigen(const DensityModel& model, const Curve& x);

}  // namespace fms
