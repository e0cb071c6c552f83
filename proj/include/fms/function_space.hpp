#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fms {

//! Strictly increasing abscissae shared by every curve of a sample, together
//! with the trapezoid quadrature weights for that grid.
class Grid {
public:
  explicit Grid(std::vector<double> points);

  static std::shared_ptr<const Grid> make(std::vector<double> points);
  static std::shared_ptr<const Grid> uniform(double lo, double hi, std::size_t count);

  std::size_t size() const { return points_.size(); }
  const std::vector<double>& points() const { return points_; }
  double operator[](std::size_t i) const { return points_[i]; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& sqrt_weights() const { return sqrt_weights_; }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

private:
  std::vector<double> points_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

bool same_grid(const GridPtr& a, const GridPtr& b);

class Curve {
public:
  Curve(GridPtr grid, Eigen::VectorXd values);

  static Curve constant(GridPtr grid, double c);
  template <class F>
  static Curve from_function(GridPtr grid, F&& f) {
    Eigen::VectorXd v(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) v[i] = f((*grid)[i]);
    return Curve(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  Curve operator+(const Curve& o) const;
  Curve operator-(const Curve& o) const;
  Curve operator*(double s) const;

private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

inline Curve operator*(double s, const Curve& c) { return c * s; }

//! A set of curves sampled on one shared grid; row i of values() is curve i.
class FunctionalSample {
public:
  FunctionalSample(GridPtr grid, Eigen::MatrixXd values, std::vector<std::string> labels = {});
  FunctionalSample(GridPtr grid, const std::vector<Curve>& curves, std::vector<std::string> labels = {});

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.rows()); }
  Curve curve(std::size_t i) const;
  std::vector<Curve> curves() const;
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  FunctionalSample subset(std::span<const std::size_t> indices) const;

private:
  GridPtr grid_;
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

struct FiniteDifference {};

//! Local polynomial fit with Gaussian weights; `bandwidth` is in abscissa units.
struct LocalPolynomial {
  int degree = 2;
  double bandwidth = 0.05;
};

using DerivativeMethod = std::variant<FiniteDifference, LocalPolynomial>;

enum class DistanceKind {
  L2,
  SobolevH1,         // ||x - y||_L2 + ||x' - y'||_L2
  SobolevH1Induced,  // sqrt(<x - y, x - y>_H1)
  DerivativeL2,      // ||x^(m) - y^(m)||_L2
};

struct DistanceSpec {
  DistanceKind kind = DistanceKind::L2;
  int order = 1;  // derivative order for DerivativeL2
  std::optional<DerivativeMethod> derivative_method;

  static DistanceSpec l2() { return {}; }
  static DistanceSpec sobolev_h1(DerivativeMethod m = FiniteDifference{}) {
    return {DistanceKind::SobolevH1, 1, m};
  }
  static DistanceSpec sobolev_h1_induced(DerivativeMethod m = FiniteDifference{}) {
    return {DistanceKind::SobolevH1Induced, 1, m};
  }
  static DistanceSpec derivative_l2(int order, DerivativeMethod m = FiniteDifference{}) {
    return {DistanceKind::DerivativeL2, order, m};
  }

  void validate() const;
  std::string describe() const;
};

//! Matrix D with D * values = order-th derivative on the same grid.
Eigen::MatrixXd derivative_operator(const Grid& grid, int order, const DerivativeMethod& method);

Curve estimate_derivative(const Curve& c, int order, const DerivativeMethod& method);

//! Maps curves into a Euclidean coordinate system in which the chosen inner
//! product becomes the plain dot product: each block is sqrt(w) * (D^j x) for
//! the derivative orders the distance involves.
class Metric {
public:
  Metric(GridPtr grid, DistanceSpec spec);

  const DistanceSpec& spec() const { return spec_; }
  const GridPtr& grid() const { return grid_; }

  Eigen::VectorXd embed(const Eigen::VectorXd& values) const;
  //! Row-wise embedding of an n x m value matrix.
  Eigen::MatrixXd embed_rows(const Eigen::MatrixXd& values) const;

  //! Length of an embedded difference under the configured distance.
  double norm(const Eigen::VectorXd& embedded) const;
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return a.dot(b); }

  //! True when distance(a, b) = sqrt(inner(a - b, a - b)).
  bool induced_by_inner_product() const { return spec_.kind != DistanceKind::SobolevH1; }

  std::size_t embedded_size() const { return blocks_ * grid_->size(); }

private:
  GridPtr grid_;
  DistanceSpec spec_;
  std::size_t blocks_ = 1;
  bool include_values_ = true;
  Eigen::MatrixXd scaled_derivative_;  // diag(sqrt w) * D, empty for L2
};

double inner_product(const Curve& a, const Curve& b, const DistanceSpec& spec);
double distance(const Curve& a, const Curve& b, const DistanceSpec& spec);
Curve linear_combination(std::span<const double> coeffs, std::span<const Curve> curves);

}  // namespace fms
