#include "fms/function_space.hpp"

#include "fms/errors.hpp"

#include <cmath>
#include <sstream>

namespace fms {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw InputError("grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw InputError("grid point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      throw InputError("grid not increasing at index " + std::to_string(i));
  }
  const auto m = points_.size();
  weights_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double half = 0.5 * (points_[i + 1] - points_[i]);
    weights_[static_cast<Eigen::Index>(i)] += half;
    weights_[static_cast<Eigen::Index>(i + 1)] += half;
  }
  sqrt_weights_ = weights_.cwiseSqrt();
}

std::shared_ptr<const Grid> Grid::make(std::vector<double> points) {
  return std::make_shared<const Grid>(std::move(points));
}

std::shared_ptr<const Grid> Grid::uniform(double lo, double hi, std::size_t count) {
  if (count < 2) throw InputError("grid needs at least 2 points");
  std::vector<double> p(count);
  for (std::size_t i = 0; i < count; ++i)
    p[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return make(std::move(p));
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && *a == *b);
}

Curve::Curve(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InputError("curve without grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw InputError("curve has " + std::to_string(values_.size()) + " values for a grid of " +
                     std::to_string(grid_->size()) + " points");
  if (!values_.allFinite()) throw InputError("curve contains non-finite values");
}

Curve Curve::constant(GridPtr grid, double c) {
  const auto m = static_cast<Eigen::Index>(grid->size());
  return Curve(std::move(grid), Eigen::VectorXd::Constant(m, c));
}

Curve Curve::operator+(const Curve& o) const {
  if (!same_grid(grid_, o.grid_)) throw InputError("grid mismatch");
  return Curve(grid_, values_ + o.values_);
}

Curve Curve::operator-(const Curve& o) const {
  if (!same_grid(grid_, o.grid_)) throw InputError("grid mismatch");
  return Curve(grid_, values_ - o.values_);
}

Curve Curve::operator*(double s) const { return Curve(grid_, values_ * s); }

FunctionalSample::FunctionalSample(GridPtr grid, Eigen::MatrixXd values, std::vector<std::string> labels)
    : grid_(std::move(grid)), values_(std::move(values)), labels_(std::move(labels)) {
  if (!grid_) throw InputError("sample without grid");
  if (values_.rows() < 1) throw InputError("sample must contain at least one curve");
  if (static_cast<std::size_t>(values_.cols()) != grid_->size())
    throw InputError("sample curves do not match the grid length");
  if (!values_.allFinite()) throw InputError("sample contains non-finite values");
  if (!labels_.empty() && labels_.size() != size()) throw InputError("label count does not match curve count");
}

namespace {
Eigen::MatrixXd stack(const GridPtr& grid, const std::vector<Curve>& curves) {
  if (curves.empty()) throw InputError("sample must contain at least one curve");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(grid->size()));
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!same_grid(grid, curves[i].grid())) throw InputError("curve " + std::to_string(i) + " is on a different grid");
    m.row(static_cast<Eigen::Index>(i)) = curves[i].values().transpose();
  }
  return m;
}
}  // namespace

FunctionalSample::FunctionalSample(GridPtr grid, const std::vector<Curve>& curves, std::vector<std::string> labels)
    : FunctionalSample(grid, stack(grid, curves), std::move(labels)) {}

Curve FunctionalSample::curve(std::size_t i) const {
  return Curve(grid_, values_.row(static_cast<Eigen::Index>(i)).transpose());
}

std::vector<Curve> FunctionalSample::curves() const {
  std::vector<Curve> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(curve(i));
  return out;
}

FunctionalSample FunctionalSample::subset(std::span<const std::size_t> indices) const {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(indices.size()), values_.cols());
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) throw InputError("subset index out of range");
    v.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(indices[r]));
    if (has_labels()) labels.push_back(labels_[indices[r]]);
  }
  return FunctionalSample(grid_, std::move(v), std::move(labels));
}

void DistanceSpec::validate() const {
  switch (kind) {
    case DistanceKind::L2:
      return;
    case DistanceKind::DerivativeL2:
      if (order != 1 && order != 2) throw InputError("derivative distance order must be 1 or 2");
      [[fallthrough]];
    case DistanceKind::SobolevH1:
    case DistanceKind::SobolevH1Induced:
      if (!derivative_method) throw InputError(describe() + " requires a derivative method");
      return;
  }
}

std::string DistanceSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case DistanceKind::L2: os << "l2"; break;
    case DistanceKind::SobolevH1: os << "h1"; break;
    case DistanceKind::SobolevH1Induced: os << "h1-induced"; break;
    case DistanceKind::DerivativeL2: os << "deriv" << order; break;
  }
  if (kind != DistanceKind::L2 && derivative_method) {
    if (const auto* lp = std::get_if<LocalPolynomial>(&*derivative_method))
      os << "(locpoly degree=" << lp->degree << " bandwidth=" << lp->bandwidth << ")";
    else
      os << "(finite-difference)";
  }
  return os.str();
}

namespace {

// Derivative weights of the quadratic Lagrange interpolant through three nodes.
void lagrange3(double x, const double n[3], int order, double out[3]) {
  for (int j = 0; j < 3; ++j) {
    const double a = n[j], b = n[(j + 1) % 3], c = n[(j + 2) % 3];
    const double denom = (a - b) * (a - c);
    out[j] = order == 1 ? (2.0 * x - b - c) / denom : 2.0 / denom;
  }
}

Eigen::MatrixXd finite_difference_operator(const Grid& grid, int order) {
  const auto m = grid.size();
  if (m < 3) throw InputError("finite differences need at least 3 grid points");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t lo = i == 0 ? 0 : (i == m - 1 ? m - 3 : i - 1);
    const double nodes[3] = {grid[lo], grid[lo + 1], grid[lo + 2]};
    double w[3];
    lagrange3(grid[i], nodes, order, w);
    for (int j = 0; j < 3; ++j) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(lo + j)) = w[j];
  }
  return d;
}

Eigen::MatrixXd local_polynomial_operator(const Grid& grid, int order, const LocalPolynomial& lp) {
  if (lp.degree < 1) throw InputError("local polynomial degree must be >= 1");
  if (order > lp.degree) throw InputError("derivative order exceeds local polynomial degree");
  if (!(lp.bandwidth > 0)) throw InputError("local polynomial bandwidth must be positive");
  const auto m = grid.size();
  const int p = lp.degree + 1;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  double factorial = 1.0;
  for (int r = 2; r <= order; ++r) factorial *= r;
  const double scale = factorial / std::pow(lp.bandwidth, order);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < m; ++j)
      if (std::abs(grid[j] - grid[i]) <= 4.0 * lp.bandwidth) idx.push_back(j);
    if (static_cast<int>(idx.size()) < p)
      throw InputError("grid too short for local polynomial fit at index " + std::to_string(i));
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd x(k, p);
    Eigen::VectorXd w(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const double u = (grid[idx[static_cast<std::size_t>(r)]] - grid[i]) / lp.bandwidth;
      w[r] = std::exp(-0.5 * u * u);
      double pw = 1.0;
      for (int c = 0; c < p; ++c, pw *= u) x(r, c) = pw;
    }
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    const Eigen::MatrixXd normal = xtw * x;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (lu.rank() < p) throw InputError("local polynomial fit is rank deficient at index " + std::to_string(i));
    const Eigen::RowVectorXd row = lu.solve(xtw).row(order);
    for (Eigen::Index r = 0; r < k; ++r)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)])) = scale * row[r];
  }
  return d;
}

}  // namespace

Eigen::MatrixXd derivative_operator(const Grid& grid, int order, const DerivativeMethod& method) {
  if (order != 1 && order != 2) throw InputError("derivative order must be 1 or 2");
  if (const auto* lp = std::get_if<LocalPolynomial>(&method)) return local_polynomial_operator(grid, order, *lp);
  return finite_difference_operator(grid, order);
}

Curve estimate_derivative(const Curve& c, int order, const DerivativeMethod& method) {
  return Curve(c.grid(), derivative_operator(*c.grid(), order, method) * c.values());
}

Metric::Metric(GridPtr grid, DistanceSpec spec) : grid_(std::move(grid)), spec_(std::move(spec)) {
  spec_.validate();
  const auto sw = grid_->sqrt_weights();
  switch (spec_.kind) {
    case DistanceKind::L2:
      break;
    case DistanceKind::SobolevH1:
    case DistanceKind::SobolevH1Induced:
      blocks_ = 2;
      scaled_derivative_ = sw.asDiagonal() * derivative_operator(*grid_, 1, *spec_.derivative_method);
      break;
    case DistanceKind::DerivativeL2:
      include_values_ = false;
      scaled_derivative_ = sw.asDiagonal() * derivative_operator(*grid_, spec_.order, *spec_.derivative_method);
      break;
  }
}

Eigen::VectorXd Metric::embed(const Eigen::VectorXd& values) const {
  const auto m = static_cast<Eigen::Index>(grid_->size());
  if (values.size() != m) throw InputError("grid mismatch");
  switch (spec_.kind) {
    case DistanceKind::L2:
      return grid_->sqrt_weights().cwiseProduct(values);
    case DistanceKind::DerivativeL2:
      return scaled_derivative_ * values;
    default: {
      Eigen::VectorXd out(2 * m);
      out.head(m) = grid_->sqrt_weights().cwiseProduct(values);
      out.tail(m) = scaled_derivative_ * values;
      return out;
    }
  }
}

Eigen::MatrixXd Metric::embed_rows(const Eigen::MatrixXd& values) const {
  const auto m = static_cast<Eigen::Index>(grid_->size());
  if (values.cols() != m) throw InputError("grid mismatch");
  const Eigen::RowVectorXd sw = grid_->sqrt_weights().transpose();
  switch (spec_.kind) {
    case DistanceKind::L2:
      return values.array().rowwise() * sw.array();
    case DistanceKind::DerivativeL2:
      return values * scaled_derivative_.transpose();
    default: {
      Eigen::MatrixXd out(values.rows(), 2 * m);
      out.leftCols(m) = values.array().rowwise() * sw.array();
      out.rightCols(m) = values * scaled_derivative_.transpose();
      return out;
    }
  }
}

double Metric::norm(const Eigen::VectorXd& e) const {
  if (spec_.kind == DistanceKind::SobolevH1) {
    const auto m = static_cast<Eigen::Index>(grid_->size());
    return e.head(m).norm() + e.tail(m).norm();
  }
  return e.norm();
}

double inner_product(const Curve& a, const Curve& b, const DistanceSpec& spec) {
  if (!same_grid(a.grid(), b.grid())) throw InputError("grid mismatch");
  const Metric metric(a.grid(), spec);
  return metric.inner(metric.embed(a.values()), metric.embed(b.values()));
}

double distance(const Curve& a, const Curve& b, const DistanceSpec& spec) {
  if (!same_grid(a.grid(), b.grid())) throw InputError("grid mismatch");
  const Metric metric(a.grid(), spec);
  return metric.norm(metric.embed(a.values() - b.values()));
}

Curve linear_combination(std::span<const double> coeffs, std::span<const Curve> curves) {
  if (coeffs.size() != curves.size()) throw InputError("coefficient and curve counts differ");
  if (curves.empty()) throw InputError("linear combination of no curves");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(curves.front().values().size());
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!same_grid(curves.front().grid(), curves[i].grid())) throw InputError("grid mismatch");
    acc += coeffs[i] * curves[i].values();
  }
  return Curve(curves.front().grid(), std::move(acc));
}

}  // namespace fms
