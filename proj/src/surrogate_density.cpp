#include "fms/surrogate_density.hpp"

#include "fms/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fms {

BandwidthRule BandwidthRule::fixed(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("bandwidth must be positive and finite");
  BandwidthRule r;
  r.fixed_ = true;
  r.values_ = {h};
  return r;
}

BandwidthRule BandwidthRule::per_datum(std::vector<double> h) {
  if (h.empty()) throw InputError("per-datum bandwidth list is empty");
  for (double v : h)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("bandwidths must be positive and finite");
  BandwidthRule r;
  r.fixed_ = false;
  r.values_ = std::move(h);
  return r;
}

double BandwidthRule::min() const { return *std::min_element(values_.begin(), values_.end()); }

BandwidthRule BandwidthRule::select(std::span<const std::size_t> indices) const {
  if (fixed_) return *this;
  std::vector<double> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(values_.at(i));
  return per_datum(std::move(out));
}

DensityModel::DensityModel(FunctionalSample sample, KernelPair pair, DistanceSpec distance, BandwidthRule bandwidth,
                           Normalization normalization)
    : bandwidth_(std::move(bandwidth)), normalization_(normalization) {
  if (!bandwidth_.is_fixed() && bandwidth_.values().size() != sample.size())
    throw InputError("per-datum bandwidth count does not match the sample size");
  metric_ = std::make_shared<const Metric>(sample.grid(), std::move(distance));
  auto embedded = std::make_shared<Eigen::MatrixXd>(metric_->embed_rows(sample.values()));
  const auto n = static_cast<Eigen::Index>(sample.size());
  auto dist = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(n, n));
  const Metric& metric = *metric_;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = metric.norm(embedded->row(i) - embedded->row(j));
      (*dist)(i, j) = d;
      (*dist)(j, i) = d;
    }
  sample_ = std::make_shared<const FunctionalSample>(std::move(sample));
  pair_ = std::make_shared<const KernelPair>(std::move(pair));
  embedded_ = std::move(embedded);
  distances_ = std::move(dist);
  compute_normalizers();
}

void DensityModel::compute_normalizers() {
  const auto n = size();
  double sk = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = bandwidth_of(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double t = (*distances_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / h;
      sk += pair_->k(t);
      sg += pair_->g(t);
    }
  }
  weight_k_ = sk > 0.0 ? std::optional<double>(static_cast<double>(n - 1) / sk) : std::nullopt;
  weight_g_ = sg > 0.0 ? std::optional<double>(static_cast<double>(n - 1) / sg) : std::nullopt;
}

double DensityModel::max_pairwise_distance() const { return distances_->maxCoeff(); }

double DensityModel::min_pairwise_distance() const {
  double m = std::numeric_limits<double>::infinity();
  const auto n = distances_->rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) m = std::min(m, (*distances_)(i, j));
  return m;
}

namespace {
[[noreturn]] void throw_zero_normalizer(const DensityModel& m, const char* which) {
  std::ostringstream os;
  os << "normalizer " << which << " is zero: no pair of sample curves lies within the bandwidth (min pairwise distance "
     << m.min_pairwise_distance() << ", min bandwidth " << m.bandwidth().min() << ")";
  throw NumericalError(os.str());
}
}  // namespace

double DensityModel::weight_k() const {
  if (normalization_ == Normalization::none) return 1.0;
  if (!weight_k_) throw_zero_normalizer(*this, "w_K");
  return *weight_k_;
}

double DensityModel::weight_g() const {
  if (normalization_ == Normalization::none) return 1.0;
  if (!weight_g_) throw_zero_normalizer(*this, "w_G");
  return *weight_g_;
}

DensityModel DensityModel::with_bandwidth(BandwidthRule bandwidth) const {
  if (!bandwidth.is_fixed() && bandwidth.values().size() != size())
    throw InputError("per-datum bandwidth count does not match the sample size");
  DensityModel m = *this;
  m.bandwidth_ = std::move(bandwidth);
  m.compute_normalizers();
  return m;
}

DensityModel DensityModel::with_normalization(Normalization normalization) const {
  DensityModel m = *this;
  m.normalization_ = normalization;
  return m;
}

DensityModel DensityModel::resampled(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw InputError("resample of no curves");
  DensityModel m;
  m.sample_ = std::make_shared<const FunctionalSample>(sample_->subset(indices));
  m.pair_ = pair_;
  m.metric_ = metric_;
  m.bandwidth_ = bandwidth_.select(indices);
  m.normalization_ = normalization_;
  const auto k = static_cast<Eigen::Index>(indices.size());
  auto emb = std::make_shared<Eigen::MatrixXd>(k, embedded_->cols());
  auto dist = std::make_shared<Eigen::MatrixXd>(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto i = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(r)]);
    emb->row(r) = embedded_->row(i);
    for (Eigen::Index c = 0; c < k; ++c) (*dist)(r, c) = (*distances_)(i, static_cast<Eigen::Index>(indices[static_cast<std::size_t>(c)]));
  }
  m.embedded_ = std::move(emb);
  m.distances_ = std::move(dist);
  m.compute_normalizers();
  return m;
}

Eigen::VectorXd DensityModel::embed(const Curve& x) const {
  if (!same_grid(x.grid(), sample_->grid())) throw InputError("query curve is not on the sample grid");
  return metric_->embed(x.values());
}

Eigen::VectorXd DensityModel::distances_to(const Eigen::VectorXd& ex) const {
  const auto n = embedded_->rows();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = metric_->norm(embedded_->row(i).transpose() - ex);
  return d;
}

namespace {

void require_inner_product(const DensityModel& model) {
  if (!model.metric().induced_by_inner_product())
    throw InputError("distance " + model.metric().spec().describe() +
                     " is not induced by an inner product; derivatives of the density are undefined");
}

// Value-space combination sum_i c_i (X_i - x).
Eigen::VectorXd direction_sum(const DensityModel& model, const Eigen::VectorXd& c, const Eigen::VectorXd& x) {
  return model.sample().values().transpose() * c - c.sum() * x;
}

}  // namespace

double density_k(const DensityModel& model, const Curve& x) {
  const auto d = model.distances_to(model.embed(x));
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) s += model.pair().k(d[i] / model.bandwidth_of(static_cast<std::size_t>(i)));
  return s == 0.0 ? 0.0 : model.weight_k() * s;
}

double density_g(const DensityModel& model, const Curve& x) {
  const auto d = model.distances_to(model.embed(x));
  double s = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) s += model.pair().g(d[i] / model.bandwidth_of(static_cast<std::size_t>(i)));
  return s == 0.0 ? 0.0 : model.weight_g() * s;
}

namespace {
Eigen::VectorXd shift_weights(const DensityModel& model, const Eigen::VectorXd& d) {
  Eigen::VectorXd c(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double h = model.bandwidth_of(static_cast<std::size_t>(i));
    c[i] = model.pair().k(d[i] / h) / (h * h);
  }
  return c;
}
}  // namespace

double weighted_density(const DensityModel& model, const Curve& x) {
  return shift_weights(model, model.distances_to(model.embed(x))).sum();
}

Curve gradient(const DensityModel& model, const Curve& x) {
  require_inner_product(model);
  const auto c = shift_weights(model, model.distances_to(model.embed(x)));
  if (c.sum() == 0.0) return Curve::constant(x.grid(), 0.0);
  return Curve(x.grid(), model.pair().C * model.weight_g() * direction_sum(model, c, x.values()));
}

std::optional<Curve> mean_shift_vector(const DensityModel& model, const Curve& x) {
  const auto c = shift_weights(model, model.distances_to(model.embed(x)));
  const double s = c.sum();
  if (s == 0.0) return std::nullopt;
  return Curve(x.grid(), model.sample().values().transpose() * (c / s) - x.values());
}

std::optional<double> step_size(const DensityModel& model, const Curve& x) {
  const double pbar = weighted_density(model, x);
  if (pbar == 0.0) return std::nullopt;
  const auto g = gradient(model, x);
  const double gn = model.metric().norm(model.metric().embed(g.values()));
  return gn / (model.pair().C * model.weight_g() * pbar);
}

namespace {

struct LocalTerms {
  Eigen::MatrixXd v;          // embedded X_i - x for active terms, one per column
  Eigen::VectorXd dist;       // d(X_i, x)
  Eigen::VectorXd h;          // bandwidths
  Eigen::VectorXd k;          // k(t_i)
  Eigen::VectorXd k_over_t;   // k'(t_i) / t_i with the t -> 0 limit
};

// Terms with t = d / h <= 1; beyond the support both k and k' vanish.
LocalTerms local_terms(const DensityModel& model, const Curve& x) {
  require_inner_product(model);
  const auto ex = model.embed(x);
  const auto d = model.distances_to(ex);
  std::vector<Eigen::Index> act;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] <= model.bandwidth_of(static_cast<std::size_t>(i))) act.push_back(i);
  LocalTerms t;
  const auto p = static_cast<Eigen::Index>(act.size());
  t.v.resize(ex.size(), p);
  t.dist.resize(p);
  t.h.resize(p);
  t.k.resize(p);
  t.k_over_t.resize(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const auto i = act[static_cast<std::size_t>(c)];
    const double h = model.bandwidth_of(static_cast<std::size_t>(i));
    const double tt = d[i] / h;
    t.v.col(c) = model.embedded().row(i).transpose() - ex;
    t.dist[c] = d[i];
    t.h[c] = h;
    t.k[c] = model.pair().k(tt);
    t.k_over_t[c] = model.pair().k.derivative_over_t(tt);
  }
  return t;
}

}  // namespace

double hessian_form(const DensityModel& model, const Curve& x, const Curve& y, const Curve& z) {
  const auto lt = local_terms(model, x);
  const auto ey = model.embed(y), ez = model.embed(z);
  const double yz = model.metric().inner(ey, ez);
  double s = 0.0;
  for (Eigen::Index c = 0; c < lt.v.cols(); ++c) {
    const double h2 = lt.h[c] * lt.h[c];
    // (1/h) K' / ||X - x|| = (k'(t)/t) / h^2
    const double vy = lt.v.col(c).dot(ey), vz = lt.v.col(c).dot(ez);
    s += (lt.k_over_t[c] / h2 * vy * vz + lt.k[c] * yz) / h2;
  }
  return -model.pair().C * model.weight_g() * s;
}

double lambda_closed_form(const DensityModel& model, const Curve& x) {
  const auto lt = local_terms(model, x);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(lt.v.rows());
  double scalar = 0.0;
  for (Eigen::Index c = 0; c < lt.v.cols(); ++c) {
    const double h = lt.h[c], h2 = h * h;
    const double t = lt.dist[c] / h;
    const double kprime = lt.k_over_t[c] * t;
    // (1/h^3) K' (X - x) / ||X - x|| = (k'(t)/t) (X - x) / h^4
    dir += lt.k_over_t[c] / (h2 * h2) * lt.v.col(c);
    // (1/h) K' (||X - x|| + ||X - x||^{-1}) = k'(t) d / h + (k'(t)/t) / h^2
    scalar += (kprime * lt.dist[c] / h + lt.k_over_t[c] / h2 + lt.k[c]) / h2;
  }
  return model.pair().C * model.weight_g() * (2.0 * model.metric().norm(dir) - scalar);
}

double lambda_eigen(const DensityModel& model, const Curve& x) {
  const auto lt = local_terms(model, x);
  double b = 0.0;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < lt.v.cols(); ++c) {
    b += lt.k[c] / (lt.h[c] * lt.h[c]);
    if (lt.dist[c] > 0.0) cols.push_back(c);
  }
  const auto p = static_cast<Eigen::Index>(cols.size());
  const auto ambient = lt.v.rows();
  double top = 0.0;  // directions orthogonal to the span contribute 0
  if (p > 0) {
    Eigen::MatrixXd v(ambient, p);
    Eigen::VectorXd a(p);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto c = cols[static_cast<std::size_t>(j)];
      const double h2 = lt.h[c] * lt.h[c];
      v.col(j) = lt.v.col(c);
      a[j] = -lt.k_over_t[c] / (h2 * h2);
    }
    // Operator sum_i a_i v_i (x) v_i expressed in an orthonormal basis of span{v_i}.
    const Eigen::MatrixXd gram = v.transpose() * v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(gram);
    const auto& ev = gs.eigenvalues();
    const double cut = 1e-12 * std::max(ev.maxCoeff(), 0.0);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < p; ++j)
      if (ev[j] > cut && ev[j] > 0.0) keep.push_back(j);
    const auto r = static_cast<Eigen::Index>(keep.size());
    if (r > 0) {
      Eigen::MatrixXd ws(p, r);
      for (Eigen::Index j = 0; j < r; ++j) {
        const auto e = keep[static_cast<std::size_t>(j)];
        ws.col(j) = gs.eigenvectors().col(e) * std::sqrt(ev[e]);
      }
      const Eigen::MatrixXd reduced = ws.transpose() * a.asDiagonal() * ws;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(reduced, Eigen::EigenvaluesOnly);
      const double lmax = rs.eigenvalues().maxCoeff();
      top = r < ambient ? std::max(lmax, 0.0) : lmax;
    }
  }
  return model.pair().C * model.weight_g() * (top - b);
}

}  // namespace fms
