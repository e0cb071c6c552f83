#include "fms/experiments.hpp"

#include "fms/errors.hpp"
#include "fms/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <random>

namespace fms {

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "signal_clutter") return GeneratorKind::signal_clutter;
  if (name == "elliptical_sincos") return GeneratorKind::elliptical_sincos;
  if (name == "circular_sincos") return GeneratorKind::circular_sincos;
  throw InputError("unknown generator '" + name + "'");
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::signal_clutter: return "signal_clutter";
    case GeneratorKind::elliptical_sincos: return "elliptical_sincos";
    case GeneratorKind::circular_sincos: return "circular_sincos";
  }
  return "unknown";
}

void GeneratorSpec::validate() const {
  if (n < 1) throw InputError("generator needs n >= 1");
  for (double v : {eta_sd, gamma_sd, ellipse_sd_major, ellipse_sd_minor, ring_sd})
    if (!(v >= 0.0)) throw InputError("generator noise levels must be nonnegative");
  if (!(ring_inner > 0.0 && ring_outer > 0.0 && ellipse_center > 0.0 && shift > 0.0))
    throw InputError("generator scale parameters must be positive");
}

namespace {

// std::normal_distribution with sd 0 is undefined; draw a standard normal and scale.
double normal(std::mt19937_64& rng, double mean, double sd) {
  std::normal_distribution<double> nd(0.0, 1.0);
  return mean + sd * nd(rng);
}

}  // namespace

FunctionalSample generate(const GeneratorSpec& spec, const GridPtr& grid) {
  spec.validate();
  const auto m = static_cast<Eigen::Index>(grid->size());
  const auto n = static_cast<Eigen::Index>(spec.n);
  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(grid->points().data(), m);
  constexpr double pi = std::numbers::pi;
  const Eigen::VectorXd wave = (2.5 * pi * t).array().cos();
  const Eigen::VectorXd s = (2 * pi * t).array().sin(), c = (2 * pi * t).array().cos();

  Eigen::MatrixXd values(n, m);
  std::vector<std::string> labels(spec.n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(i)));
    const auto ui = static_cast<std::size_t>(i);
    switch (spec.kind) {
      case GeneratorKind::signal_clutter: {
        const int g = std::uniform_int_distribution<int>(0, 2)(rng);
        if (g == 0) {
          values.row(i) = normal(rng, spec.eta_mean, spec.eta_sd) * wave.transpose();
          labels[ui] = "X";
        } else if (g == 1) {
          values.row(i) = (spec.shift + normal(rng, spec.eta_mean, spec.eta_sd) * wave.array()).transpose();
          labels[ui] = "Y";
        } else {
          const double gamma = normal(rng, 0.0, spec.gamma_sd);
          const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
          values.row(i) = (gamma + (u > 0.5 ? spec.shift : 0.0) + wave.array()).transpose();
          labels[ui] = "C";
        }
        break;
      }
      case GeneratorKind::elliptical_sincos: {
        const bool first = i < (n + 1) / 2;
        const double a = normal(rng, first ? -spec.ellipse_center : spec.ellipse_center, spec.ellipse_sd_minor);
        const double b = normal(rng, 0.0, spec.ellipse_sd_major);
        values.row(i) = (a * s + b * c).transpose();
        labels[ui] = first ? "A" : "B";
        break;
      }
      case GeneratorKind::circular_sincos: {
        const bool inner = i < (n + 1) / 2;
        const double radius = normal(rng, inner ? spec.ring_inner : spec.ring_outer, spec.ring_sd);
        const double angle = std::uniform_real_distribution<double>(0.0, 2 * pi)(rng);
        values.row(i) = (radius * std::cos(angle) * s + radius * std::sin(angle) * c).transpose();
        labels[ui] = inner ? "inner" : "outer";
        break;
      }
    }
  }
  return FunctionalSample(grid, std::move(values), std::move(labels));
}

std::vector<int> lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd& centers, int max_iters, int* iterations) {
  const auto n = points.rows();
  const auto k = centers.rows();
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  int it = 0;
  for (; it < max_iters; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < k; ++j) {
        const double d = (points.row(i) - centers.row(j)).squaredNorm();
        if (d < bd) {
          bd = d;
          best = static_cast<int>(j);
        }
      }
      if (assign[static_cast<std::size_t>(i)] != best) {
        assign[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (Eigen::Index j = 0; j < k; ++j)
      if (counts[j] > 0) centers.row(j) = sums.row(j) / counts[j];
  }
  if (iterations) *iterations = it;
  return assign;
}

BaselineResult fpca_kmeans(const FunctionalSample& sample, std::size_t n_components, std::size_t k,
                           const KMeansSeeding& seeding) {
  const auto n = sample.size();
  const auto m = sample.grid()->size();
  if (n_components < 1 || n_components > std::min(n, m)) throw InputError("component count must be in [1, min(n, m)]");
  if (k < 1) throw InputError("k must be at least 1");
  if (k > n) throw InputError("k exceeds the number of curves");

  const auto& sw = sample.grid()->sqrt_weights();
  const Eigen::RowVectorXd mean = sample.values().colwise().mean();
  const Eigen::MatrixXd y = (sample.values().rowwise() - mean) * sw.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto p = static_cast<Eigen::Index>(n_components);
  const Eigen::VectorXd sv = svd.singularValues();
  const double total = sv.squaredNorm();

  BaselineResult r;
  r.pc_scores = svd.matrixU().leftCols(p) * sv.head(p).asDiagonal();
  r.components = (sw.cwiseInverse().asDiagonal() * svd.matrixV().leftCols(p)).transpose();
  r.explained = total > 0 ? Eigen::VectorXd(sv.head(p).array().square() / total) : Eigen::VectorXd::Zero(p);

  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centers(kk, p);
  switch (seeding.kind) {
    case KMeansInit::provided:
      if (seeding.centers.rows() != kk || seeding.centers.cols() != p)
        throw InputError("provided k-means centers must be k x n_components");
      centers = seeding.centers;
      break;
    case KMeansInit::random: {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      std::mt19937_64 rng(derive_seed(seeding.seed, 0));
      std::shuffle(idx.begin(), idx.end(), rng);
      for (Eigen::Index j = 0; j < kk; ++j) centers.row(j) = r.pc_scores.row(static_cast<Eigen::Index>(idx[j]));
      break;
    }
    case KMeansInit::mean_extremes: {
      // Scores are centered, so the mean is the origin.
      Eigen::Index first = 0;
      r.pc_scores.rowwise().squaredNorm().minCoeff(&first);
      centers.row(0) = r.pc_scores.row(first);
      Eigen::VectorXd nearest = (r.pc_scores.rowwise() - centers.row(0)).rowwise().squaredNorm();
      for (Eigen::Index j = 1; j < kk; ++j) {
        Eigen::Index far = 0;
        nearest.maxCoeff(&far);
        centers.row(j) = r.pc_scores.row(far);
        nearest = nearest.cwiseMin((r.pc_scores.rowwise() - centers.row(j)).rowwise().squaredNorm());
      }
      break;
    }
  }
  r.km_assignments = lloyd(r.pc_scores, centers, 1000, &r.km_iterations);
  r.km_centers = centers;
  return r;
}

double clustering_accuracy(const std::vector<std::string>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw InputError("label and prediction counts differ");
  if (truth.empty()) return 1.0;
  std::map<std::string, std::size_t> cls;
  for (const auto& t : truth) cls.emplace(t, cls.size());
  int maxp = -1;
  for (int p : predicted) maxp = std::max(maxp, p);
  const std::size_t nt = cls.size(), np = static_cast<std::size_t>(maxp + 1);
  if (nt > 16) throw InputError("accuracy supports at most 16 true classes");
  std::vector<std::vector<std::size_t>> table(np, std::vector<std::size_t>(nt, 0));
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (predicted[i] >= 0) ++table[static_cast<std::size_t>(predicted[i])][cls.at(truth[i])];
  // best[mask]: max matches using predicted clusters seen so far with true classes in mask.
  const std::size_t full = std::size_t{1} << nt;
  std::vector<long> best(full, -1);
  best[0] = 0;
  for (std::size_t p = 0; p < np; ++p) {
    auto next = best;
    for (std::size_t mask = 0; mask < full; ++mask) {
      if (best[mask] < 0) continue;
      for (std::size_t c = 0; c < nt; ++c) {
        if (mask & (std::size_t{1} << c)) continue;
        auto& slot = next[mask | (std::size_t{1} << c)];
        slot = std::max(slot, best[mask] + static_cast<long>(table[p][c]));
      }
    }
    best = std::move(next);
  }
  const long top = *std::max_element(best.begin(), best.end());
  return static_cast<double>(top) / static_cast<double>(truth.size());
}

}  // namespace fms
