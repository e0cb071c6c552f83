#include "fms/mean_shift.hpp"

#include "fms/errors.hpp"
#include "fms/random.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace fms {

void MeanShiftConfig::validate() const {
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (tolerance && !(*tolerance > 0.0)) throw InputError("step tolerance must be positive");
  if (!(merge_radius_factor > 0.0)) throw InputError("merge radius factor must be positive");
  if (perturbation && !(*perturbation >= 0.0)) throw InputError("perturbation scale must be nonnegative");
}

double MeanShiftConfig::tolerance_for(const DensityModel& model) const {
  if (tolerance) return *tolerance;
  const double d = model.max_pairwise_distance();
  return d > 0.0 ? 1e-6 * d : 1e-12;
}

double MeanShiftConfig::merge_radius_for(const DensityModel& model) const {
  return merge_radius_factor * model.bandwidth().min();
}

double MeanShiftConfig::perturbation_for(const DensityModel& model) const {
  return perturbation ? *perturbation : 0.1 * model.bandwidth().min();
}

std::size_t ModeSet::nonatomic_count() const {
  return static_cast<std::size_t>(std::count(atomic_flags.begin(), atomic_flags.end(), false));
}

std::size_t ModeSet::clustered_count() const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < modes.size(); ++j)
    if (!atomic_flags[j]) s += sizes[j];
  return s;
}

std::size_t ModeSet::unclustered_count() const {
  return static_cast<std::size_t>(std::count(assignments.begin(), assignments.end(), -1));
}

namespace {

struct Ascent {
  Eigen::VectorXd x;         // values
  Eigen::VectorXd ex;        // embedding
  bool converged = false;
  bool outside = false;
  int steps = 0;
  double final_shift = 0.0;
};

// Runs the update on raw vectors; embedding is linear, so the embedded
// iterate is the same weighted mean of the embedded sample.
Ascent run(const DensityModel& model, const Eigen::VectorXd& x0, double eps, int max_iters,
           std::vector<Curve>* record) {
  const auto& X = model.sample().values();
  const auto& E = model.embedded();
  const auto n = X.rows();
  Ascent a;
  a.x = x0;
  a.ex = model.metric().embed(x0);
  Eigen::VectorXd c(n);
  for (int it = 0;; ++it) {
    const auto d = model.distances_to(a.ex);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double h = model.bandwidth_of(static_cast<std::size_t>(i));
      c[i] = model.pair().k(d[i] / h) / (h * h);
    }
    const double s = c.sum();
    if (s == 0.0) {
      a.outside = true;
      return a;
    }
    Eigen::VectorXd nx = X.transpose() * (c / s);
    Eigen::VectorXd nex = E.transpose() * (c / s);
    a.final_shift = model.metric().norm(nex - a.ex);
    if (a.final_shift <= eps) {
      a.converged = true;
      return a;
    }
    if (it == max_iters) return a;
    a.x = std::move(nx);
    a.ex = std::move(nex);
    ++a.steps;
    if (record) record->emplace_back(model.sample().grid(), a.x);
  }
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

Eigen::VectorXd random_unit(const Metric& metric, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (;;) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(m));
    for (auto& v : u) v = nd(rng);
    const double len = metric.norm(metric.embed(u));
    if (len > 0.0) return u / len;
  }
}

}  // namespace

Trajectory ascend(const DensityModel& model, const Curve& x0, const MeanShiftConfig& cfg) {
  cfg.validate();
  if (!same_grid(x0.grid(), model.sample().grid())) throw InputError("start curve is not on the sample grid");
  Trajectory t;
  t.iterates.push_back(x0);
  const auto a = run(model, x0.values(), cfg.tolerance_for(model), cfg.max_iters, &t.iterates);
  t.converged = a.converged;
  t.outside_support = a.outside;
  t.steps = a.steps;
  t.final_shift = a.final_shift;
  return t;
}

ModeSet cluster(const DensityModel& model, const MeanShiftConfig& cfg, const std::optional<std::vector<Curve>>& starts,
                Execution exec) {
  cfg.validate();
  const auto grid = model.sample().grid();
  const std::size_t ns = starts ? starts->size() : model.size();
  if (starts)
    for (const auto& s : *starts)
      if (!same_grid(s.grid(), grid)) throw InputError("start curve is not on the sample grid");

  ModeSet out;
  out.tolerance = cfg.tolerance_for(model);
  out.merge_radius = cfg.merge_radius_for(model);
  const int max_iters = cfg.max_iters;
  const double eps = out.tolerance;

  std::vector<Ascent> ends(ns);
  std::vector<Trajectory> trajs(cfg.keep_trajectories ? ns : 0);
  auto body = [&](std::size_t i) {
    const Eigen::VectorXd x0 = starts ? Eigen::VectorXd((*starts)[i].values())
                                      : Eigen::VectorXd(model.sample().values().row(static_cast<Eigen::Index>(i)));
    if (cfg.keep_trajectories) {
      auto& t = trajs[i];
      t.iterates.emplace_back(grid, x0);
      ends[i] = run(model, x0, eps, max_iters, &t.iterates);
      t.converged = ends[i].converged;
      t.outside_support = ends[i].outside;
      t.steps = ends[i].steps;
      t.final_shift = ends[i].final_shift;
    } else {
      ends[i] = run(model, x0, eps, max_iters, nullptr);
    }
  };
  const auto sn = static_cast<long>(ns);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < sn; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < sn; ++i) body(static_cast<std::size_t>(i));
  }

  UnionFind uf(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    if (ends[i].outside) continue;
    for (std::size_t j = i + 1; j < ns; ++j) {
      if (ends[j].outside) continue;
      if (model.metric().norm(ends[i].ex - ends[j].ex) <= out.merge_radius) uf.unite(i, j);
    }
  }

  // Roots are the lowest index of each component, so modes come out ordered by first start.
  std::vector<int> root_mode(ns, -1);
  std::vector<Eigen::VectorXd> mode_embedded;
  out.assignments.assign(ns, -1);
  out.converged.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    out.converged[i] = ends[i].converged;
    if (ends[i].outside) continue;
    const auto r = uf.find(i);
    if (root_mode[r] < 0) {
      root_mode[r] = static_cast<int>(out.modes.size());
      out.modes.emplace_back(grid, ends[i].x);
      mode_embedded.push_back(ends[i].ex);
      out.sizes.push_back(0);
    }
    out.assignments[i] = root_mode[r];
    ++out.sizes[static_cast<std::size_t>(root_mode[r])];
  }
  const std::size_t r = out.modes.size();
  out.atomic_flags.resize(r);
  for (std::size_t j = 0; j < r; ++j) out.atomic_flags[j] = out.sizes[j] == 1;
  if (cfg.keep_trajectories) {
    for (std::size_t i = 0; i < ns; ++i)
      if (out.assignments[i] >= 0) trajs[i].mode = static_cast<std::size_t>(out.assignments[i]);
    out.trajectories = std::move(trajs);
  }

  out.stability_flags.assign(r, false);
  if (cfg.check_stability) {
    const double delta = cfg.perturbation_for(model);
    std::vector<char> stable(r, 0);
    auto check = [&](std::size_t j) {
      const auto u = random_unit(model.metric(), grid->size(), derive_seed(cfg.seed, j));
      const auto a = run(model, out.modes[j].values() + delta * u, eps, max_iters, nullptr);
      stable[j] = !a.outside && model.metric().norm(a.ex - mode_embedded[j]) <= out.merge_radius;
    };
    const auto sr = static_cast<long>(r);
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
      for (long j = 0; j < sr; ++j) check(static_cast<std::size_t>(j));
    } else {
      for (long j = 0; j < sr; ++j) check(static_cast<std::size_t>(j));
    }
    for (std::size_t j = 0; j < r; ++j) out.stability_flags[j] = stable[j] != 0;
  }
  return out;
}

FunctionalSample blurring_pass(const DensityModel& model) {
  const auto& X = model.sample().values();
  Eigen::MatrixXd next = X;
  const auto n = X.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto d = model.pairwise_distances().row(i);
    Eigen::VectorXd c(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = model.bandwidth_of(static_cast<std::size_t>(j));
      c[j] = model.pair().k(d[j] / h) / (h * h);
    }
    const double s = c.sum();
    if (s > 0.0) next.row(i) = (X.transpose() * (c / s)).transpose();
  }
  return FunctionalSample(model.sample().grid(), std::move(next), model.sample().labels());
}

FunctionalSample blurring(const DensityModel& model, int passes) {
  if (passes < 0) throw InputError("pass count must be nonnegative");
  FunctionalSample s = model.sample();
  for (int p = 0; p < passes; ++p) {
    DensityModel m(s, model.pair(), model.metric().spec(), model.bandwidth(), Normalization::none);
    s = blurring_pass(m);
  }
  return s;
}

}  // namespace fms
