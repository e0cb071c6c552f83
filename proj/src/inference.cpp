#include "fms/inference.hpp"

#include "fms/errors.hpp"
#include "fms/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace fms {

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (n_boot < 100) throw InputError("at least 100 bootstrap replicates are required");
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Interval bootstrap_ci(const std::vector<double>& replicates, double level) {
  if (replicates.empty()) throw InputError("no bootstrap replicates");
  if (!(level > 0.0 && level < 1.0)) throw InputError("confidence level must lie in (0, 1)");
  const double tail = (1.0 - level) / 2.0;
  return {empirical_quantile(replicates, tail), empirical_quantile(replicates, 1.0 - tail)};
}

std::vector<std::size_t> ModeTestReport::significant_at(double alpha) const {
  std::vector<std::size_t> out;
  if (modes.empty()) return out;
  const double lvl = 1.0 - alpha / static_cast<double>(modes.size());
  for (std::size_t j = 0; j < modes.size(); ++j)
    if (bootstrap_ci(modes[j].replicates(config.statistic), lvl).hi < 0.0) out.push_back(j);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_sample(std::size_t n, SplitRule rule,
                                                                           std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (rule == SplitRule::random) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    std::shuffle(idx.begin(), idx.end(), rng);
  }
  const std::size_t n1 = (n + 1) / 2;
  std::vector<std::size_t> a(idx.begin(), idx.begin() + static_cast<long>(n1));
  std::vector<std::size_t> b(idx.begin() + static_cast<long>(n1), idx.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {a, b};
}

namespace {

double pairwise_quantile(const DensityModel& model, const std::vector<std::size_t>& idx, double q) {
  std::vector<double> d;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      d.push_back(model.pairwise_distances()(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(idx[b])));
  if (d.empty()) throw InputError("subsample 1 has fewer than two curves");
  return empirical_quantile(std::move(d), q);
}

constexpr std::size_t kMaxRedraws = 1000;

struct Pair {
  double eigen, closed;
};

Pair statistics(const DensityModel& m, const Curve& x) { return {lambda_eigen(m, x), lambda_closed_form(m, x)}; }

}  // namespace

ModeTestReport test_modes(const FunctionalSample& sample, const KernelPair& pair, const DistanceSpec& distance,
                          const BandwidthChoice& bandwidth, const MeanShiftConfig& ms_cfg, const TestConfig& t_cfg,
                          std::uint64_t seed, Execution exec) {
  t_cfg.validate();
  ms_cfg.validate();
  if (sample.size() < 4) throw InputError("mode test needs at least 4 curves");

  ModeTestReport rep;
  rep.config = t_cfg;
  std::tie(rep.subsample1, rep.subsample2) = split_sample(sample.size(), t_cfg.split, t_cfg.split_seed);

  DensityModel full(sample, pair, distance, BandwidthRule::fixed(1.0));
  if (const auto* rule = std::get_if<BandwidthRule>(&bandwidth)) {
    rep.bandwidth = *rule;
  } else {
    const double q = std::get<PairwiseQuantile>(bandwidth).q;
    if (!(q > 0.0 && q <= 1.0)) throw InputError("bandwidth quantile must lie in (0, 1]");
    const double h = pairwise_quantile(full, rep.subsample1, q);
    if (!(h > 0.0)) throw NumericalError("bandwidth quantile of subsample-1 distances is zero");
    rep.bandwidth = BandwidthRule::fixed(h);
  }
  full = full.with_bandwidth(rep.bandwidth);

  const auto stage1_model = full.resampled(rep.subsample1).with_normalization(Normalization::none);
  rep.stage1 = cluster(stage1_model, ms_cfg, std::nullopt, exec);
  for (std::size_t j = 0; j < rep.stage1.count(); ++j)
    if (!(t_cfg.exclude_atomic && rep.stage1.atomic_flags[j])) rep.candidate_modes.push_back(j);
  const std::size_t r = rep.candidate_modes.size();
  if (r == 0) return rep;
  rep.level = 1.0 - t_cfg.alpha / static_cast<double>(r);

  const auto observed_model = full.resampled(rep.subsample2);
  rep.modes.reserve(r);
  for (std::size_t c = 0; c < r; ++c) {
    const auto j = rep.candidate_modes[c];
    auto& mt = rep.modes.emplace_back(rep.stage1.modes[j]);
    mt.cluster_size = rep.stage1.sizes[j];
    mt.atomic = rep.stage1.atomic_flags[j];
    try {
      const auto s = statistics(observed_model, mt.mode);
      mt.observed_eigen = s.eigen;
      mt.observed_closed = s.closed;
    } catch (const NumericalError&) {
      mt.observed_eigen = mt.observed_closed = std::numeric_limits<double>::quiet_NaN();
    }
    mt.replicates_eigen.resize(t_cfg.n_boot);
    mt.replicates_closed.resize(t_cfg.n_boot);
  }

  const std::size_t n2 = rep.subsample2.size();
  std::vector<std::size_t> redraws(t_cfg.n_boot, 0);
  auto replicate = [&](std::size_t b) {
    const std::uint64_t rs = derive_seed(seed, b);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > kMaxRedraws) {
        redraws[b] = attempt;
        return;
      }
      std::mt19937_64 rng(derive_seed(rs, attempt));
      std::uniform_int_distribution<std::size_t> pick(0, n2 - 1);
      std::vector<std::size_t> idx(n2);
      for (auto& i : idx) i = rep.subsample2[pick(rng)];
      try {
        const auto m = full.resampled(idx);
        std::vector<Pair> vals(r);
        for (std::size_t c = 0; c < r; ++c) vals[c] = statistics(m, rep.modes[c].mode);
        for (std::size_t c = 0; c < r; ++c) {
          rep.modes[c].replicates_eigen[b] = vals[c].eigen;
          rep.modes[c].replicates_closed[b] = vals[c].closed;
        }
        redraws[b] = attempt;
        return;
      } catch (const SingularEvaluation&) {
      } catch (const NumericalError&) {
      }
    }
  };
  const auto nb = static_cast<long>(t_cfg.n_boot);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long b = 0; b < nb; ++b) replicate(static_cast<std::size_t>(b));
  } else {
    for (long b = 0; b < nb; ++b) replicate(static_cast<std::size_t>(b));
  }
  if (std::any_of(redraws.begin(), redraws.end(), [](std::size_t v) { return v > kMaxRedraws; }))
    throw NumericalError("bootstrap statistic undefined on too many consecutive resamples");
  rep.redraws = std::accumulate(redraws.begin(), redraws.end(), std::size_t{0});

  const bool eig = t_cfg.statistic == Statistic::lambda_eigen;
  for (std::size_t c = 0; c < r; ++c) {
    auto& mt = rep.modes[c];
    mt.ci = bootstrap_ci(eig ? mt.replicates_eigen : mt.replicates_closed, rep.level);
    mt.ci_other = bootstrap_ci(eig ? mt.replicates_closed : mt.replicates_eigen, rep.level);
    mt.significant = mt.ci.hi < 0.0;
    if (mt.significant) rep.significant.push_back(c);
  }
  return rep;
}

}  // namespace fms
