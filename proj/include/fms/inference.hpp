#pragma once

#include "fms/mean_shift.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace fms {

enum class Statistic { lambda_eigen, lambda_closed_form };
enum class SplitRule { first_half, random };

struct TestConfig {
  double alpha = 0.05;
  std::size_t n_boot = 1000;
  Statistic statistic = Statistic::lambda_eigen;
  SplitRule split = SplitRule::first_half;
  std::uint64_t split_seed = 0;
  //! Drop single-curve clusters from the candidate set.
  bool exclude_atomic = false;

  void validate() const;
};

//! Bandwidth set to a quantile of the pairwise distances within subsample 1.
struct PairwiseQuantile {
  double q = 0.41;
};

using BandwidthChoice = std::variant<BandwidthRule, PairwiseQuantile>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

//! Type-7 (linear interpolation) empirical quantile, p in [0, 1].
double empirical_quantile(std::vector<double> values, double p);

//! Percentile interval [q_{(1-level)/2}, q_{1-(1-level)/2}].
Interval bootstrap_ci(const std::vector<double>& replicates, double level);

struct ModeTest {
  explicit ModeTest(Curve m) : mode(std::move(m)) {}

  Curve mode;
  std::size_t cluster_size = 0;
  bool atomic = false;
  double observed_eigen = 0.0;  // on subsample 2; NaN if undefined
  double observed_closed = 0.0;
  std::vector<double> replicates_eigen;
  std::vector<double> replicates_closed;
  Interval ci;        // chosen statistic, level 1 - alpha / r
  Interval ci_other;  // the other statistic at the same level
  bool significant = false;

  const std::vector<double>& replicates(Statistic s) const {
    return s == Statistic::lambda_eigen ? replicates_eigen : replicates_closed;
  }
};

struct ModeTestReport {
  TestConfig config;
  std::vector<std::size_t> subsample1;
  std::vector<std::size_t> subsample2;
  BandwidthRule bandwidth;  // over the full sample's indices
  ModeSet stage1;
  std::vector<std::size_t> candidate_modes;  // indices into stage1.modes
  std::vector<ModeTest> modes;               // one per candidate
  std::vector<std::size_t> significant;      // indices into modes
  double level = 0.0;
  std::size_t redraws = 0;

  //! Significant subset at another alpha, from the stored replicates.
  std::vector<std::size_t> significant_at(double alpha) const;
};

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_sample(std::size_t n, SplitRule rule,
                                                                           std::uint64_t seed);

ModeTestReport test_modes(const FunctionalSample& sample, const KernelPair& pair, const DistanceSpec& distance,
                          const BandwidthChoice& bandwidth, const MeanShiftConfig& ms_cfg, const TestConfig& t_cfg,
                          std::uint64_t seed, Execution exec = Execution::parallel);

}  // namespace fms
