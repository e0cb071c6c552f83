#pragma once

#include "fms/mean_shift.hpp"

#include <vector>

namespace fms {

struct ScanSpec {
  std::size_t n_values = 100;
  double lo_frac = 0.05;
  double hi_frac = 0.50;
  std::size_t min_plateau_len = 5;

  void validate() const;
};

struct Plateau {
  std::size_t start = 0;  // first index into the sweep
  std::size_t end = 0;    // last index, inclusive
  std::size_t count = 0;  // non-atomic cluster count along the run
  double midpoint = 0.0;  // bandwidth midpoint
};

struct ScanResult {
  double max_distance = 0.0;
  std::vector<double> bandwidths;
  std::vector<std::size_t> nonatomic_counts;
  std::vector<std::size_t> clustered_counts;
  std::vector<Plateau> plateaus;
  std::vector<double> candidates;
};

//! Maximal runs of at least min_len equal nonzero counts.
std::vector<Plateau> find_plateaus(const std::vector<double>& bandwidths, const std::vector<std::size_t>& counts,
                                   std::size_t min_len);

//! Sweeps fixed bandwidths over [lo, hi] * max pairwise distance and clusters at each.
//! The bandwidth of `model` is ignored.
ScanResult scan(const DensityModel& model, const ScanSpec& spec, const MeanShiftConfig& cfg,
                Execution exec = Execution::parallel);

}  // namespace fms
