#pragma once

#include "fms/surrogate_density.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fms {

enum class Execution { serial, parallel };

struct MeanShiftConfig {
  int max_iters = 500;
  //! Stop when ||m(x)|| <= tolerance; default 1e-6 * max pairwise distance.
  std::optional<double> tolerance;
  //! Terminal points within merge_radius_factor * h_ref are merged (h_ref = min bandwidth).
  double merge_radius_factor = 0.05;
  //! Stability perturbation size; default 0.1 * h_ref.
  std::optional<double> perturbation;
  std::uint64_t seed = 0;
  bool check_stability = true;
  bool keep_trajectories = false;

  void validate() const;
  double tolerance_for(const DensityModel& model) const;
  double merge_radius_for(const DensityModel& model) const;
  double perturbation_for(const DensityModel& model) const;
};

struct Trajectory {
  std::vector<Curve> iterates;  // iterates.front() is the start
  bool converged = false;
  bool outside_support = false;
  int steps = 0;
  double final_shift = 0.0;          // ||m(x)|| at the terminal point
  std::optional<std::size_t> mode;  // filled in by cluster()

  const Curve& start() const { return iterates.front(); }
  const Curve& terminal() const { return iterates.back(); }
};

Trajectory ascend(const DensityModel& model, const Curve& x0, const MeanShiftConfig& cfg);

struct ModeSet {
  std::vector<Curve> modes;
  //! Mode index per start; -1 for starts outside every support ball.
  std::vector<int> assignments;
  std::vector<std::size_t> sizes;
  std::vector<bool> atomic_flags;
  std::vector<bool> stability_flags;
  std::vector<bool> converged;  // per start
  std::vector<Trajectory> trajectories;  // only with keep_trajectories
  double tolerance = 0.0;
  double merge_radius = 0.0;

  std::size_t count() const { return modes.size(); }
  std::size_t nonatomic_count() const;
  //! Starts belonging to non-atomic clusters.
  std::size_t clustered_count() const;
  std::size_t unclustered_count() const;
};

//! Mean-shift from every start (default: the sample curves), single-linkage
//! merge of terminal points, atomic and stability flags.
ModeSet cluster(const DensityModel& model, const MeanShiftConfig& cfg,
                const std::optional<std::vector<Curve>>& starts = std::nullopt,
                Execution exec = Execution::parallel);

//! One synchronous update X <- X + m(X) of every sample curve.
FunctionalSample blurring_pass(const DensityModel& model);
FunctionalSample blurring(const DensityModel& model, int passes);

}  // namespace fms
