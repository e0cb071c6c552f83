#include "fms/bandwidth_scan.hpp"

#include "fms/errors.hpp"

namespace fms {

void ScanSpec::validate() const {
  if (n_values < 2) throw InputError("scan needs at least 2 bandwidth values");
  if (!(lo_frac > 0.0 && lo_frac < hi_frac && hi_frac <= 1.0))
    throw InputError("scan fractions must satisfy 0 < lo < hi <= 1");
  if (min_plateau_len < 2) throw InputError("minimum plateau length must be at least 2");
}

std::vector<Plateau> find_plateaus(const std::vector<double>& bandwidths, const std::vector<std::size_t>& counts,
                                   std::size_t min_len) {
  std::vector<Plateau> out;
  std::size_t i = 0;
  while (i < counts.size()) {
    std::size_t j = i;
    while (j + 1 < counts.size() && counts[j + 1] == counts[i]) ++j;
    if (counts[i] > 0 && j - i + 1 >= min_len)
      out.push_back({i, j, counts[i], 0.5 * (bandwidths[i] + bandwidths[j])});
    i = j + 1;
  }
  return out;
}

ScanResult scan(const DensityModel& model, const ScanSpec& spec, const MeanShiftConfig& cfg, Execution exec) {
  spec.validate();
  cfg.validate();
  if (model.size() < 2) throw InputError("bandwidth scan needs at least 2 curves");
  ScanResult r;
  r.max_distance = model.max_pairwise_distance();
  if (!(r.max_distance > 0.0)) throw InputError("bandwidth scan needs at least two distinct curves");
  const std::size_t nv = spec.n_values;
  r.bandwidths.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const double f = spec.lo_frac + (spec.hi_frac - spec.lo_frac) * static_cast<double>(i) / static_cast<double>(nv - 1);
    r.bandwidths[i] = f * r.max_distance;
  }
  r.nonatomic_counts.resize(nv);
  r.clustered_counts.resize(nv);
  MeanShiftConfig inner = cfg;
  inner.check_stability = false;
  inner.keep_trajectories = false;
  const auto base = model.with_normalization(Normalization::none);
  auto body = [&](std::size_t i) {
    const auto m = base.with_bandwidth(BandwidthRule::fixed(r.bandwidths[i]));
    const auto ms = cluster(m, inner, std::nullopt, Execution::serial);
    r.nonatomic_counts[i] = ms.nonatomic_count();
    r.clustered_counts[i] = ms.clustered_count();
  };
  const auto n = static_cast<long>(nv);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  } else {
    for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
  }
  r.plateaus = find_plateaus(r.bandwidths, r.nonatomic_counts, spec.min_plateau_len);
  for (const auto& p : r.plateaus) r.candidates.push_back(p.midpoint);
  return r;
}

}  // namespace fms
