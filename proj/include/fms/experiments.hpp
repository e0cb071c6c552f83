#pragma once

#include "fms/function_space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fms {

enum class GeneratorKind { signal_clutter, elliptical_sincos, circular_sincos };

GeneratorKind parse_generator_kind(const std::string& name);
std::string to_string(GeneratorKind kind);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::signal_clutter;
  std::size_t n = 150;
  std::uint64_t seed = 0;

  // signal_clutter: X = eta cos(5 pi t / 2), Y = shift + eta cos(5 pi t / 2),
  // C = gamma + shift * 1{U > 0.5} + cos(5 pi t / 2)
  double eta_mean = 1.0;
  double eta_sd = 0.1;
  double gamma_sd = 0.8;
  double shift = 3.0;

  // elliptical_sincos: coefficient pairs (a, b) of a sin(2 pi t) + b cos(2 pi t),
  // Gaussian around (+-center, 0) with per-axis standard deviations.
  double ellipse_center = 2.0;
  double ellipse_sd_major = 1.0;  // along b
  double ellipse_sd_minor = 0.4;  // along a

  // circular_sincos: rings of the given radii, uniform angle, radial Gaussian noise.
  double ring_inner = 1.0;
  double ring_outer = 3.0;
  double ring_sd = 0.15;

  void validate() const;
};

//! Labelled sample; labels are X / Y / C, A / B, or inner / outer.
FunctionalSample generate(const GeneratorSpec& spec, const GridPtr& grid);

enum class KMeansInit { provided, random, mean_extremes };

struct KMeansSeeding {
  KMeansInit kind = KMeansInit::mean_extremes;
  std::uint64_t seed = 0;
  Eigen::MatrixXd centers;  // k x n_components when kind == provided
};

struct BaselineResult {
  Eigen::MatrixXd pc_scores;      // n x n_components
  Eigen::MatrixXd components;     // n_components x grid length, L2-orthonormal
  Eigen::VectorXd explained;      // fraction of variance per component
  std::vector<int> km_assignments;
  Eigen::MatrixXd km_centers;     // k x n_components
  int km_iterations = 0;
};

//! Principal component scores under the quadrature inner product, then Lloyd
//! k-means on the scores. mean_extremes seeds with the curve closest to the
//! sample mean and then repeatedly the curve farthest from the chosen seeds.
BaselineResult fpca_kmeans(const FunctionalSample& sample, std::size_t n_components, std::size_t k,
                           const KMeansSeeding& seeding = {});

//! Lloyd iterations until assignments stabilize; ties go to the lowest center index.
std::vector<int> lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd& centers, int max_iters, int* iterations);

//! Fraction of items whose predicted cluster maps to their true label under the
//! best one-to-one relabeling. Negative predictions never match.
double clustering_accuracy(const std::vector<std::string>& truth, const std::vector<int>& predicted);

}  // namespace fms
