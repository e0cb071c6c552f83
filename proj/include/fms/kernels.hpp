#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fms {

//! A kernel profile on [0, 1]; zero for t > 1.
class Profile {
public:
  using Fn = std::function<double(double)>;

  Profile(std::string name, Fn eval, Fn first = {}, Fn second = {},
          std::optional<double> first_over_t_at_zero = std::nullopt);

  const std::string& name() const { return name_; }
  double operator()(double t) const;
  //! First derivative on [0, 1]; analytic when available, central differences otherwise.
  double derivative(double t) const;
  double second_derivative(double t) const;
  bool has_analytic_derivatives() const { return static_cast<bool>(first_) && static_cast<bool>(second_); }
  //! lim_{t->0+} derivative(t) / t when known in closed form.
  std::optional<double> derivative_over_t_at_zero() const { return first_over_t_at_zero_; }
  //! derivative(t) / t with the t -> 0 limit substituted; throws SingularEvaluation if unavailable.
  double derivative_over_t(double t) const;

private:
  std::string name_;
  Fn eval_, first_, second_;
  std::optional<double> first_over_t_at_zero_;
};

//! Mean-shift profile k, its shadow g, and C with k(t) = -g'(t) / (C t).
struct KernelPair {
  std::string name;
  Profile k;
  Profile g;
  double C;
};

std::vector<std::string> builtin_pair_names();
KernelPair builtin_pair(std::string_view name);

//! Builds the mean-shift profile whose shadow is g. Throws InputError when
//! -g'(t)/t has no finite positive limit at 0 or the resulting k increases.
KernelPair shadow_of(const Profile& g, std::string name = {});

struct PairValidation {
  std::size_t mesh_size = 0;
  double min_k = 0;                       // over the mesh
  double max_k_increase = 0;              // max_i k(t_{i+1}) - k(t_i)
  double shadow_residual = 0;             // max |k(t) C t + g'(t)|
  double relative_shadow_residual = 0;    // max |k(t) + g'(t)/(C t)| / max k
  double max_abs_g_prime = 0;
  double max_k_prime = 0;                 // max of (g' - t g'') / (C t^2)

  bool nonnegative = false;
  bool nonincreasing = false;
  bool shadow_identity = false;
  bool differential_inequality = false;

  bool passed() const { return nonnegative && nonincreasing && shadow_identity && differential_inequality; }
};

PairValidation validate_pair(const KernelPair& pair, std::size_t mesh_size = 1000);

}  // namespace fms
