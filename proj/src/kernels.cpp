#include "fms/kernels.hpp"

#include "fms/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fms {

namespace {

constexpr double kStep = 1e-5;

double central(const Profile::Fn& f, double t) {
  const double s = std::min(kStep, std::max(t / 4.0, 1e-9));
  if (t - s < 0.0) return (-3.0 * f(t) + 4.0 * f(t + s) - f(t + 2 * s)) / (2 * s);
  if (t + s > 1.0) return (3.0 * f(t) - 4.0 * f(t - s) + f(t - 2 * s)) / (2 * s);
  return (f(t + s) - f(t - s)) / (2 * s);
}

double integrate_unit(const std::function<double(double)>& f) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 10, 1e-14);
}

}  // namespace

Profile::Profile(std::string name, Fn eval, Fn first, Fn second, std::optional<double> first_over_t_at_zero)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      first_(std::move(first)),
      second_(std::move(second)),
      first_over_t_at_zero_(first_over_t_at_zero) {
  if (!eval_) throw InputError("profile '" + name_ + "' has no evaluation function");
}

double Profile::operator()(double t) const { return t > 1.0 ? 0.0 : eval_(std::max(t, 0.0)); }

double Profile::derivative(double t) const {
  if (t > 1.0) return 0.0;
  t = std::max(t, 0.0);
  return first_ ? first_(t) : central(eval_, t);
}

double Profile::second_derivative(double t) const {
  if (t > 1.0) return 0.0;
  t = std::max(t, 0.0);
  if (second_) return second_(t);
  return central([this](double u) { return derivative(u); }, t);
}

double Profile::derivative_over_t(double t) const {
  if (t > 1e-8) return derivative(t) / t;
  if (!first_over_t_at_zero_)
    throw SingularEvaluation("profile '" + name_ + "' has no closed-form limit of k'(t)/t at 0");
  return *first_over_t_at_zero_;
}

std::vector<std::string> builtin_pair_names() {
  return {"uniform_epanechnikov", "epanechnikov_biweight", "biweight_triweight", "sinc_cosine", "gaussian_gaussian"};
}

namespace {

// (1 - t^2)^p and its first two derivatives.
struct PolyPower {
  int p;
  double f(double t) const { return std::pow(1 - t * t, p); }
  double d1(double t) const { return p == 0 ? 0.0 : -2.0 * p * t * std::pow(1 - t * t, p - 1); }
  double d2(double t) const {
    if (p == 0) return 0.0;
    const double u = 1 - t * t;
    double v = -2.0 * p * std::pow(u, p - 1);
    if (p >= 2) v += 4.0 * p * (p - 1) * t * t * std::pow(u, p - 2);
    return v;
  }
};

KernelPair polynomial_pair(const std::string& name, const std::string& kname, const std::string& gname, int p) {
  const PolyPower gp{p}, kp{p - 1};
  const double c = integrate_unit([gp](double t) { return t > 0 ? -gp.d1(t) / t : 2.0 * gp.p; });
  const double scale = 2.0 * p / c;  // -g'(t)/t = 2p (1 - t^2)^(p-1)
  Profile g(gname, [gp](double t) { return gp.f(t); }, [gp](double t) { return gp.d1(t); },
            [gp](double t) { return gp.d2(t); });
  // d/dt (1-t^2)^q divided by t tends to -2q as t -> 0.
  Profile k(kname, [kp, scale](double t) { return scale * kp.f(t); },
            [kp, scale](double t) { return scale * kp.d1(t); }, [kp, scale](double t) { return scale * kp.d2(t); },
            scale * -2.0 * kp.p);
  return {name, std::move(k), std::move(g), c};
}

KernelPair sinc_cosine_pair() {
  constexpr double a = std::numbers::pi / 2;
  // s(t) = sin(a t) / t and derivatives, with series near 0.
  auto s0 = [](double t) {
    if (t < 1e-3) {
      const double x = a * t;
      return a * (1 - x * x / 6 + x * x * x * x / 120);
    }
    return std::sin(a * t) / t;
  };
  auto s1 = [](double t) {
    if (t < 1e-2) return -a * a * a * t / 3 + std::pow(a, 5) * t * t * t / 30 - std::pow(a, 7) * std::pow(t, 5) / 840;
    return (a * t * std::cos(a * t) - std::sin(a * t)) / (t * t);
  };
  auto s2 = [](double t) {
    if (t < 1e-2) return -a * a * a / 3 + std::pow(a, 5) * t * t / 10 - std::pow(a, 7) * std::pow(t, 4) / 168;
    const double sn = std::sin(a * t), cs = std::cos(a * t);
    return (-a * a * t * t * sn - 2 * a * t * cs + 2 * sn) / (t * t * t);
  };
  const double c = a * integrate_unit(s0);
  const double scale = a / c;
  Profile g("cosine", [](double t) { return std::cos(a * t); }, [](double t) { return -a * std::sin(a * t); },
            [](double t) { return -a * a * std::cos(a * t); });
  Profile k("sinc", [=](double t) { return scale * s0(t); }, [=](double t) { return scale * s1(t); },
            [=](double t) { return scale * s2(t); }, scale * (-a * a * a / 3));
  return {"sinc_cosine", std::move(k), std::move(g), c};
}

KernelPair gaussian_pair() {
  const double c = integrate_unit([](double t) { return std::exp(-0.5 * t * t); });
  Profile g("gaussian", [](double t) { return std::exp(-0.5 * t * t); },
            [](double t) { return -t * std::exp(-0.5 * t * t); },
            [](double t) { return (t * t - 1) * std::exp(-0.5 * t * t); });
  Profile k("gaussian", [c](double t) { return std::exp(-0.5 * t * t) / c; },
            [c](double t) { return -t * std::exp(-0.5 * t * t) / c; },
            [c](double t) { return (t * t - 1) * std::exp(-0.5 * t * t) / c; }, -1.0 / c);
  return {"gaussian_gaussian", std::move(k), std::move(g), c};
}

}  // namespace

KernelPair builtin_pair(std::string_view name) {
  if (name == "uniform_epanechnikov") return polynomial_pair("uniform_epanechnikov", "uniform", "epanechnikov", 1);
  if (name == "epanechnikov_biweight") return polynomial_pair("epanechnikov_biweight", "epanechnikov", "biweight", 2);
  if (name == "biweight_triweight") return polynomial_pair("biweight_triweight", "biweight", "triweight", 3);
  if (name == "sinc_cosine") return sinc_cosine_pair();
  if (name == "gaussian_gaussian") return gaussian_pair();
  throw InputError("unknown kernel pair '" + std::string(name) + "'");
}

KernelPair shadow_of(const Profile& g, std::string name) {
  auto ratio = [g](double t) { return -g.derivative(t) / t; };
  const double q1 = ratio(1e-3), q2 = ratio(2e-4), q3 = ratio(1e-4);
  if (!std::isfinite(q1) || !std::isfinite(q2) || !std::isfinite(q3) || q3 <= 0.0)
    throw InputError("shadow '" + g.name() + "': -g'(t)/t has no finite positive limit at 0");
  if (std::abs(q3 - q1) > 1e-3 * std::abs(q1))
    throw InputError("shadow '" + g.name() + "': -g'(t)/t diverges as t -> 0 (g is not locally quadratic)");
  // q(t) = q(0) + O(t^2): one Richardson step from t and 2t.
  const double limit = q3 + (q3 - q2) / 3.0;
  if (!(limit > 0.0)) throw InputError("shadow '" + g.name() + "': limit of -g'(t)/t at 0 is not positive");

  auto q = [ratio, limit](double t) { return t < 1e-4 ? limit : ratio(t); };
  const double c = integrate_unit(q);
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("shadow '" + g.name() + "': C is not positive");

  Profile k("shadow-of-" + g.name(), [q, c](double t) { return q(t) / c; });
  constexpr int mesh = 1000;
  double prev = k(0.0);
  for (int i = 1; i <= mesh; ++i) {
    const double v = k(static_cast<double>(i) / mesh);
    if (v > prev + 1e-9 * std::max(1.0, std::abs(prev)))
      throw InputError("shadow '" + g.name() + "': resulting k increases near t = " +
                       std::to_string(static_cast<double>(i) / mesh) + " (k'(t) <= 0 violated)");
    prev = v;
  }
  if (name.empty()) name = "shadow-of-" + g.name();
  return {std::move(name), std::move(k), g, c};
}

PairValidation validate_pair(const KernelPair& pair, std::size_t mesh_size) {
  if (mesh_size < 16) throw InputError("validation mesh needs at least 16 points");
  PairValidation r;
  r.mesh_size = mesh_size;
  r.min_k = std::numeric_limits<double>::infinity();
  r.max_k_prime = -std::numeric_limits<double>::infinity();
  r.max_k_increase = -std::numeric_limits<double>::infinity();
  double max_k = 0.0, max_abs_diff = 0.0, prev_k = 0.0;
  for (std::size_t i = 0; i < mesh_size; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(mesh_size);
    const double k = pair.k(t), g1 = pair.g.derivative(t), g2 = pair.g.second_derivative(t);
    r.min_k = std::min(r.min_k, k);
    max_k = std::max(max_k, k);
    if (i > 0) r.max_k_increase = std::max(r.max_k_increase, k - prev_k);
    prev_k = k;
    r.shadow_residual = std::max(r.shadow_residual, std::abs(k * pair.C * t + g1));
    max_abs_diff = std::max(max_abs_diff, std::abs(k + g1 / (pair.C * t)));
    r.max_abs_g_prime = std::max(r.max_abs_g_prime, std::abs(g1));
    r.max_k_prime = std::max(r.max_k_prime, (g1 - t * g2) / (pair.C * t * t));
  }
  r.relative_shadow_residual = max_k > 0 ? max_abs_diff / max_k : max_abs_diff;
  const double tol = 1e-8 * std::max(r.max_abs_g_prime, 1e-300);
  const double slack = pair.g.has_analytic_derivatives() ? 1.0 : 1e4;
  r.nonnegative = r.min_k >= 0.0;
  r.nonincreasing = r.max_k_increase <= 1e-10 * slack * std::max(1.0, max_k);
  r.shadow_identity = r.shadow_residual <= tol;
  r.differential_inequality = r.max_k_prime <= 1e-8 * slack * std::max(1.0, max_k);
  return r;
}

}  // namespace fms
