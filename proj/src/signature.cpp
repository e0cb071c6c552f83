#include "fms/signature.hpp"

#include "fms/errors.hpp"
#include "fms/io_util.hpp"
#include "fms/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

namespace fms {

SignatureRecord parse_signature(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  std::optional<std::size_t> declared;
  SignatureRecord sig;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    for (std::string c; ls >> c;) cells.push_back(c);
    if (!declared) {
      const auto v = parse_double(cells.front());
      if (cells.size() != 1 || !v || *v < 0 || std::floor(*v) != *v)
        throw InputError(source + ": row " + std::to_string(row) + ": expected the point count");
      declared = static_cast<std::size_t>(*v);
      continue;
    }
    if (cells.size() < 3)
      throw InputError(source + ": row " + std::to_string(row) + ": expected at least x, y, timestamp");
    double xyz[3];
    for (int c = 0; c < 3; ++c) {
      const auto v = parse_double(cells[static_cast<std::size_t>(c)]);
      if (!v || !std::isfinite(*v))
        throw InputError(source + ": row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                         ": non-numeric value '" + cells[static_cast<std::size_t>(c)] + "'");
      xyz[c] = *v;
    }
    if (!sig.t.empty()) {
      if (xyz[2] < sig.t.back())
        throw InputError(source + ": row " + std::to_string(row) + ": timestamp decreases");
      if (xyz[2] == sig.t.back()) ++sig.duplicate_timestamps;
    }
    sig.x.push_back(xyz[0]);
    sig.y.push_back(xyz[1]);
    sig.t.push_back(xyz[2]);
  }
  if (!declared) throw InputError(source + ": empty signature file");
  if (*declared != sig.size())
    throw InputError(source + ": header declares " + std::to_string(*declared) + " points, file has " +
                     std::to_string(sig.size()));
  return sig;
}

SignatureRecord read_signature(const std::string& path) { return parse_signature(read_file(path), path); }

std::string format_signature(const SignatureRecord& sig) {
  std::string out = std::to_string(sig.size()) + "\n";
  for (std::size_t i = 0; i < sig.size(); ++i)
    out += format_double(sig.x[i]) + " " + format_double(sig.y[i]) + " " + format_double(sig.t[i]) + " 1 0 0 0\n";
  return out;
}

std::vector<NamedSignature> read_signature_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("'" + dir + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename().string().front() != '.') files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no signature files in '" + dir + "'");
  std::vector<NamedSignature> out;
  for (const auto& f : files) out.push_back({f.stem().string(), f.string(), read_signature(f.string())});
  return out;
}

namespace {

// Points sharing a timestamp are replaced by their average position.
void collapse_duplicates(const SignatureRecord& sig, std::vector<double>& x, std::vector<double>& y,
                         std::vector<double>& t) {
  for (std::size_t i = 0; i < sig.size();) {
    std::size_t j = i;
    double sx = 0, sy = 0;
    while (j < sig.size() && sig.t[j] == sig.t[i]) {
      sx += sig.x[j];
      sy += sig.y[j];
      ++j;
    }
    const auto cnt = static_cast<double>(j - i);
    x.push_back(sx / cnt);
    y.push_back(sy / cnt);
    t.push_back(sig.t[i]);
    i = j;
  }
}

Eigen::VectorXd interpolate(const std::vector<double>& u, const std::vector<double>& v, const Grid& grid) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double p = std::clamp(grid[g], u.front(), u.back());
    auto it = std::upper_bound(u.begin(), u.end(), p);
    std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - u.begin()), u.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (p - u[lo]) / (u[hi] - u[lo]);
    out[static_cast<Eigen::Index>(g)] = (1 - w) * v[lo] + w * v[hi];
  }
  return out;
}

}  // namespace

Curve tangential_acceleration_raw(const SignatureRecord& sig, const GridPtr& grid, const DerivativeMethod& method,
                                  std::vector<std::string>* warnings) {
  if (sig.size() < 5) throw InputError("signature needs at least 5 points");
  std::vector<double> x, y, t;
  collapse_duplicates(sig, x, y, t);
  if (t.size() < 2) throw InputError("signature timestamps are all equal");
  const double t0 = t.front(), span = t.back() - t0;
  for (auto& v : t) v = (v - t0) / span;
  t.back() = 1.0;

  const Eigen::VectorXd xs = interpolate(t, x, *grid), ys = interpolate(t, y, *grid);
  const auto d1 = derivative_operator(*grid, 1, method);
  const auto d2 = derivative_operator(*grid, 2, method);
  const Eigen::VectorXd x1 = d1 * xs, y1 = d1 * ys, x2 = d2 * xs, y2 = d2 * ys;
  const Eigen::VectorXd speed = (x1.array().square() + y1.array().square()).sqrt();
  const double vmax = speed.maxCoeff();
  const double floor = 1e-9 * vmax;
  const auto m = speed.size();

  std::vector<Eigen::Index> good;
  for (Eigen::Index i = 0; i < m; ++i)
    if (speed[i] > floor && vmax > 0.0) good.push_back(i);
  Eigen::VectorXd s(m);
  std::size_t carried = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index src = i;
    if (!(speed[i] > floor && vmax > 0.0)) {
      if (good.empty()) {
        s[i] = 0.0;
        continue;
      }
      src = good.front();
      for (auto g : good)
        if (std::abs(g - i) < std::abs(src - i)) src = g;
      ++carried;
    }
    s[i] = (x2[i] * x1[src] + y2[i] * y1[src]) / speed[src];
  }
  if (carried > 0 && warnings)
    warnings->push_back("tangent direction carried over at " + std::to_string(carried) +
                        " grid point(s) with near-zero speed");
  return Curve(grid, std::move(s));
}

Curve tangential_acceleration(const SignatureRecord& sig, const GridPtr& grid, const DerivativeMethod& method,
                              std::vector<std::string>* warnings) {
  auto raw = tangential_acceleration_raw(sig, grid, method, warnings);
  const double len = std::sqrt(inner_product(raw, raw, DistanceSpec::l2()));
  // Over unit time, a nondegenerate trajectory has accelerations on the order of its spatial extent.
  double extent = 0.0;
  for (std::size_t i = 0; i < sig.size(); ++i)
    extent = std::max({extent, std::abs(sig.x[i] - sig.x.front()), std::abs(sig.y[i] - sig.y.front())});
  if (!(len > 1e-9 * std::max(extent, 1e-300)) || !std::isfinite(len))
    throw DegenerateFeature("tangential acceleration is identically zero; cannot normalize to unit norm");
  return raw * (1.0 / len);
}

SignatureRecord synthetic_signature(int author, std::uint64_t seed, std::size_t points) {
  if (author != 0 && author != 1) throw InputError("synthetic author must be 0 or 1");
  if (points < 5) throw InputError("synthetic signature needs at least 5 points");
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(author)));
  std::normal_distribution<double> nd;
  constexpr double pi = std::numbers::pi;
  const double warp = 0.08 * nd(rng), size = 1.0 + 0.03 * nd(rng), duration = 1500.0 + 100.0 * nd(rng);
  SignatureRecord sig;
  for (std::size_t i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(points - 1);
    const double s = u + warp * std::sin(2 * pi * u) / (2 * pi);
    double x, y;
    if (author == 0) {
      x = s + 0.30 * std::sin(4 * pi * s);
      y = 0.50 * std::sin(2 * pi * s) + 0.20 * std::sin(6 * pi * s);
    } else {
      x = s + 0.15 * std::sin(6 * pi * s + 1.0);
      y = 0.40 * std::cos(3 * pi * s) - 0.25 * std::sin(5 * pi * s);
    }
    sig.x.push_back(std::round(2000.0 * size * x));
    sig.y.push_back(std::round(2000.0 * size * y));
    sig.t.push_back(std::round(duration * u));
    if (i > 0 && sig.t[i] == sig.t[i - 1]) ++sig.duplicate_timestamps;
  }
  return sig;
}

}  // namespace fms
