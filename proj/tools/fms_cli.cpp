#include "fms/bandwidth_scan.hpp"
#include "fms/curves_csv.hpp"
#include "fms/errors.hpp"
#include "fms/experiments.hpp"
#include "fms/inference.hpp"
#include "fms/io_util.hpp"
#include "fms/kernels.hpp"
#include "fms/mean_shift.hpp"
#include "fms/random.hpp"
#include "fms/report.hpp"
#include "fms/signature.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

using namespace fms;

namespace {

constexpr const char* kVersion = "0.1.0";

struct InputOptions {
  std::string curves;
  std::string signatures;
  std::size_t feature_points = 101;
  std::string feature_method = "locpoly";
  int feature_degree = 2;
  double feature_bandwidth = 0.02;

  std::string kernel = "gaussian_gaussian";
  std::string distance = "l2";
  std::string distance_method = "fd";
  int distance_degree = 2;
  double distance_bandwidth = 0.05;

  void attach(CLI::App* app) {
    auto* c = app->add_option("--curves", curves, "Curves CSV (first row grid, one curve per row)");
    auto* s = app->add_option("--signatures", signatures, "Directory of signature files");
    c->excludes(s);
    app->add_option("--feature-points", feature_points, "Grid size for signature features")->capture_default_str();
    app->add_option("--feature-method", feature_method, "Signature differentiation: fd or locpoly")
        ->check(CLI::IsMember({"fd", "locpoly"}))
        ->capture_default_str();
    app->add_option("--feature-degree", feature_degree, "Local polynomial degree for signatures")->capture_default_str();
    app->add_option("--feature-bandwidth", feature_bandwidth, "Local polynomial bandwidth for signatures (time units)")
        ->capture_default_str();
    app->add_option("--kernel", kernel, "Kernel pair")
        ->check(CLI::IsMember(builtin_pair_names()))
        ->capture_default_str();
    app->add_option("--distance", distance, "l2, h1, h1-induced, deriv1, deriv2")
        ->check(CLI::IsMember({"l2", "h1", "h1-induced", "deriv1", "deriv2"}))
        ->capture_default_str();
    app->add_option("--distance-method", distance_method, "Derivative estimator inside the distance: fd or locpoly")
        ->check(CLI::IsMember({"fd", "locpoly"}))
        ->capture_default_str();
    app->add_option("--distance-degree", distance_degree, "Local polynomial degree inside the distance")
        ->capture_default_str();
    app->add_option("--distance-bandwidth", distance_bandwidth, "Local polynomial bandwidth inside the distance")
        ->capture_default_str();
  }

  DerivativeMethod method(const std::string& name, int degree, double bw) const {
    if (name == "fd") return FiniteDifference{};
    return LocalPolynomial{degree, bw};
  }

  DistanceSpec distance_spec() const {
    const auto m = method(distance_method, distance_degree, distance_bandwidth);
    if (distance == "l2") return DistanceSpec::l2();
    if (distance == "h1") return DistanceSpec::sobolev_h1(m);
    if (distance == "h1-induced") return DistanceSpec::sobolev_h1_induced(m);
    return DistanceSpec::derivative_l2(distance == "deriv1" ? 1 : 2, m);
  }

  FunctionalSample load(RunReport& report, std::vector<std::string>& warnings) const {
    auto& prov = report.add("inputs");
    if (!curves.empty()) {
      prov.entries.emplace_back("curves", curves);
      prov.entries.emplace_back("sha256", sha256_file(curves));
      return read_curves_csv(curves);
    }
    if (signatures.empty()) throw InputError("one of --curves or --signatures is required");
    const auto grid = Grid::uniform(0.0, 1.0, feature_points);
    const auto m = method(feature_method, feature_degree, feature_bandwidth);
    std::vector<Curve> feats;
    std::vector<std::string> labels;
    prov.entries.emplace_back("signatures", signatures);
    prov.columns = {"name", "points", "duplicate_timestamps", "sha256"};
    for (const auto& [name, path, sig] : read_signature_dir(signatures)) {
      std::vector<std::string> w;
      feats.push_back(tangential_acceleration(sig, grid, m, &w));
      for (const auto& msg : w) warnings.push_back(name + ": " + msg);
      if (sig.duplicate_timestamps > 0)
        warnings.push_back(name + ": " + std::to_string(sig.duplicate_timestamps) + " duplicate timestamp(s)");
      labels.push_back(name);
      prov.rows.push_back(
          {name, std::to_string(sig.size()), std::to_string(sig.duplicate_timestamps), sha256_file(path)});
    }
    return FunctionalSample(grid, feats, labels);
  }

  void echo(ReportSection& cfg) const {
    cfg.entries.emplace_back("kernel", kernel);
    cfg.entries.emplace_back("distance", distance_spec().describe());
    if (!signatures.empty()) {
      cfg.entries.emplace_back("feature_points", std::to_string(feature_points));
      cfg.entries.emplace_back("feature_method", feature_method);
      if (feature_method == "locpoly") {
        cfg.entries.emplace_back("feature_degree", std::to_string(feature_degree));
        cfg.entries.emplace_back("feature_bandwidth", format_double(feature_bandwidth));
      }
    }
  }
};

struct BandwidthOptions {
  std::optional<double> absolute;
  std::optional<double> fraction;

  void attach(CLI::App* app) {
    auto* a = app->add_option("--bandwidth", absolute, "Absolute bandwidth h");
    auto* f = app->add_option("--bandwidth-frac", fraction, "Bandwidth as a fraction of the max pairwise distance");
    a->excludes(f);
  }

  std::optional<double> resolve(double max_distance) const {
    if (absolute) return *absolute;
    if (fraction) return *fraction * max_distance;
    return std::nullopt;
  }
};

struct EngineOptions {
  MeanShiftConfig cfg;
  std::optional<double> tolerance, perturbation;
  bool no_stability = false;

  void attach(CLI::App* app) {
    app->add_option("--max-iters", cfg.max_iters, "Mean-shift iteration cap")->capture_default_str();
    app->add_option("--tol", tolerance, "Step tolerance (default 1e-6 * max distance)");
    app->add_option("--merge", cfg.merge_radius_factor, "Merge radius as a fraction of h")->capture_default_str();
    app->add_option("--perturb", perturbation, "Stability perturbation size (default 0.1 * h)");
    app->add_flag("--no-stability", no_stability, "Skip the mode stability check");
  }

  MeanShiftConfig finish(std::uint64_t seed) const {
    MeanShiftConfig c = cfg;
    c.tolerance = tolerance;
    c.perturbation = perturbation;
    c.check_stability = !no_stability;
    c.seed = seed;
    return c;
  }

  void echo(ReportSection& s, const MeanShiftConfig& c) const {
    s.entries.emplace_back("max_iters", std::to_string(c.max_iters));
    s.entries.emplace_back("tolerance", tolerance ? format_double(*tolerance) : "default");
    s.entries.emplace_back("merge_radius_factor", format_double(c.merge_radius_factor));
    s.entries.emplace_back("perturbation", perturbation ? format_double(*perturbation) : "default");
    s.entries.emplace_back("stability_check", c.check_stability ? "1" : "0");
  }
};

void add_provenance(RunReport& report, const std::string& command, std::uint64_t seed) {
  auto& p = report.add("provenance");
  p.entries = {{"command", command}, {"version", std::string("fms ") + kVersion}, {"seed", std::to_string(seed)}};
}

void add_warnings(RunReport& report, const std::vector<std::string>& warnings) {
  if (warnings.empty()) return;
  auto& w = report.add("warnings");
  for (std::size_t i = 0; i < warnings.size(); ++i) w.entries.emplace_back(std::to_string(i), warnings[i]);
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-")
    std::cout << content;
  else
    write_file_atomic(path, content);
}

void add_composition(RunReport& report, const ModeSet& modes, const FunctionalSample& sample) {
  if (!sample.has_labels()) return;
  std::map<std::pair<int, std::string>, std::size_t> counts;
  for (std::size_t i = 0; i < modes.assignments.size(); ++i) ++counts[{modes.assignments[i], sample.labels()[i]}];
  auto& s = report.add("modes.composition");
  s.columns = {"mode", "label", "count"};
  for (const auto& [key, n] : counts) s.rows.push_back({std::to_string(key.first), key.second, std::to_string(n)});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional mean-shift clustering and mode testing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // cluster
  InputOptions cl_in;
  BandwidthOptions cl_bw;
  EngineOptions cl_eng;
  std::uint64_t cl_seed = 0;
  std::string cl_out;
  auto* cl = app.add_subcommand("cluster", "Mean-shift clustering at one bandwidth");
  cl_in.attach(cl);
  cl_bw.attach(cl);
  cl_eng.attach(cl);
  cl->add_option("--seed", cl_seed, "Seed for the stability perturbations")->capture_default_str();
  cl->add_option("-o,--output", cl_out, "Report path (default stdout)");

  // scan
  InputOptions sc_in;
  EngineOptions sc_eng;
  ScanSpec sc_spec;
  std::uint64_t sc_seed = 0;
  std::string sc_out, sc_table;
  auto* sc = app.add_subcommand("scan", "Sweep bandwidths and count non-atomic clusters");
  sc_in.attach(sc);
  sc_eng.attach(sc);
  sc->add_option("--values", sc_spec.n_values, "Number of bandwidths")->capture_default_str();
  sc->add_option("--lo", sc_spec.lo_frac, "Lowest bandwidth as a fraction of the max distance")->capture_default_str();
  sc->add_option("--hi", sc_spec.hi_frac, "Highest bandwidth as a fraction of the max distance")->capture_default_str();
  sc->add_option("--min-plateau", sc_spec.min_plateau_len, "Minimum plateau length")->capture_default_str();
  sc->add_option("--seed", sc_seed, "Seed (recorded; the scan itself is deterministic)")->capture_default_str();
  sc->add_option("-o,--output", sc_out, "Report path (default stdout)");
  sc->add_option("--table", sc_table, "Also write bandwidth,nonatomic,clustered as CSV");

  // test-modes
  InputOptions tm_in;
  BandwidthOptions tm_bw;
  EngineOptions tm_eng;
  TestConfig tm_cfg;
  double tm_quantile = 0.41;
  std::string tm_stat = "lambda_eigen", tm_split = "first_half", tm_out;
  std::uint64_t tm_seed = 0;
  auto* tm = app.add_subcommand("test-modes", "Split-sample bootstrap test of candidate modes");
  tm_in.attach(tm);
  tm_bw.attach(tm);
  tm_eng.attach(tm);
  tm->add_option("--bandwidth-quantile", tm_quantile,
                 "Without --bandwidth/--bandwidth-frac: quantile of subsample-1 pairwise distances")
      ->capture_default_str();
  tm->add_option("--alpha", tm_cfg.alpha, "Family-wise level")->capture_default_str();
  tm->add_option("--boot", tm_cfg.n_boot, "Bootstrap replicates")->capture_default_str();
  tm->add_option("--statistic", tm_stat, "lambda_eigen or lambda_closed_form")
      ->check(CLI::IsMember({"lambda_eigen", "lambda_closed_form"}))
      ->capture_default_str();
  tm->add_option("--split", tm_split, "first_half or random")
      ->check(CLI::IsMember({"first_half", "random"}))
      ->capture_default_str();
  tm->add_flag("--exclude-atomic", tm_cfg.exclude_atomic, "Drop single-curve clusters from the candidates");
  tm->add_option("--seed", tm_seed, "Seed for splitting and resampling")->capture_default_str();
  tm->add_option("-o,--output", tm_out, "Report path (default stdout)");

  // simulate
  GeneratorSpec gen;
  std::string gen_kind = "signal_clutter", gen_out;
  std::size_t gen_points = 101;
  auto* sim = app.add_subcommand("simulate", "Generate a labelled synthetic curve sample");
  sim->add_option("kind", gen_kind, "signal_clutter, elliptical_sincos or circular_sincos")
      ->check(CLI::IsMember({"signal_clutter", "elliptical_sincos", "circular_sincos"}))
      ->capture_default_str();
  sim->add_option("--n", gen.n, "Number of curves")->capture_default_str();
  sim->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  sim->add_option("--grid-points", gen_points, "Equally spaced points on [0, 1]")->capture_default_str();
  sim->add_option("--ring-sd", gen.ring_sd, "Radial noise for circular_sincos")->capture_default_str();
  sim->add_option("--gamma-sd", gen.gamma_sd, "Clutter level spread for signal_clutter")->capture_default_str();
  sim->add_option("--eta-sd", gen.eta_sd, "Amplitude spread for signal_clutter")->capture_default_str();
  sim->add_option("-o,--output", gen_out, "Curves CSV path (default stdout)");

  // signatures
  std::size_t sig_count = 20, sig_points = 180;
  std::uint64_t sig_seed = 0;
  std::string sig_dir;
  auto* sg = app.add_subcommand("signatures", "Write a synthetic two-writer signature set");
  sg->add_option("--count", sig_count, "Signatures per writer")->capture_default_str();
  sg->add_option("--points", sig_points, "Points per signature")->capture_default_str();
  sg->add_option("--seed", sig_seed, "Seed")->capture_default_str();
  sg->add_option("--dir", sig_dir, "Output directory")->required();

  // baseline
  std::string bl_curves, bl_out, bl_init = "mean_extremes";
  std::size_t bl_components = 2, bl_k = 2;
  std::uint64_t bl_seed = 0;
  auto* bl = app.add_subcommand("baseline", "Principal-component scores followed by k-means");
  bl->add_option("--curves", bl_curves, "Curves CSV")->required();
  bl->add_option("--components", bl_components, "Number of components")->capture_default_str();
  bl->add_option("--k", bl_k, "Number of clusters")->capture_default_str();
  bl->add_option("--init", bl_init, "mean_extremes or random")
      ->check(CLI::IsMember({"mean_extremes", "random"}))
      ->capture_default_str();
  bl->add_option("--seed", bl_seed, "Seed for random initialization")->capture_default_str();
  bl->add_option("-o,--output", bl_out, "Table path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: input: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cl->parsed()) {
      RunReport rep;
      add_provenance(rep, "cluster", cl_seed);
      std::vector<std::string> warnings;
      const auto sample = cl_in.load(rep, warnings);
      const auto pair = builtin_pair(cl_in.kernel);
      DensityModel model(sample, pair, cl_in.distance_spec(), BandwidthRule::fixed(1.0), Normalization::none);
      const auto h = cl_bw.resolve(model.max_pairwise_distance());
      if (!h) throw InputError("cluster needs --bandwidth or --bandwidth-frac");
      model = model.with_bandwidth(BandwidthRule::fixed(*h));
      const auto cfg = cl_eng.finish(cl_seed);
      auto& c = rep.add("config");
      cl_in.echo(c);
      c.entries.emplace_back("bandwidth", format_double(*h));
      c.entries.emplace_back("bandwidth_fraction", format_double(*h / model.max_pairwise_distance()));
      c.entries.emplace_back("max_distance", format_double(model.max_pairwise_distance()));
      cl_eng.echo(c, cfg);
      const auto modes = cluster(model, cfg);
      add_mode_set(rep, modes, sample);
      add_composition(rep, modes, sample);
      add_warnings(rep, warnings);
      emit(cl_out, format_report(rep));
    } else if (sc->parsed()) {
      RunReport rep;
      add_provenance(rep, "scan", sc_seed);
      std::vector<std::string> warnings;
      const auto sample = sc_in.load(rep, warnings);
      DensityModel model(sample, builtin_pair(sc_in.kernel), sc_in.distance_spec(), BandwidthRule::fixed(1.0),
                         Normalization::none);
      const auto cfg = sc_eng.finish(sc_seed);
      auto& c = rep.add("config");
      sc_in.echo(c);
      c.entries.emplace_back("values", std::to_string(sc_spec.n_values));
      c.entries.emplace_back("lo", format_double(sc_spec.lo_frac));
      c.entries.emplace_back("hi", format_double(sc_spec.hi_frac));
      c.entries.emplace_back("min_plateau", std::to_string(sc_spec.min_plateau_len));
      sc_eng.echo(c, cfg);
      const auto result = scan(model, sc_spec, cfg);
      add_scan(rep, result);
      add_warnings(rep, warnings);
      std::string table;
      if (!sc_table.empty()) {
        table = "bandwidth,nonatomic,clustered\n";
        for (std::size_t i = 0; i < result.bandwidths.size(); ++i)
          table += format_double(result.bandwidths[i]) + "," + std::to_string(result.nonatomic_counts[i]) + "," +
                   std::to_string(result.clustered_counts[i]) + "\n";
      }
      const auto text = format_report(rep);
      if (!sc_table.empty()) write_file_atomic(sc_table, table);
      emit(sc_out, text);
    } else if (tm->parsed()) {
      RunReport rep;
      add_provenance(rep, "test-modes", tm_seed);
      std::vector<std::string> warnings;
      const auto sample = tm_in.load(rep, warnings);
      tm_cfg.statistic = tm_stat == "lambda_closed_form" ? Statistic::lambda_closed_form : Statistic::lambda_eigen;
      tm_cfg.split = tm_split == "random" ? SplitRule::random : SplitRule::first_half;
      tm_cfg.split_seed = tm_seed;
      const auto pair = builtin_pair(tm_in.kernel);
      const auto dist = tm_in.distance_spec();
      BandwidthChoice choice = PairwiseQuantile{tm_quantile};
      if (tm_bw.absolute || tm_bw.fraction) {
        DensityModel probe(sample, pair, dist, BandwidthRule::fixed(1.0), Normalization::none);
        choice = BandwidthRule::fixed(*tm_bw.resolve(probe.max_pairwise_distance()));
      }
      const auto cfg = tm_eng.finish(tm_seed);
      auto& c = rep.add("config");
      tm_in.echo(c);
      c.entries.emplace_back("bandwidth_rule", std::holds_alternative<PairwiseQuantile>(choice)
                                                   ? "quantile " + format_double(tm_quantile)
                                                   : "fixed");
      tm_eng.echo(c, cfg);
      c.entries.emplace_back("exclude_atomic", tm_cfg.exclude_atomic ? "1" : "0");
      const auto result = test_modes(sample, pair, dist, choice, cfg, tm_cfg, tm_seed);
      add_mode_test(rep, result, sample);
      add_warnings(rep, warnings);
      emit(tm_out, format_report(rep));
    } else if (sim->parsed()) {
      gen.kind = parse_generator_kind(gen_kind);
      const auto sample = generate(gen, Grid::uniform(0.0, 1.0, gen_points));
      if (gen_out.empty() || gen_out == "-")
        std::cout << format_curves_csv(sample);
      else
        write_curves_csv(gen_out, sample);
    } else if (sg->parsed()) {
      std::filesystem::create_directories(sig_dir);
      for (int author = 0; author < 2; ++author)
        for (std::size_t i = 0; i < sig_count; ++i) {
          const auto sig = synthetic_signature(author, derive_seed(sig_seed, i), sig_points);
          char name[64];
          std::snprintf(name, sizeof name, "W%dS%02zu.txt", author + 1, i + 1);
          write_file_atomic((std::filesystem::path(sig_dir) / name).string(), format_signature(sig));
        }
    } else if (bl->parsed()) {
      const auto sample = read_curves_csv(bl_curves);
      KMeansSeeding seeding;
      seeding.kind = bl_init == "random" ? KMeansInit::random : KMeansInit::mean_extremes;
      seeding.seed = bl_seed;
      const auto r = fpca_kmeans(sample, bl_components, bl_k, seeding);
      std::string out = "curve,label";
      for (std::size_t j = 0; j < bl_components; ++j) out += ",score" + std::to_string(j + 1);
      out += ",cluster\n";
      for (std::size_t i = 0; i < sample.size(); ++i) {
        out += std::to_string(i) + "," + (sample.has_labels() ? sample.labels()[i] : "");
        for (Eigen::Index j = 0; j < r.pc_scores.cols(); ++j)
          out += "," + format_double(r.pc_scores(static_cast<Eigen::Index>(i), j));
        out += "," + std::to_string(r.km_assignments[i]) + "\n";
      }
      if (sample.has_labels())
        std::cerr << "accuracy " << format_double(clustering_accuracy(sample.labels(), r.km_assignments)) << "\n";
      emit(bl_out, out);
    }
  } catch (const InputError& e) {
    std::cerr << "error: input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
