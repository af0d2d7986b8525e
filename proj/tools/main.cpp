#include "stabprobe/config.hpp"
#include "stabprobe/experiments.hpp"
#include "stabprobe/io.hpp"
#include "stabprobe/probe.hpp"
#include "stabprobe/separation.hpp"
#include "stabprobe/svg.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace stabprobe;

namespace fs = std::filesystem;

struct GlobalArgs {
  std::optional<std::string> config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct ProbeArgs {
  std::string family;
  int lags = 1;
  double p = 1.0;
  int keep = 0;
  std::vector<double> kurtosis;
  bool population = false;
  bool force_fd = false;
  bool dump_constraints_flag = false;
};

struct SeparateArgs {
  std::string which;
  int lags = 3;
  double p = 1.0;
};

void add_override_options(CLI::App& app, GlobalArgs& args) {
  static const std::vector<std::pair<std::string, std::string>> options = {
      {"--n", "n"},           {"--T", "T"},         {"--trials", "trials"},
      {"--seed", "seed"},     {"--p-grid", "p_grid"}, {"--l-grid", "L_grid"},
      {"--k-grid", "K_grid"}, {"--ar", "ar"},       {"--epsilon", "epsilon"},
      {"--delta", "delta"},   {"--fd-step", "h"},   {"--symmetrize", "symmetrize"},
      {"--preset", "preset"}, {"--mode", "mode"},   {"--format", "format"},
      {"--out", "out_dir"},
  };
  app.add_option("--config", "config file with key = value lines")
      ->each([&args](const std::string& v) { args.config_file = v; });
  for (const auto& [flag, key] : options) {
    const std::string k = key;
    app.add_option(flag)
        ->description("overrides config key '" + k + "'")
        ->each([&args, k](const std::string& v) { args.overrides.emplace_back(k, v); });
  }
  app.add_flag("--report-api", "record the Amari index per trial")
      ->each([&args](const std::string&) { args.overrides.emplace_back("report_api", "true"); });
  app.add_flag("--records", "write the per-trial records CSV")
      ->each([&args](const std::string&) { args.overrides.emplace_back("records", "true"); });
  app.add_flag("--population", "population mode (exact constraint operators)")
      ->each([&args](const std::string&) { args.overrides.emplace_back("mode", "population"); });
}

ObservationEvaluator build_probe_evaluator(const CliConfig& cfg, const ProbeArgs& args) {
  const int n = cfg.exp.n;
  const bool population = cfg.exp.mode == EvalMode::population;
  if (args.family == "sos") {
    if (population) {
      if (args.lags == 0) {
        // Whitening constraint alone: the continuous-ambiguity baseline.
        return ObservationEvaluator::population_sos({Mat::Identity(n, n)}, {0},
                                                    cfg.exp.symmetrize);
      }
      std::vector<Mat> r_list;
      std::vector<int> tags;
      for (int tau = 1; tau <= args.lags; ++tau) {
        Vec d(n);
        for (int i = 0; i < n; ++i) {
          d[i] = std::pow(cfg.exp.ar[i], tau);
        }
        r_list.push_back(d.asDiagonal());
        tags.push_back(tau);
      }
      return ObservationEvaluator::population_sos(std::move(r_list), std::move(tags),
                                                  cfg.exp.symmetrize);
    }
    SourceSpec spec;
    spec.kind = SourceKind::ar1_gaussian;
    spec.ar = cfg.exp.ar;
    const SignalBlock s = generate_sources(spec, n, cfg.exp.samples,
                                           RngSeed{cfg.exp.base_seed, 0});
    const Whitener wh = fit_whitener(s);
    return ObservationEvaluator::sample_sos(wh.apply(s), args.lags, cfg.exp.symmetrize);
  }

  if (population) {
    Vec kappa(n);
    for (int i = 0; i < n; ++i) {
      kappa[i] = i < static_cast<int>(args.kurtosis.size()) ? args.kurtosis[i]
                                                            : gg_excess_kurtosis(args.p);
    }
    return ObservationEvaluator::population_hos(std::move(kappa), args.keep);
  }
  SourceSpec spec;
  spec.kind = SourceKind::iid_gg;
  spec.shape = args.p;
  const SignalBlock s = generate_sources(spec, n, cfg.exp.samples,
                                         RngSeed{cfg.exp.base_seed, 0});
  const Whitener wh = fit_whitener(s);
  return ObservationEvaluator::sample_hos(wh.apply(s), args.keep);
}

int cmd_probe(const GlobalArgs& global, const ProbeArgs& args) {
  const CliConfig cfg = parse_config(global.config_file, global.overrides);
  write_resolved(cfg);

  const ObservationEvaluator ev = build_probe_evaluator(cfg, args);
  const SkewBasis basis = skew_basis(cfg.exp.n);
  const JacobianMode mode = (ev.family() == ConstraintFamily::sos && !args.force_fd)
                                ? JacobianMode::analytic_sos
                                : JacobianMode::finite_difference;
  const JacobianReport report = probe(ev, basis, mode, cfg.exp.fd_step, cfg.exp.kernel_tol);

  write_file((fs::path(cfg.out_dir) / "probe_report.txt").string(), serialize_report(report));
  if (args.dump_constraints_flag) {
    dump_constraints(cfg.out_dir,
                     ev.evaluate(Mat::Identity(cfg.exp.n, cfg.exp.n)));
  }
  std::cout << "probe=" << format_double(report.probe) << " kernel_dim=" << report.kernel_dim
            << "\n";
  return 0;
}

int cmd_experiment(const GlobalArgs& global, const std::string& which) {
  const CliConfig cfg = parse_config(global.config_file, global.overrides);
  write_resolved(cfg);
  const fs::path out(cfg.out_dir);
  const bool with_svg = cfg.format == "csv+svg";

  GridResult grid;
  if (which == "hos") {
    grid = run_hos_sweep(cfg.exp);
    write_file((out / "hos_sweep.csv").string(), sweep_csv(grid, cfg.exp.samples, false));
    if (with_svg) {
      write_file((out / "hos_sweep.svg").string(),
                 sweep_svg(grid, "HOS probe vs source shape", "p"));
    }
    if (cfg.records) {
      write_file((out / "hos_sweep_records.csv").string(), records_csv(grid));
    }
    std::cout << "wrote " << (out / "hos_sweep.csv").string() << "\n";
  } else if (which == "sos") {
    grid = run_sos_sweep(cfg.exp);
    write_file((out / "sos_sweep.csv").string(), sweep_csv(grid, cfg.exp.samples, true));
    if (with_svg) {
      write_file((out / "sos_sweep.svg").string(),
                 sweep_svg(grid, "SOS probe vs lag count", "L"));
    }
    if (cfg.records) {
      write_file((out / "sos_sweep_records.csv").string(), records_csv(grid));
    }
    std::cout << "wrote " << (out / "sos_sweep.csv").string() << "\n";
  } else if (which == "tradeoff-sos") {
    grid = run_tradeoff_sos(cfg.exp);
    write_file((out / "tradeoff_sos.csv").string(), tradeoff_csv(grid, "L"));
    write_file((out / "tradeoff_sos_frontier.csv").string(), frontier_csv(grid));
    if (with_svg) {
      write_file((out / "tradeoff_sos.svg").string(),
                 heatmap_svg(grid, "SOS trade-off: probe(p, L)", "L"));
    }
    if (cfg.records) {
      write_file((out / "tradeoff_sos_records.csv").string(), records_csv(grid));
    }
    std::cout << "wrote " << (out / "tradeoff_sos.csv").string() << "\n";
  } else if (which == "tradeoff-hos") {
    grid = run_tradeoff_hos(cfg.exp);
    write_file((out / "tradeoff_hos.csv").string(), tradeoff_csv(grid, "K"));
    write_file((out / "tradeoff_hos_frontier.csv").string(), frontier_csv(grid));
    write_file((out / "tradeoff_hos_isoband.csv").string(), isoband_csv(grid, "K"));
    if (with_svg) {
      write_file((out / "tradeoff_hos.svg").string(),
                 heatmap_svg(grid, "HOS trade-off: probe(p, K)", "K"));
    }
    if (cfg.records) {
      write_file((out / "tradeoff_hos_records.csv").string(), records_csv(grid));
    }
    std::cout << "wrote " << (out / "tradeoff_hos.csv").string() << "\n";
  } else {
    throw ConfigError("experiment: unknown kind '" + which +
                      "' (expected hos, sos, tradeoff-sos, tradeoff-hos)");
  }
  return 0;
}

int cmd_separate(const GlobalArgs& global, const SeparateArgs& args) {
  const CliConfig cfg = parse_config(global.config_file, global.overrides);
  write_resolved(cfg);

  SourceSpec spec;
  if (args.which == "jade") {
    spec.kind = SourceKind::iid_gg;
    spec.shape = args.p;
  } else {
    spec.kind = SourceKind::ar1_gaussian;
    spec.ar = cfg.exp.ar;
  }
  const RngSeed seed{cfg.exp.base_seed, 0};
  const SignalBlock s = generate_sources(spec, cfg.exp.n, cfg.exp.samples, seed);
  const Mat h = random_orthogonal(cfg.exp.n, seed);
  const SignalBlock x = mix(h, s);
  const Mat w = args.which == "jade" ? jade_separate(x) : sobi_separate(x, args.lags);
  const double api = amari_index(w * h);

  const fs::path out(cfg.out_dir);
  write_file((out / "wtotal.csv").string(), matrix_csv(w));
  if (cfg.records) {
    write_file((out / "sources.csv").string(), signal_csv(s));
    write_file((out / "mixture.csv").string(), signal_csv(x));
  }
  std::cout << "api=" << format_double(api) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// selftest: population-mode oracle suite.

struct SelfTest {
  int failures = 0;

  void check(const std::string& name, double expected, double got, double tol) {
    const bool ok = std::abs(got - expected) <= tol;
    if (!ok) {
      ++failures;
    }
    std::printf("%-4s %-28s expected=%-22.15g got=%-22.15g tol=%g\n", ok ? "ok" : "FAIL",
                name.c_str(), expected, got, tol);
  }
};

Mat rodrigues(const Mat& omega) {
  Vec axis(3);
  axis << omega(2, 1), omega(0, 2), omega(1, 0);
  const double theta = axis.norm();
  if (theta == 0.0) {
    return Mat::Identity(3, 3);
  }
  return Mat::Identity(3, 3) + std::sin(theta) / theta * omega +
         (1.0 - std::cos(theta)) / (theta * theta) * (omega * omega);
}

int cmd_selftest() {
  SelfTest t;
  const SkewBasis basis3 = skew_basis(3);

  {
    const SkewBasis b5 = skew_basis(5);
    t.check("skew-basis-count-n5", 10.0, b5.dim(), 0.0);
    double max_cross = 0.0;
    double norm_err = 0.0;
    for (int k = 0; k < b5.dim(); ++k) {
      norm_err = std::max(norm_err,
                          std::abs(b5.generators[k].cwiseProduct(b5.generators[k]).sum() - 2.0));
      for (int l = k + 1; l < b5.dim(); ++l) {
        max_cross = std::max(max_cross,
                             std::abs(b5.generators[k].cwiseProduct(b5.generators[l]).sum()));
      }
    }
    t.check("skew-basis-orthogonality", 0.0, std::max(max_cross, norm_err), 0.0);
  }
  t.check("expm-zero", 0.0, (expm_skew(Mat::Zero(3, 3)) - Mat::Identity(3, 3)).norm(), 1e-15);
  {
    Mat omega(2, 2);
    omega << 0, -M_PI / 2, M_PI / 2, 0;
    Mat expected(2, 2);
    expected << 0, -1, 1, 0;
    t.check("expm-planar-quarter-turn", 0.0, (expm_skew(omega) - expected).norm(), 1e-12);
  }
  {
    const Mat omega = 0.3 * basis3.generators[0] + 0.7 * basis3.generators[1] -
                      0.4 * basis3.generators[2];
    t.check("expm-rodrigues", 0.0, (expm_skew(omega) - rodrigues(omega)).norm(), 1e-12);
    const Mat big = omega * (10.0 / omega.norm());
    t.check("expm-inverse", 0.0,
            (expm_skew(big) * expm_skew(-big) - Mat::Identity(3, 3)).norm(), 1e-11);
  }
  {
    Mat a = Vec{{1.5, -0.5}}.asDiagonal();
    Mat b(2, 2);
    b << 0, 1, -1, 0;
    Mat expected(2, 2);
    expected << 0, 2, 2, 0;
    t.check("commutator-diag", 0.0, (commutator(a, b) - expected).norm(), 1e-15);
  }
  {
    Mat m(2, 2);
    m << 1, 2, 3, 4;
    const Vec v = vec(m);
    const Vec expected{{1.0, 3.0, 2.0, 4.0}};
    t.check("vec-column-order", 0.0, (v - expected).norm(), 0.0);
  }
  {
    // Orthogonal columns scaled to known norms: singular values are the norms.
    const Mat q = expm_skew(0.4 * basis3.generators[0] - 0.2 * basis3.generators[2]);
    Mat j(3, 3);
    const double s2 = std::sqrt(2.0);
    j.col(0) = s2 * 0.7 * q.col(0);
    j.col(1) = s2 * 0.4 * q.col(1);
    j.col(2) = s2 * 0.3 * q.col(2);
    const std::vector<double> sv = singular_spectrum(j);
    const double err = std::abs(sv[0] - s2 * 0.7) + std::abs(sv[1] - s2 * 0.4) +
                       std::abs(sv[2] - s2 * 0.3);
    t.check("svd-orthogonal-columns", 0.0, err, 1e-14);
  }

  const auto diag_sos = [&](int lags) {
    std::vector<Mat> r_list;
    std::vector<int> tags;
    for (int tau = 1; tau <= lags; ++tau) {
      r_list.push_back(Vec{{std::pow(0.2, tau), std::pow(0.6, tau), std::pow(0.9, tau)}}.asDiagonal());
      tags.push_back(tau);
    }
    return ObservationEvaluator::population_sos(std::move(r_list), std::move(tags));
  };

  {
    const JacobianReport rep = probe(diag_sos(1), basis3, JacobianMode::analytic_sos);
    t.check("probe-single-lag", std::sqrt(2.0) * 0.3, rep.probe, 1e-9);
    t.check("probe-single-lag-kernel", 0.0, rep.kernel_dim, 0.0);
  }
  {
    const auto ev = ObservationEvaluator::population_sos({Mat::Identity(3, 3)}, {0});
    const JacobianReport rep = probe(ev, basis3, JacobianMode::analytic_sos);
    t.check("probe-zero-lag", 0.0, rep.probe, 1e-10);
    t.check("probe-zero-lag-kernel", 3.0, rep.kernel_dim, 0.0);
  }
  for (int lags = 1; lags <= 3; ++lags) {
    const auto ev = diag_sos(lags);
    const Mat j_fd = jacobian_fd(ev, basis3, 1e-4);
    const Mat j_an =
        jacobian_sos_analytic(ev.evaluate(Mat::Identity(3, 3)).matrices, basis3);
    t.check("fd-analytic-L" + std::to_string(lags), 0.0,
            (j_fd - j_an).norm() / std::max(1.0, j_an.norm()), 1e-6);
  }
  {
    // Stacked commutator column norms, minimized over channel pairs.
    const double a[3] = {0.2, 0.6, 0.9};
    double expected = 1e300;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        double sum = 0.0;
        for (int tau = 1; tau <= 2; ++tau) {
          const double diff = std::pow(a[i], tau) - std::pow(a[j], tau);
          sum += diff * diff;
        }
        expected = std::min(expected, std::sqrt(2.0 * sum));
      }
    }
    const JacobianReport rep = probe(diag_sos(2), basis3, JacobianMode::analytic_sos);
    t.check("probe-two-lags", expected, rep.probe, 1e-9);
  }
  {
    const JacobianReport one = probe(diag_sos(1), basis3, JacobianMode::analytic_sos);
    const JacobianReport two = probe(diag_sos(2), basis3, JacobianMode::analytic_sos);
    double worst = 0.0;
    for (std::size_t k = 0; k < one.singular_values.size(); ++k) {
      worst = std::min(worst, two.singular_values[k] - one.singular_values[k]);
    }
    t.check("monotone-stacking", 0.0, std::min(0.0, worst + 1e-10), 0.0);
    t.check("monotone-kernel", 0.0, std::max(0, two.kernel_dim - one.kernel_dim), 0.0);
  }
  {
    // Degenerate pairs leave one kernel direction each; the stack removes both.
    const auto ev12 = ObservationEvaluator::population_sos(
        {Vec{{0.5, 0.5, 0.9}}.asDiagonal()}, {1});
    const auto ev23 = ObservationEvaluator::population_sos(
        {Vec{{0.2, 0.9, 0.9}}.asDiagonal()}, {1});
    const Mat j1 = jacobian_sos_analytic(ev12.evaluate(Mat::Identity(3, 3)).matrices, basis3);
    const Mat j2 = jacobian_sos_analytic(ev23.evaluate(Mat::Identity(3, 3)).matrices, basis3);
    t.check("lemma1-kernel-j1", 1.0, report_from_jacobian(j1).kernel_dim, 0.0);
    t.check("lemma1-kernel-j2", 1.0, report_from_jacobian(j2).kernel_dim, 0.0);
    const StackedKernel stack = kernel_intersection_check({j1, j2});
    t.check("lemma1-stacked-kernel", 0.0, stack.report.kernel_dim, 0.0);
    const StackedKernel dup = kernel_intersection_check({j1, j1});
    const JacobianReport single = report_from_jacobian(j1);
    double scale_err = 0.0;
    for (std::size_t k = 0; k < single.singular_values.size(); ++k) {
      scale_err = std::max(scale_err,
                           std::abs(dup.report.singular_values[k] -
                                    std::sqrt(2.0) * single.singular_values[k]));
    }
    t.check("lemma1-duplicate-scale", 0.0, scale_err, 1e-12);
  }
  {
    const auto ev = ObservationEvaluator::population_hos(Vec::Constant(3, 3.0));
    const JacobianReport rep = probe(ev, basis3, JacobianMode::finite_difference);
    t.check("hos-population-probe", 2.0 * std::sqrt(2.0) * 3.0, rep.probe, 1e-5);
    const auto gauss = ObservationEvaluator::population_hos(Vec::Zero(3));
    const JacobianReport zero = probe(gauss, basis3, JacobianMode::finite_difference);
    t.check("hos-gaussian-zero", 0.0, zero.probe, 1e-12);
  }
  {
    Mat p = Mat::Zero(3, 3);
    p(0, 1) = 2.0;
    p(1, 2) = -3.0;
    p(2, 0) = 0.5;
    t.check("amari-perm-diag", 0.0, amari_index(p), 0.0);
    t.check("amari-all-ones", 1.0, amari_index(Mat::Ones(3, 3)), 1e-15);
  }
  {
    const auto frontier =
        frontier_first_crossing({1, 2, 3}, {0.1, 0.4, 0.6}, 1, 0.5);
    t.check("frontier-first-crossing", 3.0, frontier[0] ? *frontier[0] : -1.0, 0.0);
    const auto none = frontier_first_crossing({1, 2, 3}, {0.1, 0.2, 0.3}, 1, 0.5);
    t.check("frontier-absent", 1.0, none[0] ? 0.0 : 1.0, 0.0);
    const auto mask = iso_band_mask({0.44, 0.52, 0.61}, 0.5, 0.05);
    const bool good = !mask[0] && mask[1] && !mask[2];
    t.check("iso-band-mask", 1.0, good ? 1.0 : 0.0, 0.0);
  }
  t.check("gg-kurtosis-laplace", 3.0, gg_excess_kurtosis(1.0), 1e-12);

  if (t.failures > 0) {
    std::printf("selftest: %d check(s) failed\n", t.failures);
    return 1;
  }
  std::printf("selftest: all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jacobian-based local-identifiability probe for blind source separation"};
  app.require_subcommand(1);

  GlobalArgs global;
  ProbeArgs probe_args;
  SeparateArgs separate_args;
  std::string experiment_kind;

  CLI::App* probe_cmd = app.add_subcommand("probe", "evaluate one probe and report sigma_min");
  add_override_options(*probe_cmd, global);
  probe_cmd->add_option("--family", probe_args.family, "constraint family (sos | hos)")
      ->required()
      ->check(CLI::IsMember({"sos", "hos"}));
  probe_cmd->add_option("--lags", probe_args.lags,
                        "lag count for the SOS family (0 = zero-lag constraint only)");
  probe_cmd->add_option("--p", probe_args.p, "generalized Gaussian shape for HOS sources");
  probe_cmd->add_option("--K", probe_args.keep,
                        "cumulant matrices kept after the Frobenius sort (0 = all)");
  probe_cmd->add_option("--kurtosis", probe_args.kurtosis,
                        "per-channel excess kurtosis for the population HOS family")
      ->delimiter(',');
  probe_cmd->add_flag("--fd", probe_args.force_fd, "force the finite-difference Jacobian");
  probe_cmd->add_flag("--dump-constraints", probe_args.dump_constraints_flag,
                      "write the identity-point constraint matrices as CSV");

  CLI::App* experiment_cmd = app.add_subcommand("experiment", "run a Monte Carlo sweep");
  add_override_options(*experiment_cmd, global);
  experiment_cmd
      ->add_option("kind", experiment_kind, "hos | sos | tradeoff-sos | tradeoff-hos")
      ->required()
      ->check(CLI::IsMember({"hos", "sos", "tradeoff-sos", "tradeoff-hos"}));

  CLI::App* separate_cmd =
      app.add_subcommand("separate", "run one separation sanity check and print the API");
  add_override_options(*separate_cmd, global);
  separate_cmd->add_option("which", separate_args.which, "jade | sobi")
      ->required()
      ->check(CLI::IsMember({"jade", "sobi"}));
  separate_cmd->add_option("--lags", separate_args.lags, "lag count for sobi");
  separate_cmd->add_option("--p", separate_args.p, "source shape for jade");

  CLI::App* selftest_cmd =
      app.add_subcommand("selftest", "run the population-mode oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (probe_cmd->parsed()) {
      return cmd_probe(global, probe_args);
    }
    if (experiment_cmd->parsed()) {
      return cmd_experiment(global, experiment_kind);
    }
    if (separate_cmd->parsed()) {
      return cmd_separate(global, separate_args);
    }
    if (selftest_cmd->parsed()) {
      return cmd_selftest();
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
