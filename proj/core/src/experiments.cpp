#include "stabprobe/experiments.hpp"

#include "stabprobe/separation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stabprobe {

namespace {

// Distinct sweep identifiers keep cell seeds disjoint across experiments.
enum : std::uint64_t {
  kSweepHos = 1,
  kSweepSos = 2,
  kSweepTradeoffSos = 3,
  kSweepTradeoffHos = 4,
};

std::uint64_t cell_seed(std::uint64_t base, std::uint64_t sweep, std::uint64_t cell) {
  return mix64(mix64(base ^ (sweep * 0x9E3779B97F4A7C15ull)) + cell);
}

std::string format_param(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(count, worker_count());
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) {
          return;
        }
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
  // Deterministic propagation: the lowest failing index wins.
  for (int i = 0; i < count; ++i) {
    if (errors[i]) {
      std::rethrow_exception(errors[i]);
    }
  }
}

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
  }
  return sum / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs, double mean) {
  double sum = 0.0;
  for (double x : xs) {
    sum += (x - mean) * (x - mean);
  }
  return std::sqrt(sum / static_cast<double>(xs.size()));
}

GridCell aggregate_cell(const std::vector<TrialRecord>& records) {
  GridCell cell;
  cell.trials = static_cast<int>(records.size());
  std::vector<double> probes;
  std::vector<double> apis;
  for (const TrialRecord& r : records) {
    probes.push_back(r.probe);
    if (r.api) {
      apis.push_back(*r.api);
    }
  }
  cell.probe_mean = mean_of(probes);
  cell.probe_std = std_of(probes, cell.probe_mean);
  if (!apis.empty()) {
    cell.api_mean = mean_of(apis);
    cell.api_std = std_of(apis, *cell.api_mean);
  }
  return cell;
}

// Exact lagged covariances of unit-variance AR(1) sources: R(tau) = diag(a_i^tau).
std::vector<Mat> population_ar1_covs(const std::vector<double>& ar, int lag_count) {
  std::vector<Mat> r_list;
  const int n = static_cast<int>(ar.size());
  for (int tau = 1; tau <= lag_count; ++tau) {
    Vec d(n);
    for (int i = 0; i < n; ++i) {
      d[i] = std::pow(ar[i], tau);
    }
    r_list.push_back(d.asDiagonal());
  }
  return r_list;
}

std::vector<int> lag_tags(int lag_count) {
  std::vector<int> tags(lag_count);
  for (int i = 0; i < lag_count; ++i) {
    tags[i] = i + 1;
  }
  return tags;
}

// Separation sanity value: mix through a seeded random rotation, separate,
// and score the global matrix.  The probe itself always sits at H0 = I.
double api_for_trial(const SignalBlock& sources, RngSeed seed, bool hos_route, int lag_count) {
  const Mat h = random_orthogonal(sources.channels(), seed);
  const SignalBlock x = mix(h, sources);
  const Mat w = hos_route ? jade_separate(x) : sobi_separate(x, lag_count);
  return amari_index(w * h);
}

struct CellTask {
  std::string label;
  std::function<TrialOutcome(RngSeed)> task;
};

void run_cells(GridResult& grid, const ExperimentConfig& cfg, std::uint64_t sweep_id,
               const std::vector<CellTask>& cells, int trials) {
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    MonteCarloResult r;
    try {
      r = monte_carlo(cells[ci].task, trials, cell_seed(cfg.base_seed, sweep_id, ci),
                      cells[ci].label);
    } catch (const std::exception& e) {
      throw std::runtime_error("cell " + cells[ci].label + ": " + e.what());
    }
    grid.cells.push_back(aggregate_cell(r.records));
    grid.records.insert(grid.records.end(), r.records.begin(), r.records.end());
  }
}

}  // namespace

int worker_count() {
  const char* env = std::getenv("STABPROBE_THREADS");
  if (env != nullptr) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<int>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 2) {
    throw std::invalid_argument("config: n must be at least 2");
  }
  if (cfg.samples < 2) {
    throw std::invalid_argument("config: T must be at least 2");
  }
  if (cfg.trials < 1) {
    throw std::invalid_argument("config: trials must be at least 1");
  }
  if (cfg.p_grid.empty() || cfg.lag_grid.empty() || cfg.k_grid.empty()) {
    throw std::invalid_argument("config: grids must be non-empty");
  }
  if (!(cfg.epsilon > 0.0)) {
    throw std::invalid_argument("config: epsilon must be positive");
  }
  if (cfg.delta < 0.0) {
    throw std::invalid_argument("config: delta must be non-negative");
  }
  if (!(cfg.fd_step > 0.0)) {
    throw std::invalid_argument("config: h must be positive");
  }
  for (double p : cfg.p_grid) {
    if (!(p > 0.0)) {
      throw std::invalid_argument("config: p grid values must be positive");
    }
  }
  for (int lag : cfg.lag_grid) {
    if (lag < 1 || lag >= cfg.samples) {
      throw std::invalid_argument("config: L grid values must lie in [1, T)");
    }
  }
  const int k_full = cfg.n * (cfg.n + 1) / 2;
  for (int k : cfg.k_grid) {
    if (k < 1 || k > k_full) {
      throw std::invalid_argument("config: K grid values must lie in [1, n(n+1)/2]");
    }
  }
  if (static_cast<int>(cfg.ar.size()) != cfg.n) {
    throw std::invalid_argument("config: need one AR coefficient per channel");
  }
  for (double a : cfg.ar) {
    if (std::abs(a) >= 1.0) {
      throw std::invalid_argument("config: AR coefficients must satisfy |a| < 1");
    }
  }
}

MonteCarloResult monte_carlo(const std::function<TrialOutcome(RngSeed)>& task, int trials,
                             std::uint64_t base_seed, const std::string& param_label) {
  if (trials < 1) {
    throw std::invalid_argument("monte_carlo: trials must be at least 1");
  }
  MonteCarloResult result;
  result.records.resize(trials);
  std::vector<std::string> failures(trials);
  parallel_for(trials, [&](int i) {
    const auto start = std::chrono::steady_clock::now();
    TrialOutcome out;
    try {
      out = task(RngSeed{base_seed, static_cast<std::uint64_t>(i)});
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(i) + ": " + e.what());
    }
    if (!std::isfinite(out.probe) || out.probe < 0.0) {
      throw std::runtime_error("trial " + std::to_string(i) + ": non-finite or negative probe");
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    TrialRecord& rec = result.records[i];
    rec.param = param_label;
    rec.trial = i;
    rec.probe = out.probe;
    rec.api = out.api;
    rec.ms = std::chrono::duration<double, std::milli>(elapsed).count();
  });

  std::vector<double> probes;
  probes.reserve(trials);
  for (const TrialRecord& r : result.records) {
    probes.push_back(r.probe);
  }
  result.mean = mean_of(probes);
  result.stddev = std_of(probes, result.mean);
  return result;
}

GridResult run_hos_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const SkewBasis basis = skew_basis(cfg.n);
  GridResult grid;
  grid.col_values = cfg.p_grid;

  std::vector<CellTask> cells;
  for (double p : cfg.p_grid) {
    if (cfg.mode == EvalMode::population) {
      cells.push_back({format_param(p), [=, &basis](RngSeed) {
                         const auto ev = ObservationEvaluator::population_hos(
                             Vec::Constant(cfg.n, gg_excess_kurtosis(p)));
                         const JacobianReport rep = probe(
                             ev, basis, JacobianMode::finite_difference, cfg.fd_step,
                             cfg.kernel_tol);
                         return TrialOutcome{rep.probe, std::nullopt};
                       }});
      continue;
    }
    cells.push_back({format_param(p), [=, &basis](RngSeed seed) {
                       SourceSpec spec;
                       spec.kind = SourceKind::iid_gg;
                       spec.shape = p;
                       const SignalBlock s = generate_sources(spec, cfg.n, cfg.samples, seed);
                       const Whitener wh = fit_whitener(s);  // H0 = I: x = s
                       const auto ev = ObservationEvaluator::sample_hos(wh.apply(s));
                       const JacobianReport rep = probe(
                           ev, basis, JacobianMode::finite_difference, cfg.fd_step,
                           cfg.kernel_tol);
                       TrialOutcome out{rep.probe, std::nullopt};
                       if (cfg.report_api) {
                         out.api = api_for_trial(s, seed, true, 0);
                       }
                       return out;
                     }});
  }
  run_cells(grid, cfg, kSweepHos, cells, cfg.trials);
  return grid;
}

GridResult run_sos_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const SkewBasis basis = skew_basis(cfg.n);
  GridResult grid;
  grid.col_values.assign(cfg.lag_grid.begin(), cfg.lag_grid.end());

  std::vector<CellTask> cells;
  for (int lags : cfg.lag_grid) {
    if (cfg.mode == EvalMode::population) {
      cells.push_back({std::to_string(lags), [=, &basis](RngSeed) {
                         const auto ev = ObservationEvaluator::population_sos(
                             population_ar1_covs(cfg.ar, lags), lag_tags(lags), cfg.symmetrize);
                         const JacobianReport rep =
                             probe(ev, basis, JacobianMode::analytic_sos, cfg.fd_step,
                                   cfg.kernel_tol);
                         return TrialOutcome{rep.probe, std::nullopt};
                       }});
      continue;
    }
    cells.push_back({std::to_string(lags), [=, &basis](RngSeed seed) {
                       SourceSpec spec;
                       spec.kind = SourceKind::ar1_gaussian;
                       spec.ar = cfg.ar;
                       const SignalBlock s = generate_sources(spec, cfg.n, cfg.samples, seed);
                       const Whitener wh = fit_whitener(s);
                       const auto ev = ObservationEvaluator::sample_sos(wh.apply(s), lags,
                                                                        cfg.symmetrize);
                       const JacobianReport rep =
                           probe(ev, basis, JacobianMode::analytic_sos, cfg.fd_step,
                                 cfg.kernel_tol);
                       TrialOutcome out{rep.probe, std::nullopt};
                       if (cfg.report_api) {
                         out.api = api_for_trial(s, seed, false, lags);
                       }
                       return out;
                     }});
  }
  run_cells(grid, cfg, kSweepSos, cells, cfg.trials);
  return grid;
}

GridResult run_tradeoff_sos(const ExperimentConfig& cfg) {
  validate(cfg);
  const SkewBasis basis = skew_basis(cfg.n);
  GridResult grid;
  grid.row_values = cfg.p_grid;
  grid.col_values.assign(cfg.lag_grid.begin(), cfg.lag_grid.end());

  std::vector<CellTask> cells;
  for (double p : cfg.p_grid) {
    for (int lags : cfg.lag_grid) {
      const std::string label = format_param(p) + ":" + std::to_string(lags);
      if (cfg.mode == EvalMode::population) {
        // Second-order structure of AR(1) does not depend on the innovation
        // shape, so population cells are p-invariant by construction.
        cells.push_back({label, [=, &basis](RngSeed) {
                           const auto ev = ObservationEvaluator::population_sos(
                               population_ar1_covs(cfg.ar, lags), lag_tags(lags),
                               cfg.symmetrize);
                           const JacobianReport rep =
                               probe(ev, basis, JacobianMode::analytic_sos, cfg.fd_step,
                                     cfg.kernel_tol);
                           return TrialOutcome{rep.probe, std::nullopt};
                         }});
        continue;
      }
      cells.push_back({label, [=, &basis](RngSeed seed) {
                         SourceSpec spec;
                         spec.kind = SourceKind::ar1_gg;
                         spec.shape = p;
                         spec.ar = cfg.ar;
                         const SignalBlock s = generate_sources(spec, cfg.n, cfg.samples, seed);
                         const Whitener wh = fit_whitener(s);
                         const auto ev = ObservationEvaluator::sample_sos(wh.apply(s), lags,
                                                                          cfg.symmetrize);
                         const JacobianReport rep =
                             probe(ev, basis, JacobianMode::analytic_sos, cfg.fd_step,
                                   cfg.kernel_tol);
                         return TrialOutcome{rep.probe, std::nullopt};
                       }});
    }
  }
  run_cells(grid, cfg, kSweepTradeoffSos, cells, cfg.trials);

  std::vector<double> means;
  for (const GridCell& c : grid.cells) {
    means.push_back(c.probe_mean);
  }
  grid.frontier = frontier_first_crossing(cfg.lag_grid, means, grid.rows(), cfg.epsilon);
  grid.iso_band = iso_band_mask(means, cfg.epsilon, cfg.delta);
  return grid;
}

GridResult run_tradeoff_hos(const ExperimentConfig& cfg) {
  validate(cfg);
  const SkewBasis basis = skew_basis(cfg.n);
  GridResult grid;
  grid.row_values = cfg.p_grid;
  grid.col_values.assign(cfg.k_grid.begin(), cfg.k_grid.end());

  std::vector<CellTask> cells;
  for (double p : cfg.p_grid) {
    for (int keep : cfg.k_grid) {
      const std::string label = format_param(p) + ":" + std::to_string(keep);
      if (cfg.mode == EvalMode::population) {
        cells.push_back({label, [=, &basis](RngSeed) {
                           const auto ev = ObservationEvaluator::population_hos(
                               Vec::Constant(cfg.n, gg_excess_kurtosis(p)), keep);
                           const JacobianReport rep = probe(
                               ev, basis, JacobianMode::finite_difference, cfg.fd_step,
                               cfg.kernel_tol);
                           return TrialOutcome{rep.probe, std::nullopt};
                         }});
        continue;
      }
      cells.push_back({label, [=, &basis](RngSeed seed) {
                         SourceSpec spec;
                         spec.kind = SourceKind::iid_gg;
                         spec.shape = p;
                         const SignalBlock s = generate_sources(spec, cfg.n, cfg.samples, seed);
                         const Whitener wh = fit_whitener(s);
                         const auto ev = ObservationEvaluator::sample_hos(wh.apply(s), keep);
                         const JacobianReport rep = probe(
                             ev, basis, JacobianMode::finite_difference, cfg.fd_step,
                             cfg.kernel_tol);
                         return TrialOutcome{rep.probe, std::nullopt};
                       }});
    }
  }
  run_cells(grid, cfg, kSweepTradeoffHos, cells, cfg.trials);

  std::vector<double> means;
  for (const GridCell& c : grid.cells) {
    means.push_back(c.probe_mean);
  }
  grid.frontier = frontier_first_crossing(cfg.k_grid, means, grid.rows(), cfg.epsilon);
  grid.iso_band = iso_band_mask(means, cfg.epsilon, cfg.delta);
  return grid;
}

std::vector<std::optional<int>> frontier_first_crossing(const std::vector<int>& col_values,
                                                        const std::vector<double>& means,
                                                        std::size_t rows, double epsilon) {
  const std::size_t cols = col_values.size();
  if (means.size() != rows * cols) {
    throw std::invalid_argument("frontier_first_crossing: grid size mismatch");
  }
  std::vector<std::optional<int>> frontier(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (means[r * cols + c] >= epsilon) {
        frontier[r] = col_values[c];
        break;
      }
    }
  }
  return frontier;
}

std::vector<bool> iso_band_mask(const std::vector<double>& means, double epsilon, double delta) {
  std::vector<bool> mask(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    mask[i] = std::abs(means[i] - epsilon) <= delta;
  }
  return mask;
}

}  // namespace stabprobe
