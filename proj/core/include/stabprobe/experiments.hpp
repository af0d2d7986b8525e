#pragma once

#include "stabprobe/probe.hpp"
#include "stabprobe/signal.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stabprobe {

enum class Preset { full, quick };
enum class EvalMode { sample, population };

struct ExperimentConfig {
  int n = 3;
  long samples = 100000;  // T
  int trials = 50;
  std::uint64_t base_seed = 42;
  std::vector<double> p_grid = {0.8, 1.0, 1.5, 2.0, 3.0};
  std::vector<int> lag_grid = {1, 2, 3, 4, 5, 6, 7};
  std::vector<int> k_grid = {1, 2, 3, 4, 5, 6};
  std::vector<double> ar = {0.2, 0.6, 0.9};
  double epsilon = 0.5;
  double delta = 0.05;
  double fd_step = kDefaultFdStep;
  double kernel_tol = kDefaultKernelTol;
  bool symmetrize = true;
  bool report_api = false;
  Preset preset = Preset::full;
  EvalMode mode = EvalMode::sample;
};

// Throws std::invalid_argument when grids are empty, trials < 1,
// epsilon <= 0, delta < 0, or AR coefficients are non-stationary.
void validate(const ExperimentConfig& cfg);

struct TrialOutcome {
  double probe = 0.0;
  std::optional<double> api;
};

struct TrialRecord {
  std::string param;
  int trial = 0;
  double probe = 0.0;
  std::optional<double> api;
  double ms = 0.0;
};

struct MonteCarloResult {
  double mean = 0.0;
  double stddev = 0.0;  // population formula
  std::vector<TrialRecord> records;
};

// Runs `task` for trial indices 0..trials-1, trial i drawing from stream i
// of base_seed.  Trials may execute concurrently (see worker_count); the
// aggregate is accumulated in trial order and is independent of the worker
// count.  A failing trial aborts with its index and cause.
MonteCarloResult monte_carlo(const std::function<TrialOutcome(RngSeed)>& task, int trials,
                             std::uint64_t base_seed, const std::string& param_label = {});

struct GridCell {
  double probe_mean = 0.0;
  double probe_std = 0.0;
  std::optional<double> api_mean;
  std::optional<double> api_std;
  int trials = 0;
};

// Aggregate over a 1-D sweep (row_values empty) or a (p x L/K) grid,
// cells stored row-major.
struct GridResult {
  std::vector<double> row_values;            // p grid for trade-offs
  std::vector<double> col_values;            // sweep parameter values
  std::vector<GridCell> cells;
  std::vector<std::optional<int>> frontier;  // per row, absent if never reached
  std::vector<bool> iso_band;                // per cell
  std::vector<TrialRecord> records;

  std::size_t rows() const { return row_values.empty() ? 1 : row_values.size(); }
  std::size_t cols() const { return col_values.size(); }
  const GridCell& cell(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
};

// Fig. 1: probe of the full cumulant family over the shape grid.
GridResult run_hos_sweep(const ExperimentConfig& cfg);

// Fig. 2: probe of the lagged-covariance family over the lag-count grid.
GridResult run_sos_sweep(const ExperimentConfig& cfg);

// Fig. 3: (p, L) grid with the L_min frontier at level epsilon.
GridResult run_tradeoff_sos(const ExperimentConfig& cfg);

// (p, K) grid with the K_min frontier and the |mean - epsilon| <= delta
// iso band.
GridResult run_tradeoff_hos(const ExperimentConfig& cfg);

// First value in `col_values` whose row mean reaches epsilon; absent when
// none does.  `means` is row-major with rows * col_values.size() entries.
std::vector<std::optional<int>> frontier_first_crossing(const std::vector<int>& col_values,
                                                        const std::vector<double>& means,
                                                        std::size_t rows, double epsilon);

std::vector<bool> iso_band_mask(const std::vector<double>& means, double epsilon, double delta);

// Worker cap from STABPROBE_THREADS (0 or unset = hardware concurrency).
int worker_count();

}  // namespace stabprobe
