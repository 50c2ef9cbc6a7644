#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>

#include "config.hpp"
#include "hagedorn/oracle.hpp"
#include "output.hpp"

namespace hagedorn::runner {

struct RunOptions {
  std::filesystem::path out = "out";
  int jobs = 1;
  bool timing = false;
};

/// Everything one hbar of a propagate-style run produces.
struct Propagation {
  double hbar = 0.0;
  Trajectory traj;
  CoefficientHierarchy hierarchy;
  TruncationPlan plan;
  std::vector<double> profile;
  /// Hierarchy output index of each requested time.
  std::vector<std::size_t> index;
  std::vector<double> times;
  std::optional<Grid> grid;
  std::vector<CVector> approx;
  std::vector<CVector> oracle;
  int J = 0;
  std::optional<double> truncation_tail;
  double wall_ms = 0.0;
};

/// Classical flow, hierarchy, assembly and (for d <= 2 with the oracle enabled)
/// the split-operator reference at the requested times.
Propagation propagate_one(const RunConfig& cfg, double hbar, double T, const std::vector<double>& times,
                          std::optional<int> forced_l = std::nullopt);

/// Runs f(0..n-1) on up to `jobs` threads; the first failure in index order is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f);

CsvTable run_propagate(const RunConfig& cfg, const RunOptions& opt, std::ostream& log);
CsvTable run_scatter(const RunConfig& cfg, const RunOptions& opt, std::ostream& log);
CsvTable run_ehrenfest(const RunConfig& cfg, const RunOptions& opt, std::ostream& log);
CsvTable run_localize(const RunConfig& cfg, const RunOptions& opt, std::ostream& log);

}  // namespace hagedorn::runner
