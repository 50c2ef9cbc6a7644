#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "hagedorn/grid.hpp"
#include "hagedorn/potential.hpp"

namespace hagedorn {

struct OracleOptions {
  /// Boundary-band mass above which the periodic images are considered to interact.
  double leakage_threshold = 1e-10;
  double boundary_band = 0.05;
  /// 2: Strang splitting. 4: triple-jump composition of Strang steps.
  int order = 2;
  /// Leakage is checked every this many steps and at the end.
  long check_every = 2000;
};

/// Split-operator Fourier propagator for i hbar dpsi/dt = -(hbar^2/2) Lap psi + V psi.
class SplitOperator {
 public:
  SplitOperator(const Grid& grid, const PotentialModel& pot, double hbar, OracleOptions options = {});
  ~SplitOperator();
  SplitOperator(const SplitOperator&) = delete;
  SplitOperator& operator=(const SplitOperator&) = delete;

  /// Propagates psi in place by `duration`, in steps no longer than the grid's dt.
  void advance(CVector& psi, double duration);

  /// dt * E_max / hbar, with E_max the largest kinetic energy carrying relative
  /// spectral weight above 1e-14 in psi.
  double cfl_number(const CVector& psi) const;

  long steps_taken() const noexcept { return steps_; }
  const Grid& grid() const noexcept { return grid_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const Grid& grid_;
  long steps_ = 0;
};

/// psi at each requested time (non-decreasing, starting from t = 0).
std::vector<CVector> propagate(const Grid& grid, const PotentialModel& pot, const CVector& psi0,
                               double hbar, const std::vector<double>& times,
                               const OracleOptions& options = {});

/// psi at t_end.
CVector propagate(const Grid& grid, const PotentialModel& pot, const CVector& psi0, double hbar,
                  double t_end, const OracleOptions& options = {});

struct L2Error {
  double raw = 0.0;
  /// min over theta of ||a - e^{i theta} b||.
  double phase_optimized = 0.0;
};

L2Error l2_error(const CVector& a, const CVector& b, const Grid& grid);

/// H psi evaluated spectrally.
CVector apply_hamiltonian(const Grid& grid, const PotentialModel& pot, double hbar,
                          const CVector& psi);

/// Binary snapshot: one JSON header line, then interleaved little-endian doubles.
void write_snapshot(const std::filesystem::path& path, const Grid& grid, double hbar, double t,
                    const CVector& psi);

struct Snapshot {
  GridSpec spec;
  double hbar = 0.0;
  double t = 0.0;
  CVector psi;
};

Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace hagedorn
