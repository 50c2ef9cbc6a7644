#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hagedorn/classical_flow.hpp"
#include "hagedorn/wavepacket_basis.hpp"

namespace hagedorn {

/// out += scale * K_k in, with K_k = sum_{|m|=k} (D^m V(a) / m!) X^m and
/// X_i the position operator in ladder form. `in` and `out` are laid out over
/// `table`; `in` has support n_in and `out` needs room for n_in + k.
void apply_Kk_add(const MultiIndexTable& table, const TaylorCoefficients& taylor, const CMatrix& A, int k, int n_in,
                  std::span<const Complex> in, Complex scale, std::span<Complex> out,
                  std::vector<CVector>& scratch);

/// K_k c as a coefficient vector with support c.support() + k.
BasisCoefficients apply_Kk(const TaylorCoefficients& taylor, const WavepacketFrame& frame, int k,
                           const BasisCoefficients& c);

struct HierarchyOptions {
  /// Number of orders c_0 .. c_{l-1} kept.
  int l = 1;
  /// Also integrate the parts c_k^[p], 1 <= p <= k.
  bool p_resolved = false;
  double tol = 1e-12;
  /// Times at which the coefficients are recorded; empty means the trajectory end.
  std::vector<double> output_times;
  /// Largest number of complex unknowns accepted before SupportOverflow.
  std::size_t budget = 20'000'000;
  long max_steps = 2'000'000;
};

/// Orders c_k(t) of the coefficient expansion c = sum_k hbar^(k/2) c_k, sampled
/// at the requested times. Every order is stored over the full table (support
/// J + 3(l-1)) so that the sparsity pattern can be checked rather than assumed.
class CoefficientHierarchy {
 public:
  int dim() const noexcept { return table_->dim(); }
  int J() const noexcept { return J_; }
  int l() const noexcept { return l_; }
  bool p_resolved() const noexcept { return p_resolved_; }
  const TablePtr& table_ptr() const noexcept { return table_; }
  const MultiIndexTable& table() const noexcept { return *table_; }

  std::size_t num_times() const noexcept { return times_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  double t_begin() const noexcept { return t0_; }
  /// Classical state integrated alongside the coefficients.
  const ClassicalState& state(std::size_t i) const { return states_[i]; }

  /// Full-length vector of c_k at output time i.
  const CVector& c(std::size_t i, int k) const;
  /// c_k at time i restricted to its nominal support J + 3k.
  BasisCoefficients coefficients(std::size_t i, int k) const;
  /// c_k^[p] at time i (1 <= p <= k), full length.
  const CVector& part(std::size_t i, int k, int p) const;

  double norm(std::size_t i, int k) const { return c(i, k).norm(); }
  /// sup over the recorded times of ||c_k||.
  double sup_norm(int k) const;

  /// Largest |c_{k,j}| with |j| > J + 3k over all times and orders (exactly 0 when sound).
  double sparsity_violation() const noexcept { return sparsity_violation_; }
  /// Same for the parts, against the support J + k + 2p.
  double part_sparsity_violation() const noexcept { return part_sparsity_violation_; }
  /// Largest |a| or |eta| gap between the joint classical state and the supplied trajectory.
  double trajectory_deviation() const noexcept { return trajectory_deviation_; }
  long accepted_steps() const noexcept { return steps_; }

 private:
  friend CoefficientHierarchy integrate_hierarchy(const Trajectory&, const PotentialModel&,
                                                  const BasisCoefficients&,
                                                  const HierarchyOptions&);
  std::size_t part_slot(int k, int p) const;

  TablePtr table_;
  int J_ = 0;
  int l_ = 1;
  bool p_resolved_ = false;
  double t0_ = 0.0;
  std::vector<double> times_;
  std::vector<ClassicalState> states_;
  std::vector<std::vector<CVector>> c_;
  std::vector<std::vector<CVector>> parts_;
  double sparsity_violation_ = 0.0;
  double part_sparsity_violation_ = 0.0;
  double trajectory_deviation_ = 0.0;
  long steps_ = 0;
};

/// Integrates the classical system together with the cascade
///   i dc_n/dt = sum_{k<n} K_{n+2-k}(t) c_k
/// from the trajectory start, with c_0 = c0_init and c_k = 0 for k >= 1.
CoefficientHierarchy integrate_hierarchy(const Trajectory& traj, const PotentialModel& pot,
                                         const BasisCoefficients& c0_init,
                                         const HierarchyOptions& options);

struct BoundConstants {
  double D1 = 1.0;
  double D2 = 1.0;
  double D3 = 1.0;
  double D5 = 1.0;
  double delta = 1.0;
  double T = 0.0;
  int n_probe = 0;
  /// True when the probe covers every non-zero derivative (polynomial potentials).
  bool probe_exhaustive = false;
};

/// Bound constants sampled on trajectory nodes plus `refine` interior points per step.
BoundConstants bound_constants(const Trajectory& traj, const PotentialModel& pot, double delta,
                               int n_probe, int refine = 3);

/// Default derivative probe order: the degree for polynomials, 4 l + 8 otherwise.
int default_probe_order(const PotentialModel& pot, int l);

/// log of ((J+3k)!/J!)^(1/2) D2^k D3^k / k! (1 + D1 D2^2 t)^k.
double log_order_bound(const BoundConstants& b, int J, int k, double t);
/// log of C(k-1,p-1) D1^p D2^(k+2p) D3^k ((J+k+2p)!/J!)^(1/2) t^p / p!.
double log_part_bound(const BoundConstants& b, int J, int k, int p, double t);

struct BoundReport {
  /// Largest observed ratio norm / bound; <= 1 means every sample obeys the bound.
  double worst_ratio = 0.0;
  int worst_k = -1;
  int worst_p = -1;
  double worst_t = 0.0;
  std::size_t checks = 0;
  /// Largest ||sum_p c_k^[p] - c_k|| / max(1, ||c_k||); only for p-resolved runs.
  double telescoping = 0.0;
  bool holds() const noexcept { return worst_ratio <= 1.0; }
};

/// Checks ||c_k(t)|| against the order bound for every recorded k and t.
BoundReport check_order_bounds(const CoefficientHierarchy& h, const BoundConstants& bounds);

/// Checks every part c_k^[p], k <= k_max, against its bound and the telescoping
/// identity. Throws NotPResolved when the parts were not integrated.
BoundReport verify_p_decomposition(const CoefficientHierarchy& h, const BoundConstants& bounds,
                                   int k_max = 1 << 20);

}  // namespace hagedorn
