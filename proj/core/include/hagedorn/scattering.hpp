#pragma once

#include <string>
#include <vector>

#include "hagedorn/hierarchy.hpp"

namespace hagedorn {

enum class Side { Past, Future };

std::string to_string(Side side);

/// Free asymptote a(t) ~ a_pm + eta_pm t, A(t) ~ A_pm + i t B_pm, S(t) ~ S_pm + t eta_pm^2 / 2.
struct AsymptoticData {
  Side side = Side::Future;
  RVector a;
  RVector eta;
  CMatrix A;
  CMatrix B;
  double S = 0.0;
  double convergence_residual = 0.0;
  /// |t| at which the extraction converged.
  double horizon = 0.0;
};

struct ScatterOptions {
  /// Convergence target for the coefficient limits.
  double tol = 1e-6;
  /// Convergence target for the classical asymptotes.
  double classical_tol = 1e-8;
  double flow_tol = 1e-12;
  double hierarchy_tol = 1e-12;
  /// First checkpoint distance past closest approach; later ones double.
  double first_check = 8.0;
  double t_max = 1e6;
};

/// Extracts the asymptote on the given side by integrating to |t| = 8, 16, 32, ...
/// until two successive extractions agree within options.classical_tol.
AsymptoticData classical_asymptotics(const PotentialModel& pot, const ClassicalState& init,
                                     Side side, const ScatterOptions& options = {});

/// State on the free incoming (or outgoing) asymptote at time t.
ClassicalState free_state_at(const AsymptoticData& data, double t);

/// Time of closest approach to the origin along the free asymptote.
double closest_approach_time(const AsymptoticData& data);

struct CoefficientLimits {
  std::vector<CVector> c;  // c_k(+infinity), over `table`
  TablePtr table;
  int J = 0;
  AsymptoticData outgoing;
  double t_start = 0.0;
  double horizon = 0.0;
  /// max_k ||c_k(t_m) - c_k(t_{m-1})|| at the accepted checkpoint.
  double cauchy_residual = 0.0;
  /// A-posteriori bound on the remaining integral of the cascade.
  double tail_bound = 0.0;
  std::vector<double> checkpoints;
};

/// Integrates the cascade from the incoming asymptote with c_0 = c0, c_k = 0 (k >= 1)
/// until the Cauchy residual and the tail bound both fall below options.tol.
CoefficientLimits coefficient_limits(const PotentialModel& pot, const AsymptoticData& incoming,
                                     const BasisCoefficients& c0, int l,
                                     const ScatterOptions& options = {});

struct ScatteringResult {
  AsymptoticData incoming;
  AsymptoticData outgoing;
  CoefficientLimits limits;
  int l = 1;
  double hbar = 0.0;
  double g = 0.0;
  /// sum_{k<l} hbar^(k/2) c_k(+infinity), support J + 3(l-1).
  BasisCoefficients out_coefficients{MultiIndexTable::make(1, 0), 0};
  double unitarity_deviation = 0.0;
  /// Set when d < 3, outside the dimension range covered by the convergence proof.
  bool dimension_caveat = false;
};

ScatteringResult smatrix_apply(const PotentialModel& pot, const AsymptoticData& incoming,
                               const BasisCoefficients& c0, double hbar, double g,
                               const ScatterOptions& options = {});

}  // namespace hagedorn
