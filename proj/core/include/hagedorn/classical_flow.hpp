#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "hagedorn/ode.hpp"
#include "hagedorn/potential.hpp"

namespace hagedorn {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Classical data carried by a semiclassical wavepacket at time t.
struct ClassicalState {
  double t = 0.0;
  RVector a;
  RVector eta;
  CMatrix A;
  CMatrix B;
  double S = 0.0;
  /// Continuous branch of arg det A.
  double detA_arg = 0.0;

  int dim() const { return static_cast<int>(a.size()); }

  /// Standard initial data A = B = I, arg det A = 0.
  static ClassicalState coherent(const RVector& a, const RVector& eta, double t = 0.0);
};

struct Cond1Residuals {
  double symmetry = 0.0;       // ||A^T B - B^T A||_F / max(1, ||A|| ||B||)
  double normalization = 0.0;  // ||A^* B + B^* A - 2I||_F / max(1, ||A|| ||B||)
  double max() const { return symmetry > normalization ? symmetry : normalization; }
};

Cond1Residuals cond1_residuals(const CMatrix& A, const CMatrix& B);

/// Spectral norm.
double operator_norm(const CMatrix& M);

/// Principal argument of det A moved onto the branch closest to `reference`.
double unwrap_detA_arg(const CMatrix& A, double reference);

struct FlowOptions {
  double tol = 1e-11;
  /// Allowed cond1 drift is drift_factor * tol (plus a rounding floor) per unit of
  /// elapsed time, never less than one unit.
  double drift_factor = 10.0;
  /// Largest change of arg det A accepted in a single step.
  double max_phase_step = 1.5707963267948966;
  long max_steps = 5'000'000;
};

/// Dense-output classical trajectory. Nodes are accepted integrator steps.
class Trajectory {
 public:
  Trajectory() = default;

  const std::vector<ClassicalState>& nodes() const noexcept { return nodes_; }
  const ClassicalState& front() const { return nodes_.front(); }
  const ClassicalState& back() const { return nodes_.back(); }
  double t_begin() const { return nodes_.front().t; }
  double t_end() const { return nodes_.back().t; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double tolerance() const noexcept { return tol_; }

  /// Interpolated state; exact at stored nodes.
  ClassicalState state_at(double t) const;

  double max_cond1_residual() const;

 private:
  friend Trajectory integrate_flow(const PotentialModel&, const ClassicalState&, double,
                                   const FlowOptions&);
  std::vector<ClassicalState> nodes_;
  std::vector<DenseSegment> segments_;
  double tol_ = 0.0;
};

/// Packs (a, eta, A, B, S) into a real vector; the layout used by every joint integration.
Eigen::VectorXd pack_classical(const ClassicalState& s);
void unpack_classical(const Eigen::VectorXd& y, int dim, ClassicalState& s);
Eigen::Index classical_size(int dim);

/// Right-hand side of the classical system, writing into the first
/// classical_size(d) slots of dydt. Taylor data must reach order 2.
void classical_rhs(const TaylorCoefficients& taylor, const Eigen::VectorXd& y, int dim,
                   Eigen::VectorXd& dydt);

/// Integrates the classical and linearized flow from init.t to t_end.
Trajectory integrate_flow(const PotentialModel& pot, const ClassicalState& init, double t_end,
                          const FlowOptions& options = {});

/// Max over sampled times of ||A(t) - da/da0 A0 - i da/deta0 B0|| / max(1, ||A(t)||)
/// with Jacobians from central differences of the (a, eta) flow.
double linearization_check(const PotentialModel& pot, const ClassicalState& init, double t_end,
                           double eps, int samples = 8, double tol = 1e-13);

struct LyapunovFit {
  enum class Status { Exponential, NotGrowing, PolynomialGrowth };
  double N = 1.0;
  double lambda = 0.0;
  double r_squared = 0.0;
  /// R^2 of log||A|| against log t, for comparison with the exponential fit.
  double r_squared_power = 0.0;
  Status status = Status::NotGrowing;
};

/// Least-squares fit log||A(t)|| = log N + lambda t over the second half of the trajectory.
LyapunovFit lyapunov_estimate(const Trajectory& traj, int samples = 400);

/// Throws FitDegenerate unless the fit found exponential growth.
void require_exponential(const LyapunovFit& fit);

}  // namespace hagedorn
