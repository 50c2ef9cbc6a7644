#pragma once

#include <array>
#include <functional>
#include <limits>

#include <Eigen/Core>

namespace hagedorn {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// Optional per-component absolute tolerance; overrides `atol` when non-empty.
  Eigen::VectorXd atol_components;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 5'000'000;
};

/// Continuous extension of one accepted Dormand-Prince step (4th order,
/// exact at both endpoints).
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Eigen::VectorXd, 5> coeff;

  double t1() const { return t0 + h; }
  Eigen::VectorXd operator()(double t) const;
};

struct StepView {
  double t0;
  double t1;
  const Eigen::VectorXd& y0;
  const Eigen::VectorXd& y1;
  const DenseSegment* dense;  // null unless dense output was requested
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;
/// Return false to reject an otherwise accepted step; the step is retried at half size.
using StepObserver = std::function<bool(const StepView&)>;

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with PI step-size
/// control. Integration may run forward or backward in time.
class DormandPrince45 {
 public:
  DormandPrince45(OdeRhs rhs, OdeOptions options, bool dense_output = false);

  void reset(double t, Eigen::VectorXd y);

  /// Advance to t_target exactly, invoking the observer after every accepted step.
  void advance_to(double t_target, const StepObserver& observer = {});

  double t() const noexcept { return t_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  long accepted_steps() const noexcept { return accepted_; }
  long rejected_steps() const noexcept { return rejected_; }
  long rhs_evaluations() const noexcept { return evaluations_; }

 private:
  double error_norm(const Eigen::VectorXd& y_new) const;
  double atol(Eigen::Index i) const { return opt_.atol_components.size() ? opt_.atol_components[i] : opt_.atol; }
  double initial_step(double direction);

  OdeRhs rhs_;
  OdeOptions opt_;
  bool dense_;
  double t_ = 0.0;
  double h_ = 0.0;
  double err_old_ = 1e-4;
  Eigen::VectorXd y_;
  std::array<Eigen::VectorXd, 7> k_;
  Eigen::VectorXd stage_, y_new_, err_;
  bool have_k1_ = false;
  long accepted_ = 0;
  long rejected_ = 0;
  long evaluations_ = 0;
};

}  // namespace hagedorn
