#include "hagedorn/classical_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

constexpr double kRoundingFloor = 1e-13;

double wrap_to_pi(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  x = std::fmod(x + std::numbers::pi, two_pi);
  if (x < 0) x += two_pi;
  return x - std::numbers::pi;
}

}  // namespace

ClassicalState ClassicalState::coherent(const RVector& a, const RVector& eta, double t) {
  require(a.size() == eta.size() && a.size() >= 1, "position/momentum dimension mismatch");
  ClassicalState s;
  s.t = t;
  s.a = a;
  s.eta = eta;
  s.A = CMatrix::Identity(a.size(), a.size());
  s.B = CMatrix::Identity(a.size(), a.size());
  return s;
}

double operator_norm(const CMatrix& M) {
  if (M.size() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<CMatrix> svd(M);
  return svd.singularValues()(0);
}

Cond1Residuals cond1_residuals(const CMatrix& A, const CMatrix& B) {
  const auto d = A.rows();
  const double scale = std::max(1.0, operator_norm(A) * operator_norm(B));
  Cond1Residuals r;
  r.symmetry = (A.transpose() * B - B.transpose() * A).norm() / scale;
  r.normalization =
      (A.adjoint() * B + B.adjoint() * A - 2.0 * CMatrix::Identity(d, d)).norm() / scale;
  return r;
}

double unwrap_detA_arg(const CMatrix& A, double reference) {
  const Complex det = A.determinant();
  if (std::abs(det) == 0.0) raise(ErrorCode::SingularA, "det A vanished");
  const double principal = std::arg(det);
  return reference + wrap_to_pi(principal - reference);
}

Eigen::Index classical_size(int dim) { return 2 * dim + 4 * dim * dim + 1; }

Eigen::VectorXd pack_classical(const ClassicalState& s) {
  const int d = s.dim();
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  Eigen::VectorXd y(classical_size(d));
  y.segment(0, d) = s.a;
  y.segment(d, d) = s.eta;
  Eigen::Map<Eigen::MatrixXd>(y.data() + 2 * d, d, d) = s.A.real();
  Eigen::Map<Eigen::MatrixXd>(y.data() + 2 * d + dd, d, d) = s.A.imag();
  Eigen::Map<Eigen::MatrixXd>(y.data() + 2 * d + 2 * dd, d, d) = s.B.real();
  Eigen::Map<Eigen::MatrixXd>(y.data() + 2 * d + 3 * dd, d, d) = s.B.imag();
  y[2 * d + 4 * dd] = s.S;
  return y;
}

void unpack_classical(const Eigen::VectorXd& y, int d, ClassicalState& s) {
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  s.a = y.segment(0, d);
  s.eta = y.segment(d, d);
  using MapC = Eigen::Map<const Eigen::MatrixXd>;
  s.A = MapC(y.data() + 2 * d, d, d).cast<Complex>() +
        Complex(0, 1) * MapC(y.data() + 2 * d + dd, d, d).cast<Complex>();
  s.B = MapC(y.data() + 2 * d + 2 * dd, d, d).cast<Complex>() +
        Complex(0, 1) * MapC(y.data() + 2 * d + 3 * dd, d, d).cast<Complex>();
  s.S = y[2 * d + 4 * dd];
}

void classical_rhs(const TaylorCoefficients& taylor, const Eigen::VectorXd& y, int d,
                   Eigen::VectorXd& dydt) {
  const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
  const auto eta = y.segment(d, d);
  const RVector grad = taylor.gradient();
  const RMatrix hess = taylor.hessian();
  using MapC = Eigen::Map<const Eigen::MatrixXd>;
  using Map = Eigen::Map<Eigen::MatrixXd>;
  const MapC reA(y.data() + 2 * d, d, d), imA(y.data() + 2 * d + dd, d, d);
  const MapC reB(y.data() + 2 * d + 2 * dd, d, d), imB(y.data() + 2 * d + 3 * dd, d, d);

  dydt.segment(0, d) = eta;
  dydt.segment(d, d) = -grad;
  // dA/dt = i B
  Map(dydt.data() + 2 * d, d, d) = -imB;
  Map(dydt.data() + 2 * d + dd, d, d) = reB;
  // dB/dt = i V''(a) A
  Map(dydt.data() + 2 * d + 2 * dd, d, d) = -hess * imA;
  Map(dydt.data() + 2 * d + 3 * dd, d, d) = hess * reA;
  dydt[2 * d + 4 * dd] = 0.5 * eta.squaredNorm() - taylor.value();
}

ClassicalState Trajectory::state_at(double t) const {
  require(!nodes_.empty(), "empty trajectory");
  const bool forward = t_end() >= t_begin();
  const double lo = std::min(t_begin(), t_end()), hi = std::max(t_begin(), t_end());
  require(t >= lo - 1e-12 * std::max(1.0, std::abs(lo)) &&
              t <= hi + 1e-12 * std::max(1.0, std::abs(hi)),
          "time outside trajectory span");
  // Exact node hit.
  auto cmp = [forward](const ClassicalState& s, double v) { return forward ? s.t < v : s.t > v; };
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t, cmp);
  if (it != nodes_.end() && it->t == t) return *it;
  if (it == nodes_.begin()) return nodes_.front();
  if (it == nodes_.end()) return nodes_.back();
  const auto idx = static_cast<std::size_t>(it - nodes_.begin());
  const auto& seg = segments_[idx - 1];
  const auto& left = nodes_[idx - 1];
  const auto& right = nodes_[idx];
  ClassicalState s;
  s.t = t;
  unpack_classical(seg(t), left.dim(), s);
  const double w = (t - left.t) / (right.t - left.t);
  s.detA_arg = unwrap_detA_arg(s.A, (1.0 - w) * left.detA_arg + w * right.detA_arg);
  return s;
}

double Trajectory::max_cond1_residual() const {
  double m = 0.0;
  for (const auto& n : nodes_) m = std::max(m, cond1_residuals(n.A, n.B).max());
  return m;
}

Trajectory integrate_flow(const PotentialModel& pot, const ClassicalState& init, double t_end,
                          const FlowOptions& options) {
  const int d = init.dim();
  require(pot.dim() == d, "potential and initial state dimensions differ");
  require(init.A.rows() == d && init.A.cols() == d && init.B.rows() == d && init.B.cols() == d,
          "A and B must be d x d");
  const double allowed = options.drift_factor * options.tol + kRoundingFloor;
  const auto r0 = cond1_residuals(init.A, init.B);
  if (r0.max() > std::max(allowed, 1e-8)) {
    std::ostringstream os;
    os << "initial A, B violate the symplectic conditions (residual " << r0.max() << ")";
    raise(ErrorCode::Cond1Drift, os.str());
  }

  TaylorCoefficients taylor(MultiIndexTable::make(d, 2), 2);
  RVector a(d);
  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    a = y.segment(0, d);
    pot.taylor_coeffs_into(a, taylor);
    classical_rhs(taylor, y, d, dydt);
  };

  OdeOptions ode;
  ode.rtol = options.tol;
  ode.atol = options.tol;
  ode.max_steps = options.max_steps;
  DormandPrince45 solver(rhs, ode, /*dense_output=*/true);
  solver.reset(init.t, pack_classical(init));

  Trajectory traj;
  traj.tol_ = options.tol;
  ClassicalState first = init;
  first.detA_arg = unwrap_detA_arg(init.A, init.detA_arg);
  traj.nodes_.push_back(first);

  ClassicalState next;
  auto observer = [&](const StepView& step) {
    next.t = step.t1;
    unpack_classical(step.y1, d, next);
    const double arg = unwrap_detA_arg(next.A, traj.nodes_.back().detA_arg);
    if (std::abs(arg - traj.nodes_.back().detA_arg) > options.max_phase_step) return false;
    next.detA_arg = arg;
    const auto r = cond1_residuals(next.A, next.B);
    // Runge-Kutta drift accumulates roughly linearly, so the allowance grows with elapsed
    // time on top of whatever residual the initial data already carried.
    const double budget = r0.max() + allowed * std::max(1.0, std::abs(step.t1 - init.t));
    if (r.max() > budget) {
      std::ostringstream os;
      os << "symplectic residual " << r.max() << " exceeds " << budget << " at t=" << step.t1
         << "; tighten the integration tolerance";
      raise(ErrorCode::Cond1Drift, os.str());
    }
    if (!next.a.allFinite() || !next.eta.allFinite()) {
      raise(ErrorCode::StepSizeUnderflow, "classical flow blew up");
    }
    traj.nodes_.push_back(next);
    traj.segments_.push_back(*step.dense);
    return true;
  };
  solver.advance_to(t_end, observer);
  return traj;
}

double linearization_check(const PotentialModel& pot, const ClassicalState& init, double t_end,
                           double eps, int samples, double tol) {
  require(eps > 0.0 && samples >= 1, "linearization_check needs eps > 0 and samples >= 1");
  const int d = init.dim();
  FlowOptions opts;
  opts.tol = tol;
  opts.drift_factor = 1e6;  // only the (a, eta) flow matters for the perturbed runs
  const Trajectory base = integrate_flow(pot, init, t_end, opts);

  std::vector<Trajectory> plus_a, minus_a, plus_eta, minus_eta;
  for (int i = 0; i < d; ++i) {
    auto shifted = [&](bool momentum, double sign) {
      ClassicalState s = init;
      (momentum ? s.eta : s.a)[i] += sign * eps;
      return integrate_flow(pot, s, t_end, opts);
    };
    plus_a.push_back(shifted(false, 1.0));
    minus_a.push_back(shifted(false, -1.0));
    plus_eta.push_back(shifted(true, 1.0));
    minus_eta.push_back(shifted(true, -1.0));
  }

  double worst = 0.0;
  for (int s = 1; s <= samples; ++s) {
    const double t = init.t + (t_end - init.t) * s / samples;
    RMatrix jac_aa(d, d), jac_aeta(d, d);
    for (int i = 0; i < d; ++i) {
      jac_aa.col(i) = (plus_a[static_cast<std::size_t>(i)].state_at(t).a -
                       minus_a[static_cast<std::size_t>(i)].state_at(t).a) /
                      (2.0 * eps);
      jac_aeta.col(i) = (plus_eta[static_cast<std::size_t>(i)].state_at(t).a -
                         minus_eta[static_cast<std::size_t>(i)].state_at(t).a) /
                        (2.0 * eps);
    }
    const auto st = base.state_at(t);
    const CMatrix predicted =
        jac_aa.cast<Complex>() * init.A + Complex(0, 1) * jac_aeta.cast<Complex>() * init.B;
    worst = std::max(worst, (st.A - predicted).norm() / std::max(1.0, operator_norm(st.A)));
  }
  return worst;
}

LyapunovFit lyapunov_estimate(const Trajectory& traj, int samples) {
  require(traj.size() >= 2 && samples >= 4, "lyapunov_estimate needs a non-trivial trajectory");
  const double t0 = traj.t_begin(), t1 = traj.t_end();
  const double t_mid = 0.5 * (t0 + t1);
  std::vector<double> ts, ys, logts;
  for (int i = 0; i < samples; ++i) {
    const double t = t_mid + (t1 - t_mid) * i / (samples - 1);
    ts.push_back(t);
    ys.push_back(std::log(operator_norm(traj.state_at(t).A)));
    logts.push_back(std::log(std::max(std::abs(t - t0), 1e-12)));
  }
  auto fit = [&](const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
      syy += ys[i] * ys[i];
    }
    const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    const double slope = vx > 0 ? cxy / vx : 0.0;
    const double intercept = (sy - slope * sx) / n;
    const double r2 = (vx > 0 && vy > 1e-300) ? cxy * cxy / (vx * vy) : 0.0;
    return std::array<double, 3>{slope, intercept, r2};
  };
  const auto lin = fit(ts);
  const auto pw = fit(logts);

  LyapunovFit out;
  out.lambda = lin[0];
  out.N = std::exp(lin[1]);
  out.r_squared = lin[2];
  out.r_squared_power = pw[2];
  const double growth = out.lambda * (t1 - t_mid);
  if (growth <= 0.05) {
    out.status = LyapunovFit::Status::NotGrowing;
  } else if (out.r_squared_power > out.r_squared) {
    out.status = LyapunovFit::Status::PolynomialGrowth;
  } else {
    out.status = LyapunovFit::Status::Exponential;
  }
  return out;
}

void require_exponential(const LyapunovFit& fit) {
  if (fit.status == LyapunovFit::Status::Exponential) return;
  std::ostringstream os;
  os << "||A(t)|| fit is not exponential (lambda=" << fit.lambda << ", R^2=" << fit.r_squared
     << ", power-law R^2=" << fit.r_squared_power << ")";
  raise(ErrorCode::FitDegenerate, os.str());
}

}  // namespace hagedorn
