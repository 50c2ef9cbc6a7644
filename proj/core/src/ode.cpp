#include "hagedorn/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output weights.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;

}  // namespace

Eigen::VectorXd DenseSegment::operator()(double t) const {
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  return coeff[0] +
         theta * (coeff[1] + theta1 * (coeff[2] + theta * (coeff[3] + theta1 * coeff[4])));
}

DormandPrince45::DormandPrince45(OdeRhs rhs, OdeOptions options, bool dense_output)
    : rhs_(std::move(rhs)), opt_(options), dense_(dense_output) {
  require(opt_.rtol > 0.0 && opt_.atol > 0.0, "ODE tolerances must be positive");
  require(opt_.atol_components.size() == 0 || (opt_.atol_components.array() > 0.0).all(),
          "per-component absolute tolerances must be positive");
}

void DormandPrince45::reset(double t, Eigen::VectorXd y) {
  t_ = t;
  y_ = std::move(y);
  const auto n = y_.size();
  require(opt_.atol_components.size() == 0 || opt_.atol_components.size() == n,
          "per-component tolerance has the wrong length");
  for (auto& k : k_) k.resize(n);
  stage_.resize(n);
  y_new_.resize(n);
  err_.resize(n);
  have_k1_ = false;
  h_ = 0.0;
  err_old_ = 1e-4;
}

double DormandPrince45::error_norm(const Eigen::VectorXd& y_new) const {
  const auto n = y_.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = atol(i) + opt_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
    const double r = err_[i] / sk;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double DormandPrince45::initial_step(double direction) {
  if (opt_.initial_step > 0.0) return direction * opt_.initial_step;
  // Hairer's starting-step heuristic.
  const auto n = y_.size();
  if (n == 0) return direction * 1e-2;
  auto scaled_norm = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = atol(i) + opt_.rtol * std::abs(y_[i]);
      s += (v[i] / sk) * (v[i] / sk);
    }
    return std::sqrt(s / static_cast<double>(n));
  };
  const double dnf = scaled_norm(k_[0]);
  const double dny = scaled_norm(y_);
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  h = std::min(h, opt_.max_step);
  stage_ = y_ + direction * h * k_[0];
  rhs_(t_ + direction * h, stage_, k_[1]);
  ++evaluations_;
  const double der2 = scaled_norm(k_[1] - k_[0]) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return direction * std::min({100.0 * h, h1, opt_.max_step});
}

void DormandPrince45::advance_to(double t_target, const StepObserver& observer) {
  if (t_target == t_) return;
  const double direction = t_target > t_ ? 1.0 : -1.0;
  if (!have_k1_) {
    rhs_(t_, y_, k_[0]);
    ++evaluations_;
    have_k1_ = true;
  }
  if (h_ == 0.0 || h_ * direction < 0.0) h_ = initial_step(direction);

  long steps = 0;
  while ((t_target - t_) * direction > 0.0) {
    if (++steps > opt_.max_steps) {
      raise(ErrorCode::StepSizeUnderflow, "maximum number of ODE steps exceeded");
    }
    double h = h_;
    bool last = false;
    if ((t_ + h - t_target) * direction >= 0.0) {
      h = t_target - t_;
      last = true;
    }
    const double h_floor = 1e-14 * std::max(1.0, std::abs(t_));
    if (std::abs(h) < h_floor) {
      if (last) {  // remaining interval is below resolution; snap
        t_ = t_target;
        break;
      }
      std::ostringstream os;
      os << "step size " << std::abs(h) << " underflows at t=" << t_;
      raise(ErrorCode::StepSizeUnderflow, os.str());
    }

    auto& k1 = k_[0];
    auto& k2 = k_[1];
    auto& k3 = k_[2];
    auto& k4 = k_[3];
    auto& k5 = k_[4];
    auto& k6 = k_[5];
    auto& k7 = k_[6];
    stage_ = y_ + h * a21 * k1;
    rhs_(t_ + c2 * h, stage_, k2);
    stage_ = y_ + h * (a31 * k1 + a32 * k2);
    rhs_(t_ + c3 * h, stage_, k3);
    stage_ = y_ + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs_(t_ + c4 * h, stage_, k4);
    stage_ = y_ + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t_ + c5 * h, stage_, k5);
    stage_ = y_ + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = last ? t_target : t_ + h;
    rhs_(t_new, stage_, k6);
    y_new_ = y_ + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t_new, y_new_, k7);
    evaluations_ += 6;
    err_ = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = error_norm(y_new_);
    if (!std::isfinite(err)) err = 1e10;
    if (err <= 1.0) {
      DenseSegment seg;
      if (dense_) {
        seg.t0 = t_;
        seg.h = t_new - t_;
        const Eigen::VectorXd ydiff = y_new_ - y_;
        const Eigen::VectorXd bspl = h * k1 - ydiff;
        seg.coeff[0] = y_;
        seg.coeff[1] = ydiff;
        seg.coeff[2] = bspl;
        seg.coeff[3] = ydiff - h * k7 - bspl;
        seg.coeff[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      }
      const StepView view{t_, t_new, y_, y_new_, dense_ ? &seg : nullptr};
      if (observer && !observer(view)) {
        ++rejected_;
        h_ = 0.5 * h;
        continue;
      }
      const double fac = std::clamp(std::pow(err, kExpo) * std::pow(err_old_, -kBeta) / kSafety,
                                    1.0 / kFacMax, 1.0 / kFacMin);
      double h_next = h / fac;
      err_old_ = std::max(err, 1e-4);
      y_.swap(y_new_);
      k1.swap(k7);
      t_ = t_new;
      ++accepted_;
      if (std::abs(h_next) > opt_.max_step) h_next = direction * opt_.max_step;
      // Keep the controller's proposal rather than the clipped final step.
      if (!last || std::abs(h_next) < std::abs(h_)) h_ = h_next;
    } else {
      ++rejected_;
      const double fac = std::min(1.0 / kFacMin, std::pow(err, kExpo) / kSafety);
      h_ = h / fac;
    }
  }
}

}  // namespace hagedorn
