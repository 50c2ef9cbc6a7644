#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hagedorn/errors.hpp"
#include "hagedorn/ode.hpp"

using namespace hagedorn;
using Eigen::VectorXd;

namespace {

// y'' = -y as a first-order system; exact solution (cos t, -sin t).
void oscillator(double, const VectorXd& y, VectorXd& dy) {
  dy.resize(2);
  dy[0] = y[1];
  dy[1] = -y[0];
}

double solve_error(double tol) {
  OdeOptions o;
  o.rtol = o.atol = tol;
  DormandPrince45 dp(oscillator, o);
  dp.reset(0.0, VectorXd::Unit(2, 0));
  dp.advance_to(10.0);
  return std::hypot(dp.y()[0] - std::cos(10.0), dp.y()[1] + std::sin(10.0));
}

}  // namespace

TEST_CASE("oscillator to tight tolerance") {
  CHECK(solve_error(1e-12) < 1e-9);
  CHECK(solve_error(1e-6) > solve_error(1e-10));
}

TEST_CASE("lands exactly on the target and runs backwards") {
  DormandPrince45 dp(oscillator, {});
  dp.reset(0.0, VectorXd::Unit(2, 0));
  dp.advance_to(3.0);
  CHECK(dp.t() == 3.0);
  dp.advance_to(0.0);
  CHECK(dp.t() == 0.0);
  CHECK(std::abs(dp.y()[0] - 1.0) < 1e-8);
  CHECK(std::abs(dp.y()[1]) < 1e-8);
}

TEST_CASE("dense output stays accurate between nodes") {
  OdeOptions o;
  o.rtol = o.atol = 1e-11;
  DormandPrince45 dp(oscillator, o, true);
  dp.reset(0.0, VectorXd::Unit(2, 0));
  double worst = 0.0;
  dp.advance_to(6.0, [&](const StepView& s) {
    REQUIRE(s.dense != nullptr);
    for (double f : {0.25, 0.5, 0.75}) {
      const double t = s.t0 + f * (s.t1 - s.t0);
      const VectorXd y = (*s.dense)(t);
      worst = std::max(worst, std::abs(y[0] - std::cos(t)));
    }
    CHECK(((*s.dense)(s.t1) - s.y1).norm() < 1e-14);
    return true;
  });
  CHECK(worst < 1e-8);
}

TEST_CASE("observer rejection shrinks the step") {
  DormandPrince45 dp(oscillator, {});
  dp.reset(0.0, VectorXd::Unit(2, 0));
  double longest = 0.0;
  dp.advance_to(2.0, [&](const StepView& s) {
    if (std::abs(s.t1 - s.t0) > 0.05) return false;
    longest = std::max(longest, std::abs(s.t1 - s.t0));
    return true;
  });
  CHECK(longest <= 0.05);
  CHECK(dp.t() == 2.0);
}

TEST_CASE("step budget") {
  OdeOptions o;
  o.max_steps = 3;
  DormandPrince45 dp(oscillator, o);
  dp.reset(0.0, VectorXd::Unit(2, 0));
  try {
    dp.advance_to(100.0);
    FAIL("expected StepSizeUnderflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepSizeUnderflow);
  }
}
