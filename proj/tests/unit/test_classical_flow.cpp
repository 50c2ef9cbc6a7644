#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "hagedorn/classical_flow.hpp"
#include "hagedorn/errors.hpp"
#include "testing.hpp"

using namespace hagedorn;
using std::numbers::pi;

namespace {

PotentialModel harmonic() { return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}}); }
PotentialModel quartic() {
  return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}, {MultiIndex{4}, 0.1}});
}
PotentialModel anharmonic2d() {
  return PotentialModel::polynomial(2, {{MultiIndex{2, 0}, 0.5},
                                        {MultiIndex{0, 2}, 1.0},
                                        {MultiIndex{1, 1}, 0.2},
                                        {MultiIndex{2, 1}, 0.1},
                                        {MultiIndex{0, 4}, 0.05}});
}

FlowOptions tight(double tol = 1e-12) {
  FlowOptions o;
  o.tol = tol;
  return o;
}

}  // namespace

TEST_CASE("harmonic flow matches the closed form") {
  const auto init = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  const auto traj = integrate_flow(harmonic(), init, pi / 2, tight());
  const auto& s = traj.back();
  const Complex e = std::polar(1.0, pi / 2);
  CHECK(std::abs(s.a[0] - std::cos(pi / 2)) < 1e-9);
  CHECK(std::abs(s.eta[0] + 1.0) < 1e-9);
  CHECK(std::abs(s.A(0, 0) - e) < 1e-9);
  CHECK(std::abs(s.B(0, 0) - e) < 1e-9);
  CHECK(std::abs(s.S + std::sin(pi) / 4) < 1e-9);
  CHECK(std::abs(s.detA_arg - pi / 2) < 1e-9);
}

TEST_CASE("det A branch is tracked through several turns") {
  const auto init = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  const auto traj = integrate_flow(harmonic(), init, 4 * pi, tight());
  CHECK(std::abs(traj.back().detA_arg - 4 * pi) < 1e-8);
  for (double t : {1.0, 5.0, 11.0}) CHECK(std::abs(traj.state_at(t).detA_arg - t) < 1e-7);
}

TEST_CASE("free flight") {
  RVector a0(2), eta0(2);
  a0 << 0.5, -1.0;
  eta0 << 1.5, 0.25;
  const auto init = ClassicalState::coherent(a0, eta0);
  const auto s = integrate_flow(PotentialModel::free(2), init, 3.0, tight()).back();
  CHECK((s.a - (a0 + 3.0 * eta0)).norm() < 1e-10);
  CHECK((s.eta - eta0).norm() < 1e-12);
  const CMatrix A = CMatrix::Identity(2, 2) * Complex(1.0, 3.0);
  CHECK((s.A - A).norm() < 1e-10);
  CHECK((s.B - CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(std::abs(s.S - 1.5 * eta0.squaredNorm()) < 1e-10);
}

TEST_CASE("hyperbolic point of the double well") {
  const auto init = ClassicalState::coherent(RVector::Zero(1), RVector::Zero(1));
  const auto traj = integrate_flow(PotentialModel::double_well(1), init, 3.0, tight());
  for (const auto& s : traj.nodes()) {
    CHECK(s.a[0] == 0.0);
    const Complex A(std::cosh(s.t), std::sinh(s.t));
    CHECK(std::abs(s.A(0, 0) - A) < 1e-9 * std::abs(A));
  }
}

TEST_CASE("cond1, energy and positivity along a 2-D orbit") {
  std::mt19937_64 rng(11);
  auto init = ClassicalState::coherent(RVector::Constant(2, 0.8), RVector::Constant(2, -0.3));
  std::tie(init.A, init.B) = testing::random_frame_matrices(2, rng);
  init.detA_arg = std::arg(init.A.determinant());
  const double tol = 1e-11;
  const auto pot = anharmonic2d();
  const auto traj = integrate_flow(pot, init, 5.0, tight(tol));
  CHECK(traj.max_cond1_residual() < 5.0 * (10 * tol + 1e-13));

  const double E0 = 0.5 * init.eta.squaredNorm() + pot.value(init.a);
  for (const auto& s : traj.nodes()) {
    CHECK(std::abs(0.5 * s.eta.squaredNorm() + pot.value(s.a) - E0) < 1e-9);
    const CMatrix BAinv = s.B * s.A.inverse();
    const RMatrix re = BAinv.real();
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (re + re.transpose()));
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    const CMatrix AAs = s.A * s.A.adjoint();
    CHECK((re.inverse().cast<Complex>() - AAs).norm() < 1e-10 * std::max(1.0, AAs.norm()));
  }
}

TEST_CASE("time reversal") {
  const double tol = 1e-12;
  const auto init = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Constant(1, 0.3));
  const auto fwd = integrate_flow(quartic(), init, 4.0, tight(tol));
  const auto back = integrate_flow(quartic(), fwd.back(), 0.0, tight(tol));
  const auto& s = back.back();
  CHECK(std::abs(s.t) == 0.0);
  CHECK((s.a - init.a).norm() < 100 * tol);
  CHECK((s.eta - init.eta).norm() < 100 * tol);
  CHECK((s.A - init.A).norm() < 1000 * tol);
  CHECK((s.B - init.B).norm() < 1000 * tol);
  CHECK(std::abs(s.S - init.S) < 100 * tol);
}

TEST_CASE("invalid initial data is rejected") {
  auto init = ClassicalState::coherent(RVector::Zero(1), RVector::Zero(1));
  init.B(0, 0) = 2.0;
  try {
    (void)integrate_flow(harmonic(), init, 1.0);
    FAIL("expected Cond1Drift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Cond1Drift);
  }
}

TEST_CASE("linearization identity") {
  const auto h0 = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  CHECK(linearization_check(harmonic(), h0, 3.0, 1e-5) < 1e-6);
  const auto f0 = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Constant(1, 0.5));
  CHECK(linearization_check(PotentialModel::free(1), f0, 3.0, 1e-5) < 1e-8);
  const double e1 = linearization_check(quartic(), h0, 1.0, 2e-3);
  const double e2 = linearization_check(quartic(), h0, 1.0, 1e-3);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("Lyapunov fits") {
  const auto h0 = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  const auto harm = lyapunov_estimate(integrate_flow(harmonic(), h0, 10.0, tight()));
  CHECK(std::abs(harm.lambda) < 1e-3);
  CHECK(harm.status == LyapunovFit::Status::NotGrowing);
  CHECK_THROWS_AS(require_exponential(harm), Error);

  const auto w0 = ClassicalState::coherent(RVector::Zero(1), RVector::Zero(1));
  const auto well = lyapunov_estimate(integrate_flow(PotentialModel::double_well(1), w0, 12.0, tight()));
  CHECK(well.status == LyapunovFit::Status::Exponential);
  CHECK(std::abs(well.lambda - 1.0) < 0.05);
  CHECK_NOTHROW(require_exponential(well));

  const auto f0 = ClassicalState::coherent(RVector::Zero(1), RVector::Constant(1, 1.0));
  const auto free = lyapunov_estimate(integrate_flow(PotentialModel::free(1), f0, 50.0, tight()));
  CHECK(free.status != LyapunovFit::Status::Exponential);
  try {
    require_exponential(free);
    FAIL("expected FitDegenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FitDegenerate);
  }
}

TEST_CASE("pack and unpack round trip") {
  std::mt19937_64 rng(3);
  auto s = ClassicalState::coherent(RVector::Constant(2, 0.1), RVector::Constant(2, 0.2));
  std::tie(s.A, s.B) = testing::random_frame_matrices(2, rng);
  s.S = 0.7;
  ClassicalState r;
  unpack_classical(pack_classical(s), 2, r);
  CHECK(r.a == s.a);
  CHECK(r.eta == s.eta);
  CHECK(r.A == s.A);
  CHECK(r.B == s.B);
  CHECK(r.S == s.S);
  CHECK(pack_classical(s).size() == classical_size(2));
}
