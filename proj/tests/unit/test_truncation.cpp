#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hagedorn/errors.hpp"
#include "hagedorn/oracle.hpp"
#include "hagedorn/truncation.hpp"
#include "testing.hpp"

using namespace hagedorn;

namespace {

PotentialModel harmonic() { return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}}); }
PotentialModel quartic() {
  return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}, {MultiIndex{4}, 0.1}});
}

CoefficientHierarchy run(const PotentialModel& pot, int l, std::vector<double> times,
                         double a0 = 1.0) {
  FlowOptions fo;
  fo.tol = 1e-12;
  const auto traj = integrate_flow(
      pot, ClassicalState::coherent(RVector::Constant(1, a0), RVector::Zero(1)), times.back(), fo);
  HierarchyOptions ho;
  ho.l = l;
  ho.output_times = std::move(times);
  return integrate_hierarchy(traj, pot,
                             BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0}), ho);
}

Grid line(double c, double hw, int n, double dt = 1e-3) {
  GridSpec s = testing::line_grid(c, hw, n).spec();
  s.dt = dt;
  return Grid(s);
}

}  // namespace

TEST_CASE("fixed truncation order") {
  CHECK(choose_l_fixed(0.5, 0.05) == 10);
  CHECK(choose_l_fixed(0.5, 0.6) == 1);
  CHECK(choose_l_fixed(0.3, 0.1) == 3);
  CHECK(choose_l_fixed(0.4, 0.025) == 16);
  const auto plan = choose_l(TruncationMode::FixedG, 0.05, 0.5);
  CHECK(plan.l == 10);
  CHECK(to_string(plan.mode) == "fixed_g");
}

TEST_CASE("empirical truncation order") {
  CHECK(choose_l_empirical({1.0, 0.0, 0.0, 0.0}) == 1);
  CHECK(choose_l_empirical({1.0, 0.5, 0.2, 0.3, 0.1}) == 2);
  CHECK(choose_l_empirical({1.0, 0.5, 0.25, 0.125}) == 4);
  try {
    (void)choose_l_empirical({1.0, 1.5, 0.1});
    FAIL("expected DegenerateProfile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateProfile);
  }
  const auto h = run(harmonic(), 4, {1.0});
  const auto prof = norm_profile(h, 0.1);
  CHECK(prof[0] == doctest::Approx(1.0));
  CHECK(prof[1] == 0.0);
  CHECK(choose_l(TruncationMode::Empirical, 0.1, 0.0, prof).l == 1);
}

TEST_CASE("harmonic assembly is the exact coherent-state evolution") {
  const double hbar = 0.1;
  const auto h = run(harmonic(), 3, {1.0, 2.0});
  const auto g = line(0.0, 6.0, 1024, 1e-4);
  auto f = WavepacketFrame::standard(1, hbar);
  f.a[0] = 1.0;
  const auto oracle = propagate(g, harmonic(), evaluate_phi0(f, g.points()), hbar, std::vector<double>{1.0, 2.0});
  for (std::size_t i = 0; i < 2; ++i) {
    const CVector approx = assemble_wavefunction(h, i, hbar, 3, g.points());
    const CVector leading = assemble_wavefunction(h, i, hbar, 1, g.points());
    CHECK((approx - leading).norm() == 0.0);
    CHECK(l2_error(oracle[i], approx, g).raw < 1e-7);
  }
}

TEST_CASE("first correction size and norm defect") {
  const double hbar = 0.05;
  const auto h = run(quartic(), 3, {1.0});
  const auto g = line(1.0, 5.0, 2048);
  const CVector p1 = assemble_wavefunction(h, 0, hbar, 1, g.points());
  const CVector p2 = assemble_wavefunction(h, 0, hbar, 2, g.points());
  const double diff = g.norm(p2 - p1);
  CHECK(diff == doctest::Approx(std::sqrt(hbar) * h.norm(0, 1)).epsilon(1e-8));
  const double n3 = g.norm(assemble_wavefunction(h, 0, hbar, 3, g.points()));
  CHECK(std::abs(n3 - 1.0) < std::sqrt(hbar));
  CHECK(std::abs(n3 - 1.0) > 0.0);
}

TEST_CASE("combined coefficients and assembly are linear in the orders") {
  const double hbar = 0.1;
  const auto h = run(quartic(), 3, {0.7});
  const auto c = combined_coefficients(h, 0, hbar, 3);
  CVector sum = CVector::Zero(c.values().size());
  for (int k = 0; k < 3; ++k) sum += std::pow(hbar, 0.5 * k) * h.c(0, k).head(sum.size());
  CHECK((c.values() - sum).norm() == 0.0);
  CHECK(c.support() == 6);
}

TEST_CASE("residuals") {
  SUBCASE("harmonic and free vanish") {
    const auto h = run(harmonic(), 2, {1.0});
    const auto g = line(0.0, 4.0, 1024);
    CHECK(residual_norm(h, 0, harmonic(), 0.1, 2, g) < 1e-14);
    const auto hf = run(PotentialModel::free(1), 2, {1.0}, 0.0);
    CHECK(residual_norm(hf, 0, PotentialModel::free(1), 0.1, 2, g) == 0.0);
  }
  SUBCASE("quartic defect matches the time-difference defect") {
    const double hbar = 0.1, t = 1.0, dt = 1e-3;
    const auto pot = quartic();
    const auto h = run(pot, 2, {t - dt, t, t + dt});
    const auto g = line(0.0, 6.0, 2048);
    const CVector m = assemble_wavefunction(h, 0, hbar, 2, g.points());
    const CVector c = assemble_wavefunction(h, 1, hbar, 2, g.points());
    const CVector p = assemble_wavefunction(h, 2, hbar, 2, g.points());
    const CVector defect = Complex(0.0, hbar) * (p - m) / (2.0 * dt) - apply_hamiltonian(g, pot, hbar, c);
    const double fd = g.norm(defect);
    const double xi = residual_norm(h, 1, pot, hbar, 2, g);
    CHECK(xi > 0.0);
    CHECK(std::abs(fd - xi) <= 0.05 * xi);
    CHECK(g.norm(residual(h, 1, pot, hbar, 2, g) - defect) <= 0.05 * xi);
  }
  SUBCASE("coarse grids are refused") {
    const auto h = run(quartic(), 2, {1.0});
    try {
      (void)residual_norm(h, 0, quartic(), 0.1, 2, line(0.0, 6.0, 16));
      FAIL("expected GridTooCoarse");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooCoarse);
    }
  }
}

TEST_CASE("Taylor remainder") {
  RMatrix pts(1, 3);
  pts << 0.0, 1.5, 2.0;
  const RVector a = RVector::Constant(1, 1.0);
  const RVector w = taylor_remainder(quartic(), a, 3, pts);
  for (int i = 0; i < 3; ++i) CHECK(w[i] == doctest::Approx(0.1 * std::pow(pts(0, i) - 1.0, 4)));
  const auto g = PotentialModel::gaussian_sum(1, {{RVector::Zero(1), 1.0, 1.0}});
  const RVector wg = taylor_remainder(g, RVector::Zero(1), 2, pts);
  CHECK(wg[1] == doctest::Approx(std::exp(-2.25) - 1.0 + 2.25));
}

TEST_CASE("localization mass") {
  const double hbar = 0.1;
  const auto f = WavepacketFrame::standard(1, hbar);
  const auto g = line(0.0, 10.0, 4096);
  const CVector psi = evaluate_phi0(f, g.points());
  const RVector c = RVector::Zero(1);
  CHECK(localization_mass(g, psi, c, 0.0) == doctest::Approx(g.norm(psi)));
  CHECK(localization_mass(g, psi, c, 10.0 * std::sqrt(hbar)) < 1e-10);
  double prev = 2.0;
  for (double b : {0.1, 0.25, 0.5, 1.0, 1.5}) {
    const double m = localization_mass(g, psi, c, b);
    CHECK(m <= prev);
    prev = m;
  }
  try {
    (void)localization_mass(g, psi, c, 4.0);
    FAIL("expected GridTooCoarse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
}

TEST_CASE("Ehrenfest schedules") {
  for (double hbar : {0.1, 0.01}) {
    const auto s = ehrenfest_schedule(1.0 / 8.0, 1.0, 0.0, 0.0, hbar, 7.0);
    CHECK(s.T == doctest::Approx(std::log(1.0 / hbar) / 8.0));
    CHECK(s.g == doctest::Approx(std::pow(hbar, 7.0 / 8.0)));
    CHECK(s.l == std::max(1, static_cast<int>(std::floor(std::pow(hbar, -1.0 / 8.0)))));
  }
  try {
    (void)ehrenfest_schedule(1.0, 1.0, 1.0, 1.0, 0.1);
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyWindow);
  }
  const double eps = 0.01;
  const auto s = ehrenfest_schedule((1.0 - eps) / 6.0, 1.0, 0.0, 0.0, 0.05);
  CHECK(s.window_lo < s.window_hi);
  CHECK(s.kappa == doctest::Approx(0.5 * (s.window_lo + s.window_hi)));
  CHECK_THROWS_AS(ehrenfest_schedule(0.1, 1.0, 0.0, 0.0, 0.05, 11.0), Error);
}

TEST_CASE("line fit") {
  const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(fit_line({1, 2, 3}, {1, -1, 1}).r_squared < 0.1);
}
