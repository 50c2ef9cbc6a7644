#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "hagedorn/errors.hpp"
#include "hagedorn/oracle.hpp"
#include "testing.hpp"

using namespace hagedorn;
using std::numbers::pi;

namespace {

PotentialModel harmonic(int d = 1) {
  std::vector<PolynomialTerm> terms;
  for (int ax = 0; ax < d; ++ax) {
    MultiIndex m(d);
    m.set(ax, 2);
    terms.push_back({m, 0.5});
  }
  return PotentialModel::polynomial(d, terms);
}

PotentialModel quartic() {
  return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}, {MultiIndex{4}, 0.1}});
}

Grid line(double c, double hw, int n, double dt) {
  GridSpec s = testing::line_grid(c, hw, n).spec();
  s.dt = dt;
  return Grid(s);
}

// Closed-form free Gaussian with unit initial width parameter.
CVector free_gaussian(const Grid& g, double hbar, double a, double eta, double t) {
  CVector out(g.size());
  const Complex w(1.0, t);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = g.points()(0, i);
    const double y = x - a - eta * t;
    out[i] = std::pow(pi * hbar, -0.25) / std::sqrt(w) *
             std::exp(-y * y / (2.0 * hbar * w) + Complex(0.0, eta * (x - a) / hbar - eta * eta * t / (2.0 * hbar)));
  }
  return out;
}

}  // namespace

TEST_CASE("coherent-state revival") {
  const auto g = line(0.0, 12.0, 512, 1e-3);
  auto f = WavepacketFrame::standard(1, 1.0);
  f.a[0] = 1.0;
  const CVector psi0 = evaluate_phi0(f, g.points());
  const CVector psi = propagate(g, harmonic(), psi0, 1.0, 2 * pi);
  CHECK(std::abs(std::abs(g.inner(psi, psi0)) - 1.0) < 1e-8);
  CHECK(l2_error(psi, -psi0, g).raw < 1e-6);
}

TEST_CASE("free dispersion matches the closed form") {
  const double hbar = 0.5;
  const auto g = line(1.0, 16.0, 1024, 1e-2);
  const CVector psi0 = free_gaussian(g, hbar, -1.0, 1.0, 0.0);
  const auto out = propagate(g, PotentialModel::free(1), psi0, hbar, std::vector<double>{1.0, 2.0});
  CHECK(l2_error(out[0], free_gaussian(g, hbar, -1.0, 1.0, 1.0), g).raw < 1e-9);
  CHECK(l2_error(out[1], free_gaussian(g, hbar, -1.0, 1.0, 2.0), g).raw < 1e-9);
}

TEST_CASE("norm drift") {
  const auto g = line(0.0, 10.0, 512, 1e-3);
  auto f = WavepacketFrame::standard(1, 0.2);
  f.a[0] = 1.0;
  const CVector psi0 = evaluate_phi0(f, g.points());
  SplitOperator op(g, quartic(), 0.2);
  CVector psi = psi0;
  op.advance(psi, 10.0);
  CHECK(op.steps_taken() == 10000);
  CHECK(std::abs(g.norm(psi) - g.norm(psi0)) < 1e-11);
}

TEST_CASE("temporal order of Strang splitting") {
  const auto run = [](double dt) {
    const auto g = line(0.0, 8.0, 512, dt);
    auto f = WavepacketFrame::standard(1, 0.1);
    f.a[0] = 1.0;
    return propagate(g, quartic(), evaluate_phi0(f, g.points()), 0.1, 1.0);
  };
  const auto g = line(0.0, 8.0, 512, 1e-2);
  const CVector p1 = run(1e-2), p2 = run(5e-3), p3 = run(2.5e-3);
  const double order = std::log2(g.norm(p1 - p2) / g.norm(p2 - p3));
  CHECK(order >= 1.9);
  CHECK(order < 2.2);

  OracleOptions o4;
  o4.order = 4;
  auto f = WavepacketFrame::standard(1, 0.1);
  f.a[0] = 1.0;
  const auto run4 = [&](double dt) {
    const auto gg = line(0.0, 8.0, 512, dt);
    return propagate(gg, quartic(), evaluate_phi0(f, gg.points()), 0.1, 1.0, o4);
  };
  const double order4 = std::log2(g.norm(run4(2e-2) - run4(1e-2)) / g.norm(run4(1e-2) - run4(5e-3)));
  CHECK(order4 >= 3.5);
}

TEST_CASE("two-dimensional ground state is stationary up to its phase") {
  GridSpec s = testing::square_grid(RVector::Zero(2), 8.0, 64).spec();
  s.dt = 5e-4;
  const Grid g(s);
  const CVector psi0 = evaluate_phi0(WavepacketFrame::standard(2, 0.5), g.points());
  const CVector psi = propagate(g, harmonic(2), psi0, 0.5, 1.0);
  // E = d hbar / 2 = 0.5
  CHECK(l2_error(psi, std::exp(Complex(0.0, -1.0)) * psi0, g).raw < 1e-7);
}

TEST_CASE("error metrics") {
  const auto g = line(0.0, 10.0, 1024, 1e-3);
  const auto f = WavepacketFrame::standard(1, 1.0);
  const CMatrix phi = evaluate_basis(f, 1, g.points());
  const CVector a = phi.col(0), b = phi.col(1);
  CHECK(l2_error(a, a, g).raw == 0.0);
  CHECK(l2_error(a, a, g).phase_optimized == 0.0);
  const auto neg = l2_error(a, -a, g);
  CHECK(neg.raw == doctest::Approx(2.0 * g.norm(a)).epsilon(1e-14));
  CHECK(neg.phase_optimized < 1e-14);
  CHECK(l2_error(a, b, g).raw == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  const CVector tilted = std::polar(1.0, 0.7) * (a + 1e-9 * b);
  CHECK(std::abs(l2_error(a, tilted, g).phase_optimized - 1e-9) < 1e-14);
}

TEST_CASE("Hamiltonian application") {
  const auto g = line(0.0, 10.0, 512, 1e-3);
  const auto f = WavepacketFrame::standard(1, 0.3);
  const CVector phi0 = evaluate_phi0(f, g.points());
  const CVector h = apply_hamiltonian(g, harmonic(), 0.3, phi0);
  CHECK(g.norm(h - 0.15 * phi0) < 1e-10);
}

TEST_CASE("guards") {
  SUBCASE("leakage") {
    const auto g = line(0.0, 6.0, 256, 1e-3);
    auto f = WavepacketFrame::standard(1, 0.1);
    f.eta[0] = 3.0;
    try {
      (void)propagate(g, PotentialModel::free(1), evaluate_phi0(f, g.points()), 0.1, 3.0);
      FAIL("expected LeakageDetected");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::LeakageDetected);
    }
  }
  SUBCASE("time step") {
    const auto g = line(0.0, 6.0, 1024, 0.5);
    const auto f = WavepacketFrame::standard(1, 0.1);
    CHECK_THROWS_AS(propagate(g, harmonic(), evaluate_phi0(f, g.points()), 0.1, 1.0), Error);
  }
  SUBCASE("grid shape") {
    GridSpec s = testing::line_grid(0.0, 1.0, 64).spec();
    s.points = {100};
    CHECK_THROWS_AS(Grid{s}, Error);
  }
}

TEST_CASE("snapshot round trip") {
  const auto g = line(0.5, 7.0, 128, 1e-3);
  const auto f = WavepacketFrame::standard(1, 0.4);
  const CVector psi = evaluate_basis(f, 2, g.points()).col(2) * Complex(0.3, -0.8);
  const auto path = std::filesystem::temp_directory_path() / "hagedorn_snapshot_test.bin";
  write_snapshot(path, g, 0.4, 1.25, psi);
  const auto snap = read_snapshot(path);
  std::filesystem::remove(path);
  CHECK(snap.hbar == 0.4);
  CHECK(snap.t == 1.25);
  CHECK(snap.spec.points == g.spec().points);
  CHECK(snap.spec.center == g.spec().center);
  CHECK(snap.psi == psi);
}
