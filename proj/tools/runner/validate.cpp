#include "validate.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "config.hpp"
#include "hagedorn/classical_flow.hpp"
#include "hagedorn/hierarchy.hpp"
#include "hagedorn/oracle.hpp"
#include "hagedorn/scattering.hpp"
#include "hagedorn/truncation.hpp"
#include "runs.hpp"

namespace hagedorn::runner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Collector {
 public:
  explicit Collector(const ValidateOptions& o) : opt_(o) {}

  void at_most(const std::string& name, double value, double limit, bool scalable = true, std::string note = {}) {
    add(name, value, limit, Invariant::Kind::AtMost, scalable, std::move(note));
  }
  void at_least(const std::string& name, double value, double limit, std::string note = {}) {
    add(name, value, limit, Invariant::Kind::AtLeast, false, std::move(note));
  }
  void exact(const std::string& name, double value, double expected = 0.0, std::string note = {}) {
    add(name, value, expected, Invariant::Kind::Exact, false, std::move(note));
  }

  // A group that throws is recorded as one failed invariant instead of aborting the matrix.
  template <class F>
  void group(const std::string& module, F&& body) {
    module_ = module;
    try {
      body();
    } catch (const std::exception& e) {
      add("group_completed", 1.0, 0.0, Invariant::Kind::Exact, false, e.what());
    }
  }

  std::vector<Invariant> take() { return std::move(items_); }

 private:
  void add(const std::string& name, double value, double limit, Invariant::Kind kind, bool scalable,
           std::string note) {
    Invariant inv;
    inv.module = module_;
    inv.name = name;
    inv.value = value;
    inv.limit = scalable ? limit * opt_.tolerance_scale : limit;
    inv.kind = kind;
    inv.scalable = scalable;
    inv.note = std::move(note);
    switch (kind) {
      case Invariant::Kind::AtMost:
        inv.passed = std::isfinite(value) && value <= inv.limit;
        inv.margin = value > 0.0 ? std::log10(inv.limit / value) : kInf;
        break;
      case Invariant::Kind::AtLeast:
        inv.passed = std::isfinite(value) && value >= inv.limit;
        inv.margin = value > 0.0 && inv.limit > 0.0 ? std::log10(value / inv.limit) : value - inv.limit;
        break;
      case Invariant::Kind::Exact:
        inv.passed = value == inv.limit;
        inv.margin = inv.passed ? 0.0 : -kInf;
        break;
    }
    items_.push_back(std::move(inv));
  }

  const ValidateOptions& opt_;
  std::string module_;
  std::vector<Invariant> items_;
};

CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

// Valid (A, B) from a real similarity, a free drift and a quadratic kick.
std::pair<CMatrix, CMatrix> random_frame_matrices(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  RMatrix M = RMatrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) += u(rng);
  RMatrix W(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) W(i, j) = W(j, i) = u(rng);
  const double s = u(rng);
  const RMatrix MinvT = M.inverse().transpose();
  CMatrix A = M.cast<Complex>() + Complex(0.0, s) * MinvT.cast<Complex>();
  CMatrix B = MinvT.cast<Complex>() + Complex(0.0, 1.0) * W.cast<Complex>() * A;
  return {A, B};
}

WavepacketFrame random_frame(int d, std::mt19937_64& rng, double hbar) {
  WavepacketFrame f = WavepacketFrame::standard(d, hbar);
  std::tie(f.A, f.B) = random_frame_matrices(d, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < d; ++i) {
    f.a[i] = u(rng);
    f.eta[i] = u(rng);
  }
  f.detA_arg = std::arg(f.A.determinant());
  return f;
}

Grid line_grid(double c, double half_width, int points, double dt = 1e-3) {
  GridSpec s;
  s.center = RVector::Constant(1, c);
  s.half_width = RVector::Constant(1, half_width);
  s.points = {points};
  s.dt = dt;
  return Grid(s);
}

PotentialModel quartic() { return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}, {MultiIndex{4}, 0.1}}); }
PotentialModel harmonic() { return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}}); }
PotentialModel anharmonic2d() {
  return PotentialModel::polynomial(2, {{MultiIndex{2, 0}, 0.5},
                                        {MultiIndex{0, 2}, 1.0},
                                        {MultiIndex{1, 1}, 0.2},
                                        {MultiIndex{2, 1}, 0.1},
                                        {MultiIndex{0, 4}, 0.05}});
}
PotentialModel barrier() {
  auto pot = PotentialModel::gaussian_sum(1, {{RVector::Zero(1), 1.0, 4.0}});
  pot.with_decay({8.0, 1224.0, 2.0});
  return pot;
}

FlowOptions tight(double tol) {
  FlowOptions o;
  o.tol = tol;
  return o;
}

// p - eta = i sqrt(hbar/2) sum_n (B_mn R_n - conj(B_mn) L_n), built from the ladder kernels only.
BasisCoefficients apply_momentum(const WavepacketFrame& f, int axis, const BasisCoefficients& c) {
  const int s = c.support() + 1;
  BasisCoefficients out(c.table_ptr(), s);
  out.values().setZero();
  const Complex scale(0.0, std::sqrt(0.5 * f.hbar));
  for (int n = 0; n < f.dim(); ++n) {
    out.values() += scale * (f.B(axis, n) * apply_raising(f, n, c).resized(s).values() -
                             std::conj(f.B(axis, n)) * apply_lowering(f, n, c).resized(s).values());
  }
  return out;
}

void multiindex_checks(Collector& c) {
  int hockey = 0, shell = 0, prefix = 0;
  for (int q = 1; q <= 20; ++q)
    for (int p = 2; p <= q + 1; ++p) hockey += hockey_stick_holds(p, q) ? 0 : 1;
  for (int d = 1; d <= 4; ++d)
    for (int q = 0; q <= 12; ++q)
      for (int n = 0; n <= q; ++n) shell += shell_growth_inequality_holds(d, n, q) ? 0 : 1;
  for (int d = 1; d <= 4; ++d) {
    for (int N = 0; N <= 6; ++N) {
      const auto small = enumerate_upto(d, N);
      const auto big = enumerate_upto(d, N + 1);
      if (small.size() != count_upto(d, N)) ++prefix;
      for (std::size_t i = 0; i < small.size(); ++i) prefix += small[i] == big[i] ? 0 : 1;
    }
  }
  c.exact("hockey_stick_failures", hockey);
  c.exact("shell_growth_failures", shell);
  c.exact("graded_prefix_mismatches", prefix);
}

void potential_checks(Collector& c) {
  const auto pot = anharmonic2d();
  const RVector x = (RVector(2) << 0.7, -0.4).finished();
  // Independent central differences of the value and of the gradient.
  const auto fd = [&](double h) {
    RVector g(2);
    RMatrix H(2, 2);
    for (int i = 0; i < 2; ++i) {
      RVector e = RVector::Zero(2);
      e[i] = h;
      g[i] = (pot.value(x + e) - pot.value(x - e)) / (2 * h);
      H.col(i) = (pot.gradient(x + e) - pot.gradient(x - e)) / (2 * h);
    }
    return std::pair{g, H};
  };
  const auto [g1, H1] = fd(1e-2);
  const auto [g2, H2] = fd(5e-3);
  const auto [g3, H3] = fd(1e-5);
  const RVector grad = pot.gradient(x);
  const RMatrix hess = pot.hessian(x);
  c.at_most("gradient_vs_differences", (g3 - grad).norm() / grad.norm(), 1e-8);
  c.at_most("hessian_vs_differences", (H3 - hess).norm() / hess.norm(), 1e-8);
  c.at_least("difference_order", std::log2((g1 - grad).norm() / (g2 - grad).norm()), 1.9);
}

void flow_checks(Collector& c, std::mt19937_64& rng) {
  const double tol = 1e-11;
  auto init = ClassicalState::coherent(RVector::Constant(2, 0.8), RVector::Constant(2, -0.3));
  std::tie(init.A, init.B) = random_frame_matrices(2, rng);
  init.detA_arg = std::arg(init.A.determinant());
  const auto pot = anharmonic2d();
  const double T = 5.0;
  const auto traj = integrate_flow(pot, init, T, tight(tol));
  const double E0 = 0.5 * init.eta.squaredNorm() + pot.value(init.a);
  double energy = 0.0, min_eig = kInf, inverse = 0.0;
  for (const auto& s : traj.nodes()) {
    energy = std::max(energy, std::abs(0.5 * s.eta.squaredNorm() + pot.value(s.a) - E0));
    const RMatrix re = (s.B * s.A.inverse()).real();
    Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (re + re.transpose()));
    min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    const CMatrix AAs = s.A * s.A.adjoint();
    inverse = std::max(inverse, (re.inverse().cast<Complex>() - AAs).norm() / std::max(1.0, AAs.norm()));
  }
  c.at_most("cond1_residual", traj.max_cond1_residual(), T * (10 * tol + 1e-13));
  c.at_most("energy_drift", energy, 1e-9);
  c.at_least("ReBAinv_min_eigenvalue", min_eig, 0.0);
  c.at_most("ReBAinv_inverse_is_AAstar", inverse, 1e-10);

  const double rtol = 1e-12;
  const auto s0 = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Constant(1, 0.3));
  const auto fwd = integrate_flow(quartic(), s0, 4.0, tight(rtol));
  const auto reversed = integrate_flow(quartic(), fwd.back(), 0.0, tight(rtol));
  const auto& back = reversed.back();
  const double rev = std::max({(back.a - s0.a).norm(), (back.eta - s0.eta).norm(), std::abs(back.S - s0.S),
                               0.1 * (back.A - s0.A).norm(), 0.1 * (back.B - s0.B).norm()});
  c.at_most("time_reversal", rev, 100 * rtol);
}

void basis_checks(Collector& c, std::mt19937_64& rng, const PositionKernel& position) {
  for (double hbar : {1.0, 0.1}) {
    const auto f = random_frame(1, rng, hbar);
    const double width = std::sqrt(hbar) * operator_norm(f.A);
    const Grid g = line_grid(f.a[0], 14.0 * width, 8192);
    const CMatrix phi = evaluate_basis(f, 8, g.points());
    const CMatrix G = phi.adjoint() * phi * g.cell_volume();
    c.at_most(hbar == 1.0 ? "gram_hbar_1" : "gram_hbar_0.1", (G - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff(),
              1e-9);
  }

  double ladder = 0.0, canonical = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const auto table = MultiIndexTable::make(d, 8);
    const double hbar = 0.3;
    const auto f = random_frame(d, rng, hbar);
    for (int trial = 0; trial < 3; ++trial) {
      BasisCoefficients v(table, 5);
      v.values() = random_vector(v.values().size(), rng);
      const double scale = v.values().cwiseAbs().maxCoeff();
      for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
          CVector diff = apply_lowering(f, m, apply_raising(f, n, v)).resized(7).values() -
                         apply_raising(f, n, apply_lowering(f, m, v)).resized(7).values();
          if (m == n) diff -= v.resized(7).values();
          ladder = std::max(ladder, diff.cwiseAbs().maxCoeff() / scale);

          CVector xp = position(f, m, apply_momentum(f, n, v)).resized(7).values() -
                       apply_momentum(f, n, position(f, m, v)).resized(7).values();
          if (m == n) xp -= Complex(0.0, hbar) * v.resized(7).values();
          canonical = std::max(canonical, xp.cwiseAbs().maxCoeff() / (hbar * scale));
        }
      }
    }
  }
  c.at_most("raise_lower_commutator", ladder, 1e-12);
  c.at_most("ladder_commutators", canonical, 1e-12, true, "[x_m, p_n] = i hbar delta_mn");

  // Position acts as a band: a degree-3 input only reaches degrees 2 and 4.
  int band = 0;
  {
    const auto table = MultiIndexTable::make(2, 6);
    const auto f = random_frame(2, rng, 0.5);
    for (const auto& j : enumerate_exact(2, 3)) {
      const auto out = position(f, 0, BasisCoefficients::delta(table, j).resized(3));
      for (const auto& [k, v] : out.entries())
        if (v != Complex(0.0) && k.order() != 2 && k.order() != 4) ++band;
    }
  }
  c.exact("position_band_violations", band);

  // Position kernel against multiplication on a grid.
  {
    const double hbar = 0.2;
    const auto f = random_frame(1, rng, hbar);
    const auto table = MultiIndexTable::make(1, 8);
    BasisCoefficients v(table, 6);
    v.values() = random_vector(v.values().size(), rng);
    const double width = std::sqrt(hbar) * operator_norm(f.A);
    const Grid g = line_grid(f.a[0], 16.0 * width, 4096);
    const CVector lhs = evaluate_expansion(f, position(f, 0, v), g.points());
    CVector rhs = evaluate_expansion(f, v, g.points());
    for (Eigen::Index i = 0; i < g.size(); ++i) rhs[i] *= g.points()(0, i) - f.a[0];
    c.at_most("position_vs_quadrature", g.norm(lhs - rhs) / g.norm(rhs), 1e-9);

    const CVector phi0 = evaluate_phi0(f, g.points());
    double var = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double y = g.points()(0, i) - f.a[0];
      var += y * y * std::norm(phi0[i]) * g.cell_volume();
    }
    const double expected = 0.5 * hbar * (f.A * f.A.adjoint()).real()(0, 0);
    c.at_most("ground_state_spread", std::abs(var - expected) / expected, 1e-9);
  }
}

void hierarchy_checks(Collector& c) {
  const auto traj = integrate_flow(quartic(), ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1)),
                                   2.0, tight(1e-12));
  const auto table = MultiIndexTable::make(1, 2);
  BasisCoefficients c0(table, 2);
  c0.values() << Complex(0.8, 0.0), Complex(0.0, 0.36), Complex(-0.48, 0.0);
  HierarchyOptions ho;
  ho.l = 4;
  ho.p_resolved = true;
  ho.output_times = {0.5, 1.0, 2.0};
  const auto h = integrate_hierarchy(traj, quartic(), c0, ho);
  const auto b = bound_constants(traj, quartic(), 1.0, default_probe_order(quartic(), ho.l));
  const auto orders = check_order_bounds(h, b);
  const auto parts = verify_p_decomposition(h, b);
  c.exact("sparsity_violation", h.sparsity_violation() + h.part_sparsity_violation());
  c.at_most("order_bound_ratio", orders.worst_ratio, 1.0, false);
  c.at_most("part_bound_ratio", parts.worst_ratio, 1.0, false);
  c.at_most("telescoping", parts.telescoping, 1e-10);

  BasisCoefficients c4 = c0;
  c4.values() *= 4.0;
  ho.p_resolved = false;
  const auto h1 = integrate_hierarchy(traj, quartic(), c0, ho);
  const auto h4 = integrate_hierarchy(traj, quartic(), c4, ho);
  double lin = 0.0;
  for (std::size_t i = 0; i < h1.num_times(); ++i)
    for (int k = 0; k < ho.l; ++k) lin = std::max(lin, (h4.c(i, k) - 4.0 * h1.c(i, k)).norm());
  c.exact("linearity_power_of_two", lin);

  const auto htraj = integrate_flow(harmonic(), ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1)),
                                    2.0, tight(1e-12));
  const auto hh = integrate_hierarchy(htraj, harmonic(), c0, ho);
  double corr = 0.0;
  for (std::size_t i = 0; i < hh.num_times(); ++i)
    for (int k = 1; k < ho.l; ++k) corr += hh.norm(i, k);
  c.exact("harmonic_corrections", corr);
}

void truncation_checks(Collector& c) {
  const double hbar = 0.1;
  const auto traj = integrate_flow(quartic(), ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1)),
                                   1.0, tight(1e-12));
  HierarchyOptions ho;
  ho.l = 3;
  ho.output_times = {0.0, 1.0};
  const auto h =
      integrate_hierarchy(traj, quartic(), BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0}), ho);
  const Grid g(GridSpec::around(traj, hbar, 2048, 1e-3));
  const CVector full = assemble_wavefunction(h, 1, hbar, 3, g.points());
  const CVector lower = assemble_wavefunction(h, 1, hbar, 2, g.points());
  const auto& st = h.state(1);
  const auto frame = std::make_shared<const WavepacketFrame>(WavepacketFrame::from_state(st, hbar));
  CVector top = evaluate_expansion(*frame, h.coefficients(1, 2), g.points());
  top *= hbar * std::exp(Complex(0.0, st.S / hbar));
  c.at_most("assembly_linearity", g.norm(full - lower - top) / g.norm(full), 1e-12);

  int monotone = 0;
  double prev = kInf;
  for (double b : {0.0, 0.1, 0.2, 0.4, 0.8, 1.2}) {
    const double m = localization_mass(g, full, st.a, b);
    if (m > prev) ++monotone;
    prev = m;
  }
  c.exact("localization_monotone_violations", monotone);

  const auto htraj = integrate_flow(harmonic(), ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1)),
                                    1.0, tight(1e-12));
  const auto hh =
      integrate_hierarchy(htraj, harmonic(), BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0}), ho);
  const Grid hg(GridSpec::around(htraj, hbar, 2048, 1e-3));
  const CVector psi0 = assemble_wavefunction(hh, 0, hbar, 1, hg.points());
  const CVector oracle = propagate(hg, harmonic(), psi0, hbar, 1.0);
  c.at_most("harmonic_vs_oracle", l2_error(assemble_wavefunction(hh, 1, hbar, 1, hg.points()), oracle, hg).raw, 1e-5);
}

void scattering_checks(Collector& c) {
  {
    const auto pot = PotentialModel::free(2);
    AsymptoticData in;
    in.side = Side::Past;
    in.a = RVector::Constant(2, -1.0);
    in.eta = RVector::Constant(2, 1.0);
    in.A = CMatrix::Identity(2, 2);
    in.B = CMatrix::Identity(2, 2);
    const auto table = MultiIndexTable::make(2, 2);
    BasisCoefficients c0(table, 2);
    c0.values().setZero();
    c0.at(MultiIndex{1, 0}) = Complex(0.6, 0.0);
    c0.at(MultiIndex{0, 2}) = Complex(0.0, 0.8);
    const auto r = smatrix_apply(pot, in, c0, 0.05, 0.3);
    int mismatches = 0;
    for (const auto& [j, v] : c0.entries()) mismatches += r.out_coefficients[j] == v ? 0 : 1;
    mismatches += r.out_coefficients.norm() == c0.norm() ? 0 : 1;
    mismatches += r.outgoing.a == in.a && r.outgoing.eta == in.eta && r.outgoing.A == in.A ? 0 : 1;
    c.exact("free_identity_mismatches", mismatches);
  }
  const auto pot = barrier();
  const auto s0 = ClassicalState::coherent(RVector::Constant(1, -10.0), RVector::Constant(1, 3.0));
  ScatterOptions o;
  const auto past = classical_asymptotics(pot, s0, Side::Past, o);
  const auto future = classical_asymptotics(pot, s0, Side::Future, o);
  const auto again = classical_asymptotics(pot, free_state_at(past, -40.0), Side::Future, o);
  c.at_most("past_future_consistency",
            std::max({std::abs(again.a[0] - future.a[0]), std::abs(again.eta[0] - future.eta[0]),
                      std::abs(again.A(0, 0) - future.A(0, 0)) / std::abs(future.A(0, 0))}),
            10 * o.classical_tol);
  c.at_most("asymptote_cond1", std::max(cond1_residuals(past.A, past.B).max(), cond1_residuals(future.A, future.B).max()),
            1e-8);
  c.at_most("energy_link", std::abs(0.5 * future.eta.squaredNorm() - 0.5 * past.eta.squaredNorm()), 1e-8);
}

void oracle_checks(Collector& c) {
  auto f = WavepacketFrame::standard(1, 0.1);
  f.a[0] = 1.0;
  const auto run = [&](double dt) {
    const Grid g = line_grid(0.0, 8.0, 512, dt);
    return propagate(g, quartic(), evaluate_phi0(f, g.points()), 0.1, 1.0);
  };
  const Grid g = line_grid(0.0, 8.0, 512, 1e-2);
  const CVector p1 = run(1e-2), p2 = run(5e-3), p3 = run(2.5e-3);
  c.at_least("strang_temporal_order", std::log2(g.norm(p1 - p2) / g.norm(p2 - p3)), 1.9);

  auto f2 = WavepacketFrame::standard(1, 0.2);
  f2.a[0] = 1.0;
  const Grid gn = line_grid(0.0, 10.0, 512, 1e-3);
  const CVector psi0 = evaluate_phi0(f2, gn.points());
  SplitOperator op(gn, quartic(), 0.2);
  CVector psi = psi0;
  op.advance(psi, 5.0);
  c.at_most("norm_drift", std::abs(gn.norm(psi) - gn.norm(psi0)), 1e-11);

  // Doubling the grid must not move the comparison against the asymptotic approximation.
  const double hbar = 0.05;
  const auto traj = integrate_flow(quartic(), ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1)),
                                   1.0, tight(1e-12));
  HierarchyOptions ho;
  ho.l = 2;
  ho.output_times = {0.0, 1.0};
  const auto h =
      integrate_hierarchy(traj, quartic(), BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0}), ho);
  const auto error_on = [&](const Grid& grid) {
    const CVector start = assemble_wavefunction(h, 0, hbar, 2, grid.points());
    const CVector ref = propagate(grid, quartic(), start, hbar, 1.0);
    return l2_error(assemble_wavefunction(h, 1, hbar, 2, grid.points()), ref, grid).raw;
  };
  const Grid coarse(GridSpec::around(traj, hbar, 1024, 1e-3));
  const double e1 = error_on(coarse), e2 = error_on(coarse.refined());
  c.at_most("grid_doubling_change", std::abs(e1 - e2) / e1, 1e-2);
}

void runner_checks(Collector& c) {
  const std::string text = R"(
[potential]
dim = 1
kind = "polynomial"
terms = [{power = [2], coeff = 0.5}, {power = [4], coeff = 0.1}]

[initial]
a = [1.0]

[run]
hbar = [0.1, 0.05]
g = 0.3
T = 1.0
times = [0.5, 1.0]
b = [0.3]

[grid]
points = 1024
dt = 1e-3
)";
  const RunConfig cfg = parse_config(text, "<validate>");
  const auto base = std::filesystem::temp_directory_path() /
                    ("hagedorn-validate-" + std::to_string(std::random_device{}()));
  std::ostringstream log;
  RunOptions one{base / "a", 1, false}, two{base / "b", 2, false};
  const std::string csv1 = run_propagate(cfg, one, log).str();
  const std::string csv2 = run_propagate(cfg, two, log).str();
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  int differences = csv1 == csv2 ? 0 : 1;
  for (const char* file : {"run.json", "hierarchy.json", "trajectory.json"}) {
    const auto rel = std::filesystem::path("propagate") / run_directory(0.05) / file;
    differences += slurp(one.out / rel) == slurp(two.out / rel) ? 0 : 1;
  }
  std::filesystem::remove_all(base);
  c.exact("determinism_differences", differences, 0.0, "1 job vs 2 jobs, CSV and JSON bytes");
}

}  // namespace

bool ValidateReport::passed() const { return failures() == 0; }

std::size_t ValidateReport::failures() const {
  std::size_t n = 0;
  for (const auto& i : items) n += i.passed ? 0 : 1;
  return n;
}

const Invariant* ValidateReport::find(const std::string& name) const {
  for (const auto& i : items)
    if (i.name == name) return &i;
  return nullptr;
}

void ValidateReport::print(std::ostream& os) const {
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-34s %-6s %12s %12s %8s  %s\n", "module", "invariant", "kind", "value",
                "limit", "margin", "result");
  os << line;
  for (const auto& i : items) {
    const char* kind = i.kind == Invariant::Kind::AtMost ? "<=" : i.kind == Invariant::Kind::AtLeast ? ">=" : "==";
    char margin[32];
    if (std::isinf(i.margin))
      std::snprintf(margin, sizeof margin, "%s", i.margin > 0 ? "inf" : "-inf");
    else
      std::snprintf(margin, sizeof margin, "%.2f", i.margin);
    std::snprintf(line, sizeof line, "%-18s %-34s %-6s %12.4g %12.4g %8s  %s", i.module.c_str(), i.name.c_str(), kind,
                  i.value, i.limit, margin, i.passed ? "PASS" : "FAIL");
    os << line;
    if (!i.note.empty() && !i.passed) os << "  (" << i.note << ")";
    os << '\n';
  }
  os << items.size() - failures() << "/" << items.size() << " invariants hold\n";
}

ValidateReport run_validate(const ValidateOptions& options) {
  Collector c(options);
  std::mt19937_64 rng(options.seed);
  c.group("multiindex", [&] { multiindex_checks(c); });
  c.group("potential_models", [&] { potential_checks(c); });
  c.group("classical_flow", [&] { flow_checks(c, rng); });
  c.group("wavepacket_basis", [&] { basis_checks(c, rng, options.position); });
  c.group("coefficient_hier", [&] { hierarchy_checks(c); });
  c.group("truncation", [&] { truncation_checks(c); });
  c.group("scattering", [&] { scattering_checks(c); });
  c.group("reference_oracle", [&] { oracle_checks(c); });
  c.group("cli_runner", [&] { runner_checks(c); });
  return ValidateReport{c.take()};
}

}  // namespace hagedorn::runner
