// End-to-end acceptance runs. Each criterion prints one PASS/FAIL line followed
// by indented diagnostics. With --report the exit status only reflects crashes,
// so the run can sit in ctest while still showing every outcome.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hagedorn/errors.hpp"
#include "hagedorn/oracle.hpp"
#include "hagedorn/scattering.hpp"
#include "hagedorn/truncation.hpp"
#include "testing.hpp"

using namespace hagedorn;

namespace {

struct Outcome {
  int id;
  bool pass;
};

std::vector<Outcome> outcomes;
// Trajectories and p-resolved hierarchies gathered by criteria 1-3 for 4 and 5.
std::vector<std::pair<std::string, Trajectory>> trajectories;
std::vector<std::pair<std::string, CoefficientHierarchy>> hierarchies;
std::vector<std::pair<std::string, PotentialModel>> hierarchy_potentials;

void verdict(int id, bool pass, const std::string& summary) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
  outcomes.push_back({id, pass});
}

void note(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

PotentialModel harmonic() { return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}}); }
PotentialModel quartic() {
  return PotentialModel::polynomial(1, {{MultiIndex{2}, 0.5}, {MultiIndex{4}, 0.1}});
}

FlowOptions tight_flow() {
  FlowOptions fo;
  fo.tol = 1e-12;
  return fo;
}

BasisCoefficients ground() {
  return BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0});
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

void harmonic_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const double hbar = 0.1, T = 2.0 * std::numbers::pi;
  const auto pot = harmonic();
  const auto init = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  const auto traj = integrate_flow(pot, init, T, tight_flow());
  const auto table = MultiIndexTable::make(1, 1);
  BasisCoefficients c0(table, 1);
  c0.values() << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  HierarchyOptions ho;
  ho.l = choose_l_fixed(0.4, hbar);
  ho.p_resolved = true;
  for (int i = 0; i <= 8; ++i) ho.output_times.push_back(T * i / 8);
  const auto h = integrate_hierarchy(traj, pot, c0, ho);

  const Grid grid(GridSpec::around(traj, hbar, 4096, 1e-4));
  const CVector psi0 = assemble_wavefunction(h, 0, hbar, ho.l, grid.points());
  const std::vector<double> times(ho.output_times.begin() + 1, ho.output_times.end());
  const auto ref = propagate(grid, pot, psi0, hbar, times);
  double worst = 0.0;
  for (std::size_t i = 1; i <= 8; ++i) {
    worst = std::max(worst, l2_error(assemble_wavefunction(h, i, hbar, ho.l, grid.points()), ref[i - 1], grid).raw);
  }
  const double elapsed = seconds_since(t0);
  verdict(1, worst <= 1e-6 && elapsed < 30.0,
          fmt("max raw L2 error over 8 times %.3e (<= 1e-6), runtime %.1f s (< 30 s)", worst, elapsed));
  trajectories.emplace_back("harmonic", traj);
  hierarchies.emplace_back("harmonic hbar=0.1", h);
  hierarchy_potentials.emplace_back("harmonic", pot);
}

struct QuarticRun {
  Trajectory traj;
  Grid grid;
  CVector reference;
};

QuarticRun quartic_reference(double hbar, int points) {
  const auto pot = quartic();
  const auto init = ClassicalState::coherent(RVector::Constant(1, 1.0), RVector::Zero(1));
  auto traj = integrate_flow(pot, init, 1.0, tight_flow());
  Grid grid(GridSpec::around(traj, hbar, points, 1e-4));
  const CVector psi0 = evaluate_phi0(WavepacketFrame::from_state(traj.nodes().front(), hbar), grid.points());
  CVector ref = propagate(grid, pot, psi0, hbar, 1.0);
  return {std::move(traj), std::move(grid), std::move(ref)};
}

HierarchyOptions final_time(int l, bool parts) {
  HierarchyOptions ho;
  ho.l = l;
  ho.p_resolved = parts;
  for (int i = 1; i <= 10; ++i) ho.output_times.push_back(0.1 * i);
  return ho;
}

void exponential_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pot = quartic();
  const std::vector<double> hbars{0.2, 0.1, 0.05, 0.025};
  std::vector<double> inv, logs, errs;
  double spatial_change = 0.0;
  for (double hbar : hbars) {
    const auto run = quartic_reference(hbar, 8192);
    const int l = choose_l_fixed(0.4, hbar);
    const auto h = integrate_hierarchy(run.traj, pot, ground(), final_time(l, true));
    const double e =
        l2_error(assemble_wavefunction(h, h.num_times() - 1, hbar, l, run.grid.points()), run.reference, run.grid).raw;
    note("hbar=%.3f l=%d raw error %.3e", hbar, l, e);
    inv.push_back(1.0 / hbar);
    logs.push_back(std::log(e));
    errs.push_back(e);
    hierarchies.emplace_back(fmt("quartic hbar=%g l=%d", hbar, l), h);
    hierarchy_potentials.emplace_back("quartic", pot);
    if (hbar == hbars.back()) {
      trajectories.emplace_back("quartic", run.traj);
      const auto fine = quartic_reference(hbar, 16384);
      const double e2 = l2_error(assemble_wavefunction(h, h.num_times() - 1, hbar, l, fine.grid.points()),
                                 fine.reference, fine.grid).raw;
      spatial_change = std::abs(e2 - e) / e;
      note("doubling grid points at hbar=%.3f changes the error by %.2f%% (< 10%%)", hbar, 100.0 * spatial_change);
    }
  }
  const auto fit = fit_line(inv, logs);
  const double ratio = errs.front() / errs.back();
  const double elapsed = seconds_since(t0);
  verdict(2, fit.slope < 0.0 && fit.r_squared >= 0.95 && ratio >= 1e3 && elapsed < 600.0 && spatial_change < 0.1,
          fmt("slope %.4f (< 0), R^2 %.4f (>= 0.95), error ratio %.2e (>= 1e3), runtime %.1f s", fit.slope,
              fit.r_squared, ratio, elapsed));
}

void optimal_truncation() {
  const double hbar = 0.05;
  const int l_pinned = 12, l_extended = 20;
  const auto pot = quartic();
  const auto run = quartic_reference(hbar, 8192);
  const auto h = integrate_hierarchy(run.traj, pot, ground(), final_time(l_extended, false));
  const auto hp = integrate_hierarchy(run.traj, pot, ground(), final_time(l_pinned, true));
  hierarchies.emplace_back("quartic hbar=0.05 l=12", hp);
  hierarchy_potentials.emplace_back("quartic", pot);

  const std::size_t last = h.num_times() - 1;
  std::vector<double> err;
  for (int l = 1; l <= l_extended; ++l)
    err.push_back(l2_error(assemble_wavefunction(h, last, hbar, l, run.grid.points()), run.reference, run.grid).raw);
  const auto argmin = [&](int upto) {
    return static_cast<int>(std::min_element(err.begin(), err.begin() + upto) - err.begin()) + 1;
  };
  const int m_pinned = argmin(l_pinned);
  const int m_ext = argmin(l_extended);
  // Interior minimum: strictly down to the argmin, then strictly up to the end of the range.
  bool valley = m_pinned > 1 && m_pinned < l_pinned;
  for (int l = 1; l < l_pinned && valley; ++l) {
    const bool down = l < m_pinned;
    if (down != (err[l] < err[l - 1])) valley = false;
  }
  std::vector<double> profile = norm_profile(h, hbar);
  profile.resize(l_pinned);
  const int l_emp = choose_l_empirical(profile);
  const bool near = std::abs(l_emp - m_pinned) <= 1;
  std::string line;
  for (int l = 1; l <= l_extended; ++l) line += fmt(" %d:%.2e", l, err[l - 1]);
  note("error by l:%s", line.c_str());
  note("argmin over l=1..%d is %d; over l=1..%d it is %d", l_pinned, m_pinned, l_extended, m_ext);
  std::vector<double> full = norm_profile(h, hbar);
  note("empirical l on l=1..%d profile: %d; on the l=1..%d profile: %d", l_pinned, l_emp, l_extended,
       choose_l_empirical(full));
  verdict(3, valley && near,
          fmt("error over l=1..%d %s; empirical l=%d vs argmin %d", l_pinned,
              valley ? "has an interior minimum" : "has no interior minimum", l_emp, m_pinned));
}

void sparsity_and_bounds() {
  bool ok = true;
  for (std::size_t i = 0; i < hierarchies.size(); ++i) {
    const auto& [name, h] = hierarchies[i];
    const auto& pot = hierarchy_potentials[i].second;
    const auto& traj = name.rfind("harmonic", 0) == 0 ? trajectories[0].second : trajectories[1].second;
    const auto b = bound_constants(traj, pot, 1.0, default_probe_order(pot, h.l()));
    const auto orders = check_order_bounds(h, b);
    const auto parts = verify_p_decomposition(h, b, 4);
    const bool here = h.sparsity_violation() == 0.0 && h.part_sparsity_violation() == 0.0 && orders.holds() &&
                      parts.holds() && parts.telescoping <= 1e-10;
    note("%s: sparsity %g, order-bound ratio %.3e, part-bound ratio %.3e (k<=4), telescoping %.2e", name.c_str(),
         h.sparsity_violation() + h.part_sparsity_violation(), orders.worst_ratio, parts.worst_ratio,
         parts.telescoping);
    ok = ok && here;
  }
  verdict(4, ok, fmt("%zu runs: exact sparsity, order and part bounds, telescoping <= 1e-10", hierarchies.size()));
}

void cond1_and_ladders() {
  double cond1 = 0.0;
  for (const auto& [name, traj] : trajectories) {
    const double r = traj.max_cond1_residual();
    note("cond1 residual along %s trajectory: %.2e", name.c_str(), r);
    cond1 = std::max(cond1, r);
  }

  std::mt19937_64 rng(2024);
  double commutator = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const auto table = MultiIndexTable::make(d, 7);
    const auto f = testing::random_frame(d, rng, 0.5);
    for (int trial = 0; trial < 4; ++trial) {
      BasisCoefficients c(table, 5);
      c.values() = testing::random_vector(c.values().size(), rng);
      const double scale = c.values().cwiseAbs().maxCoeff();
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) {
          CVector diff = apply_lowering(f, m, apply_raising(f, n, c)).resized(7).values() -
                         apply_raising(f, n, apply_lowering(f, m, c)).resized(7).values();
          if (m == n) diff -= c.resized(7).values();
          commutator = std::max(commutator, diff.cwiseAbs().maxCoeff() / scale);
        }
    }
  }

  const double hbar = 0.1;
  const auto f = testing::random_frame(1, rng, hbar);
  const double width = std::sqrt(hbar) * operator_norm(f.A);
  GridSpec s;
  s.center = f.a;
  s.half_width = RVector::Constant(1, 14.0 * width);
  s.points = {8192};
  const Grid g(s);
  const CMatrix phi = evaluate_basis(f, 8, g.points());
  const CMatrix G = phi.adjoint() * phi * g.cell_volume();
  const double gram = (G - CMatrix::Identity(9, 9)).cwiseAbs().maxCoeff();

  note("cond1 of random test frames: %.2e", cond1_residuals(f.A, f.B).max());
  verdict(5, cond1 < 1e-9 && commutator <= 1e-12 && gram < 1e-6,
          fmt("cond1 max %.2e (< 1e-9), ladder commutator %.2e (<= 1e-12), Gram %.2e (< 1e-6)", cond1, commutator,
              gram));
}

void localization() {
  const std::vector<double> hbars{0.2, 0.1, 0.05, 0.025};
  std::vector<double> inv, logs, mass;
  for (double hbar : hbars) {
    const auto run = quartic_reference(hbar, 8192);
    const double m = localization_mass(run.grid, run.reference, run.traj.back().a, 0.5);
    note("hbar=%.3f outside mass (b=0.5, t=1) %.3e", hbar, m);
    inv.push_back(1.0 / hbar);
    logs.push_back(std::log(m));
    mass.push_back(m);
  }
  const auto fit = fit_line(inv, logs);
  verdict(6, strictly_decreasing(mass) && fit.slope < 0.0 && fit.r_squared >= 0.9,
          fmt("outside mass %s, slope %.3f (< 0), R^2 %.4f (>= 0.9)",
              strictly_decreasing(mass) ? "strictly decreasing" : "not strictly decreasing", fit.slope,
              fit.r_squared));
}

void ehrenfest() {
  const auto pot = PotentialModel::double_well(1);
  const auto init = ClassicalState::coherent(RVector::Zero(1), RVector::Zero(1));
  const auto fit = lyapunov_estimate(integrate_flow(pot, init, 12.0, tight_flow()));
  require_exponential(fit);
  const double T_prime = 0.1;
  std::vector<double> errs;
  bool ok = std::abs(fit.lambda - 1.0) <= 0.05;
  note("Lyapunov fit lambda %.4f (R^2 %.5f)", fit.lambda, fit.r_squared);
  for (double hbar : {0.1, 0.05, 0.02}) {
    const auto s = ehrenfest_schedule(T_prime, fit.lambda, 0.0, 0.0, hbar);
    const auto traj = integrate_flow(pot, init, s.T, tight_flow());
    trajectories.emplace_back(fmt("double well hbar=%g", hbar), traj);
    HierarchyOptions ho;
    ho.l = s.l;
    ho.output_times = {s.T};
    const auto h = integrate_hierarchy(traj, pot, ground(), ho);
    const Grid grid(GridSpec::around(traj, hbar, 4096, 1e-4));
    const CVector psi0 = evaluate_phi0(WavepacketFrame::from_state(traj.nodes().front(), hbar), grid.points());
    const CVector ref = propagate(grid, pot, psi0, hbar, s.T);
    const double e = l2_error(assemble_wavefunction(h, 0, hbar, s.l, grid.points()), ref, grid).raw;
    note("hbar=%.3f window (%.3f, %.3f) kappa %.3f T %.4f l %d raw error %.3e", hbar, s.window_lo, s.window_hi,
         s.kappa, s.T, s.l, e);
    ok = ok && s.window_lo < s.window_hi && e < 0.1;
    errs.push_back(e);
  }
  verdict(7, ok && strictly_decreasing(errs),
          fmt("lambda %.4f (1 +- 5%%), errors %.2e %.2e %.2e (< 0.1, decreasing)", fit.lambda, errs[0], errs[1],
              errs[2]));
}

void scattering() {
  auto pot = PotentialModel::gaussian_sum(1, {{RVector::Zero(1), 1.0, 4.0}});
  pot.with_decay({8.0, 1224.0, 2.0});
  const auto certified = decay_check(pot, RVector::Constant(1, -30.0), RVector::Constant(1, 30.0), 6001, 4);
  note("decay constants (beta 8, v0 1224, v1 2): worst ratio on [-30, 30] %.3f", certified.worst_ratio);

  bool converged = true, caveat = true;
  std::vector<double> dev;
  const auto orbit = [&](double eta, bool primary) {
    const auto in = classical_asymptotics(
        pot, ClassicalState::coherent(RVector::Constant(1, -10.0), RVector::Constant(1, eta)), Side::Past);
    std::vector<double> d;
    for (double hbar : {0.2, 0.1, 0.05}) {
      const auto r = smatrix_apply(pot, in, ground(), hbar, 0.3);
      note("eta(0)=%g hbar=%.2f l=%d Cauchy %.2e tail %.2e eta+ %.6f unitarity deviation %.3e", eta, hbar, r.l,
           r.limits.cauchy_residual, r.limits.tail_bound, r.outgoing.eta[0], r.unitarity_deviation);
      if (primary) {
        converged = converged && r.limits.cauchy_residual < 1e-6;
        caveat = caveat && r.dimension_caveat;
      }
      d.push_back(r.unitarity_deviation);
    }
    return d;
  };
  dev = orbit(3.0, true);
  const auto dev_fast = orbit(5.0, false);
  note("faster transmitted orbit eta(0)=5: deviations %.2e %.2e %.2e", dev_fast[0], dev_fast[1], dev_fast[2]);

  auto free = PotentialModel::free(1);
  free.with_decay({8.0, 1.0, 1.0});
  const auto in0 = classical_asymptotics(
      free, ClassicalState::coherent(RVector::Constant(1, -10.0), RVector::Constant(1, 3.0)), Side::Past);
  bool identity = true;
  for (double hbar : {0.2, 0.1, 0.05}) {
    const auto r = smatrix_apply(free, in0, ground(), hbar, 0.3);
    identity = identity && r.out_coefficients[MultiIndex{0}] == Complex(1.0) && r.out_coefficients.norm() == 1.0 &&
               r.outgoing.a == in0.a && r.outgoing.A == in0.A && r.unitarity_deviation == 0.0;
  }
  const bool decreasing = strictly_decreasing(dev);
  verdict(8, converged && decreasing && identity && caveat,
          fmt("Cauchy < 1e-6 %s; unitarity deviation %.2e %.2e %.2e %s; V=0 identity %s; d=1 caveat %s",
              converged ? "yes" : "no", dev[0], dev[1], dev[2], decreasing ? "decreasing" : "not decreasing",
              identity ? "exact" : "broken", caveat ? "flagged" : "missing"));
}

void combinatorics() {
  std::size_t checks = 0;
  bool ok = true;
  for (int d = 1; d <= 4; ++d)
    for (int q = 0; q <= 10; ++q) {
      const auto exact = enumerate_exact(d, q);
      ok = ok && exact.size() == count_exact_degree(d, q) && count_exact_degree(d, q) == binomial(d - 1 + q, d - 1);
      ok = ok && enumerate_upto(d, q).size() == count_upto(d, q) && count_upto(d, q) == binomial(q + d, d);
      checks += 2;
      for (int n = 0; n <= q; ++n, ++checks) ok = ok && shell_growth_inequality_holds(d, n, q);
    }
  for (int q = 1; q <= 10; ++q)
    for (int p = 2; p <= q + 1; ++p, ++checks) ok = ok && hockey_stick_holds(p, q);
  verdict(9, ok, fmt("%zu exact-integer checks for d <= 4, q <= 10", checks));
}

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--report") == 0) report_only = true;

  const std::vector<std::pair<int, std::function<void()>>> steps{
      {1, harmonic_exactness}, {2, exponential_scaling}, {3, optimal_truncation}, {4, sparsity_and_bounds},
      {5, cond1_and_ladders},  {6, localization},        {7, ehrenfest},         {8, scattering},
      {9, combinatorics}};
  int crashed = 0;
  for (const auto& [id, step] : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("aborted: ") + e.what());
      ++crashed;
    }
  }
  const auto failed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return !o.pass; });
  std::printf("summary: %zu passed, %td failed\n", outcomes.size() - static_cast<std::size_t>(failed), failed);
  if (crashed) return 2;
  return report_only || failed == 0 ? 0 : 1;
}
