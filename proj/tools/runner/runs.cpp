#include "runs.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "hagedorn/scattering.hpp"
#include "hagedorn/serialize.hpp"

namespace hagedorn::runner {

namespace {

using nlohmann::json;

FlowOptions flow_options() {
  FlowOptions fo;
  fo.tol = 1e-12;
  return fo;
}

// Rethrows with the hbar that failed, keeping the original error code.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    std::string what = e.what();
    const std::string prefix = std::string(to_string(e.code())) + ": ";
    if (what.starts_with(prefix)) what.erase(0, prefix.size());
    throw Error(e.code(), context + ": " + what);
  }
}

json bound_summary(const Propagation& p, const PotentialModel& pot) {
  const auto b = bound_constants(p.traj, pot, 1.0, default_probe_order(pot, p.hierarchy.l()));
  json out = to_json(b);
  out["order_bounds"] = to_json(check_order_bounds(p.hierarchy, b));
  out["sparsity_violation"] = p.hierarchy.sparsity_violation();
  return out;
}

}  // namespace

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  if (threads == 1 || n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Propagation propagate_one(const RunConfig& cfg, double hbar, double T, const std::vector<double>& times,
                          std::optional<int> forced_l) {
  const auto start = std::chrono::steady_clock::now();
  const auto& pot = cfg.potential;
  Propagation p;
  p.hbar = hbar;
  p.times = times;
  p.traj = integrate_flow(pot, cfg.initial.state, T, flow_options());

  // Output time 0 is always recorded so the oracle can start from the assembled state.
  HierarchyOptions ho;
  ho.output_times = {0.0};
  for (double t : times)
    if (t > 0.0) ho.output_times.push_back(t);
  for (double t : times) p.index.push_back(t > 0.0 ? static_cast<std::size_t>(
                                                         std::find(ho.output_times.begin() + 1, ho.output_times.end(), t) -
                                                         ho.output_times.begin())
                                                   : 0);

  int l_build = 1;
  if (forced_l) {
    l_build = *forced_l;
  } else if (cfg.run.mode == TruncationMode::FixedG) {
    l_build = choose_l_fixed(cfg.run.g, hbar);
  } else {
    l_build = cfg.run.l_max;
  }
  const BasisCoefficients c0 = initial_coefficients(cfg, l_build);
  p.J = std::max(0, c0.max_nonzero_degree());
  if (cfg.initial.tail) p.truncation_tail = tail_truncation_norm(*cfg.initial.tail, cfg.dim(), p.J);
  ho.l = l_build;
  p.hierarchy = integrate_hierarchy(p.traj, pot, c0, ho);
  p.profile = norm_profile(p.hierarchy, hbar);
  if (forced_l) {
    p.plan = TruncationPlan{TruncationMode::FixedG, hbar * *forced_l, hbar, *forced_l};
  } else {
    p.plan = choose_l(cfg.run.mode, hbar, cfg.run.g,
                      cfg.run.mode == TruncationMode::Empirical ? std::optional(p.profile) : std::nullopt);
  }

  if (cfg.dim() <= 2) {
    p.grid.emplace(GridSpec::around(p.traj, hbar, cfg.grid.points, cfg.grid.dt, cfg.grid.margin));
    const RMatrix& pts = p.grid->points();
    for (std::size_t idx : p.index) p.approx.push_back(assemble_wavefunction(p.hierarchy, idx, hbar, p.plan.l, pts));
    if (cfg.run.oracle) {
      OracleOptions oo;
      oo.order = cfg.grid.order;
      const CVector psi0 = assemble_wavefunction(p.hierarchy, 0, hbar, p.plan.l, pts);
      std::vector<double> positive;
      for (double t : times)
        if (t > 0.0) positive.push_back(t);
      const auto out = positive.empty() ? std::vector<CVector>{} : propagate(*p.grid, pot, psi0, hbar, positive, oo);
      std::size_t k = 0;
      for (double t : times) p.oracle.push_back(t > 0.0 ? out[k++] : psi0);
    }
  }
  p.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return p;
}

CsvTable run_propagate(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const auto& hbars = cfg.run.hbar;
  std::vector<std::vector<std::vector<std::string>>> rows(hbars.size());
  parallel_for(hbars.size(), opt.jobs, [&](std::size_t r) {
    const double hbar = hbars[r];
    try {
      const Propagation p = propagate_one(cfg, hbar, cfg.run.T, cfg.run.times);
      json summary = {{"schema_version", kSchemaVersion},
                      {"mode", "propagate"},
                      {"hbar", hbar},
                      {"l_mode", to_string(p.plan.mode)},
                      {"l", p.plan.l},
                      {"J", p.J},
                      {"norm_profile", p.profile},
                      {"max_cond1_residual", p.traj.max_cond1_residual()},
                      {"bounds", bound_summary(p, cfg.potential)}};
      if (p.truncation_tail) {
        summary["truncation_tail"] = *p.truncation_tail;
        summary["truncation_tail_bound"] = std::exp(-cfg.initial.tail->K * p.J);
      }
      json per_time = json::array();
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        const double t = p.times[i];
        std::optional<double> err, resid, outside;
        if (!p.oracle.empty()) err = l2_error(p.approx[i], p.oracle[i], *p.grid).raw;
        if (p.grid) resid = residual_norm(p.hierarchy, p.index[i], cfg.potential, hbar, p.plan.l, *p.grid);
        if (p.grid && !cfg.run.b.empty()) {
          const CVector& psi = p.oracle.empty() ? p.approx[i] : p.oracle[i];
          outside = localization_mass(*p.grid, psi, p.hierarchy.state(p.index[i]).a, cfg.run.b.front());
        }
        rows[r].push_back({format_number(hbar), format_number(t), to_string(p.plan.mode), std::to_string(p.plan.l),
                           format_optional(err), format_optional(resid), format_optional(outside),
                           opt.timing ? format_number(std::round(p.wall_ms)) : "NA"});
        per_time.push_back({{"t", t}, {"error_vs_oracle", err ? json(*err) : json(nullptr)},
                            {"residual_norm", resid ? json(*resid) : json(nullptr)}});
      }
      summary["times"] = per_time;
      const auto dir = opt.out / "propagate" / run_directory(hbar);
      write_json(dir / "run.json", summary);
      write_json(dir / "trajectory.json", to_json(p.traj));
      write_json(dir / "hierarchy.json", to_json(p.hierarchy));
    } catch (...) {
      rethrow_with_context("propagate hbar=" + format_number(hbar));
    }
  });
  CsvTable table("propagate", {"hbar", "t", "l_mode", "l", "error_vs_oracle", "residual_norm", "outside_mass_b",
                               "wall_time_ms"});
  for (auto& per : rows)
    for (auto& row : per) table.add(std::move(row));
  log << "propagate: " << table.rows() << " rows for " << hbars.size() << " hbar values\n";
  return table;
}

CsvTable run_localize(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  if (cfg.run.b.empty()) throw ConfigError("run.b", 0, "localize needs at least one radius");
  if (cfg.dim() > 2) throw ConfigError("potential.dim", 0, "localize evaluates on a grid and needs d <= 2");
  std::vector<double> radii = cfg.run.b;
  std::sort(radii.begin(), radii.end());
  const auto& hbars = cfg.run.hbar;
  std::vector<std::vector<std::vector<std::string>>> rows(hbars.size());
  std::vector<int> monotone(hbars.size(), 1);
  parallel_for(hbars.size(), opt.jobs, [&](std::size_t r) {
    const double hbar = hbars[r];
    try {
      const Propagation p = propagate_one(cfg, hbar, cfg.run.T, cfg.run.times);
      json per_time = json::array();
      for (std::size_t i = 0; i < p.times.size(); ++i) {
        const RVector& a = p.hierarchy.state(p.index[i]).a;
        double prev_o = INFINITY, prev_a = INFINITY;
        json masses = json::array();
        for (double b : radii) {
          const double ma = localization_mass(*p.grid, p.approx[i], a, b);
          std::optional<double> mo;
          if (!p.oracle.empty()) mo = localization_mass(*p.grid, p.oracle[i], a, b);
          if (ma > prev_a || (mo && *mo > prev_o)) monotone[r] = 0;
          prev_a = ma;
          if (mo) prev_o = *mo;
          rows[r].push_back({format_number(hbar), format_number(p.times[i]), format_number(b), format_optional(mo),
                             format_number(ma)});
          masses.push_back({{"b", b}, {"oracle", mo ? json(*mo) : json(nullptr)}, {"approximation", ma}});
        }
        per_time.push_back({{"t", p.times[i]}, {"masses", masses}});
      }
      write_json(opt.out / "localize" / run_directory(hbar) / "run.json",
                 {{"schema_version", kSchemaVersion},
                  {"mode", "localize"},
                  {"hbar", hbar},
                  {"l", p.plan.l},
                  {"monotone_in_b", monotone[r] == 1},
                  {"times", per_time}});
    } catch (...) {
      rethrow_with_context("localize hbar=" + format_number(hbar));
    }
  });
  CsvTable table("localize", {"hbar", "t", "b", "outside_mass_oracle", "outside_mass_approx"});
  for (auto& per : rows)
    for (auto& row : per) table.add(std::move(row));
  const bool all = std::all_of(monotone.begin(), monotone.end(), [](int m) { return m == 1; });
  log << "localize: outside mass " << (all ? "is" : "is NOT") << " monotone non-increasing in b for every run\n";
  return table;
}

CsvTable run_ehrenfest(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const auto& e = cfg.ehrenfest;
  double lambda = 0.0;
  json fit_json = nullptr;
  if (e.lambda) {
    lambda = *e.lambda;
  } else {
    const auto fit = lyapunov_estimate(integrate_flow(cfg.potential, cfg.initial.state, e.lyapunov_time, flow_options()));
    require_exponential(fit);
    lambda = fit.lambda;
    fit_json = {{"lambda", fit.lambda}, {"N", fit.N}, {"r_squared", fit.r_squared},
                {"r_squared_power", fit.r_squared_power}};
  }
  const auto& hbars = cfg.run.hbar;
  std::vector<EhrenfestSchedule> schedules;
  for (double hbar : hbars) schedules.push_back(ehrenfest_schedule(e.T_prime, lambda, e.tau, e.v, hbar, e.kappa));

  log << "ehrenfest: lambda = " << format_number(lambda) << (e.lambda ? " (given)" : " (fitted)") << "\n";
  log << "  kappa window (" << format_number(schedules.front().window_lo) << ", "
      << format_number(schedules.front().window_hi) << "), kappa = " << format_number(schedules.front().kappa) << "\n";
  log << "  hbar        T           g           l\n";
  for (const auto& s : schedules) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-11.4g %-11.5g %-11.4g %d\n", s.hbar, s.T, s.g, s.l);
    log << line;
  }

  std::vector<std::optional<double>> errors(hbars.size());
  parallel_for(hbars.size(), opt.jobs, [&](std::size_t r) {
    const auto& s = schedules[r];
    try {
      const Propagation p = propagate_one(cfg, s.hbar, s.T, {s.T}, s.l);
      if (!p.oracle.empty()) errors[r] = l2_error(p.approx[0], p.oracle[0], *p.grid).raw;
      write_json(opt.out / "ehrenfest" / run_directory(s.hbar) / "run.json",
                 {{"schema_version", kSchemaVersion},
                  {"mode", "ehrenfest"},
                  {"hbar", s.hbar},
                  {"lambda", lambda},
                  {"lyapunov_fit", fit_json},
                  {"T_prime", s.T_prime},
                  {"tau", s.tau},
                  {"v", s.v},
                  {"window", {s.window_lo, s.window_hi}},
                  {"kappa", s.kappa},
                  {"T", s.T},
                  {"g", s.g},
                  {"l", s.l},
                  {"error_vs_oracle", errors[r] ? json(*errors[r]) : json(nullptr)}});
    } catch (...) {
      rethrow_with_context("ehrenfest hbar=" + format_number(s.hbar));
    }
  });
  CsvTable table("ehrenfest",
                 {"hbar", "lambda", "window_lo", "window_hi", "kappa", "T", "g", "l", "error_vs_oracle"});
  for (std::size_t r = 0; r < hbars.size(); ++r) {
    const auto& s = schedules[r];
    table.add({format_number(s.hbar), format_number(lambda), format_number(s.window_lo), format_number(s.window_hi),
               format_number(s.kappa), format_number(s.T), format_number(s.g), std::to_string(s.l),
               format_optional(errors[r])});
  }
  return table;
}

CsvTable run_scatter(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  ScatterOptions so;
  so.tol = cfg.scatter.tol;
  so.first_check = cfg.scatter.first_check;
  so.t_max = cfg.scatter.t_max;
  if (!cfg.potential.effective_decay()) {
    throw ConfigError("potential.decay", 0, "scattering needs declared decay bounds {beta, v0, v1}");
  }
  const AsymptoticData incoming = [&] {
    try {
      return classical_asymptotics(cfg.potential, cfg.initial.state, Side::Past, so);
    } catch (...) {
      rethrow_with_context("scatter incoming asymptote");
    }
  }();
  const auto& hbars = cfg.run.hbar;
  std::vector<std::vector<std::string>> rows(hbars.size());
  parallel_for(hbars.size(), opt.jobs, [&](std::size_t r) {
    const double hbar = hbars[r];
    try {
      const int l = choose_l_fixed(cfg.scatter.g, hbar);
      const BasisCoefficients c0 = initial_coefficients(cfg, l);
      const ScatteringResult res = smatrix_apply(cfg.potential, incoming, c0, hbar, cfg.scatter.g, so);
      // Identity: outgoing data equal incoming data and the coefficients come back unchanged.
      bool identity = res.outgoing.a == incoming.a && res.outgoing.eta == incoming.eta &&
                      res.outgoing.A == incoming.A && res.outgoing.B == incoming.B && res.outgoing.S == incoming.S;
      for (const auto& [j, v] : c0.entries()) identity = identity && res.out_coefficients[j] == v;
      identity = identity && res.out_coefficients.norm() == c0.norm();
      json j = to_json(res);
      j["mode"] = "scatter";
      j["identity"] = identity;
      write_json(opt.out / "scatter" / run_directory(hbar) / "run.json", j);
      rows[r] = {format_number(hbar), std::to_string(res.l), format_number(res.limits.cauchy_residual),
                 format_number(res.limits.tail_bound), format_number(res.unitarity_deviation),
                 identity ? "true" : "false", res.dimension_caveat ? "d<3" : "none"};
    } catch (...) {
      rethrow_with_context("scatter hbar=" + format_number(hbar));
    }
  });
  CsvTable table("scatter",
                 {"hbar", "l", "cauchy_residual", "tail_bound", "unitarity_deviation", "identity", "caveat"});
  for (auto& row : rows) table.add(std::move(row));
  if (cfg.dim() < 3) log << "scatter: caveat: d = " << cfg.dim() << " is below the dimension range of the convergence proof\n";
  return table;
}

}  // namespace hagedorn::runner
