#include "hagedorn/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

struct KkContext {
  const TaylorCoefficients& taylor;
  const CMatrix& A;
  const MultiIndexTable& table;
  Complex scale;
  std::span<Complex> out;
  std::vector<CVector>& scratch;
  MultiIndex m;
};

void apply_X(const MultiIndexTable& table, const CMatrix& A, int axis, int support,
             const CVector& v, CVector& w) {
  w.head(static_cast<Eigen::Index>(table.size_upto(support + 1))).setZero();
  ladder::position_add(table, A, axis, support,
                       {v.data(), static_cast<std::size_t>(v.size())}, 1.0,
                       {w.data(), static_cast<std::size_t>(w.size())});
}

// Walks the multi-indices of the current degree one axis at a time so that
// X_0^{m_0} ... X_{i-1}^{m_{i-1}} c is shared by every m with that prefix.
void kk_recurse(KkContext& ctx, int axis, int remaining, const CVector& v, int support) {
  const int d = ctx.table.dim();
  CVector* cur = &ctx.scratch[static_cast<std::size_t>(2 * axis)];
  CVector* nxt = &ctx.scratch[static_cast<std::size_t>(2 * axis + 1)];
  const CVector* src = &v;
  if (axis == d - 1) {
    ctx.m.set(axis, remaining);
    const double coef = ctx.taylor.at(ctx.m);
    if (coef == 0.0) return;
    for (int e = 0; e < remaining; ++e) {
      apply_X(ctx.table, ctx.A, axis, support + e, *src, *nxt);
      std::swap(cur, nxt);
      src = cur;
    }
    const std::size_t n = ctx.table.size_upto(support + remaining);
    const Complex s = ctx.scale * coef;
    for (std::size_t i = 0; i < n; ++i) ctx.out[i] += s * (*src)[static_cast<Eigen::Index>(i)];
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    ctx.m.set(axis, e);
    kk_recurse(ctx, axis + 1, remaining - e, *src, support + e);
    if (e < remaining) {
      apply_X(ctx.table, ctx.A, axis, support + e, *src, *nxt);
      std::swap(cur, nxt);
      src = cur;
    }
  }
  ctx.m.set(axis, 0);
}

double ratio_from_logs(double norm, double log_bound) {
  if (norm == 0.0) return 0.0;
  if (!std::isfinite(log_bound)) return std::numeric_limits<double>::infinity();
  return std::exp(std::log(norm) - log_bound);
}

}  // namespace

void apply_Kk_add(const MultiIndexTable& table, const TaylorCoefficients& taylor, const CMatrix& A,
                  int k, int n_in, std::span<const Complex> in, Complex scale,
                  std::span<Complex> out, std::vector<CVector>& scratch) {
  require(table.dim() == taylor.dim(), "dimension mismatch in K_k");
  require(k >= 0 && k <= taylor.max_order(), "Taylor data does not reach the requested order");
  if (n_in + k > table.capacity()) {
    raise(ErrorCode::SupportOverflow, "K_k application exceeds the table capacity");
  }
  if (taylor.shell_max_abs(k) == 0.0) return;
  const int d = table.dim();
  const auto n = static_cast<Eigen::Index>(table.size());
  scratch.resize(static_cast<std::size_t>(2 * d + 1));
  for (auto& s : scratch) {
    if (s.size() != n) s = CVector::Zero(n);
  }
  CVector& v = scratch.back();
  const std::size_t n_used = table.size_upto(n_in);
  for (std::size_t i = 0; i < n_used; ++i) v[static_cast<Eigen::Index>(i)] = in[i];
  v.tail(n - static_cast<Eigen::Index>(n_used)).setZero();
  KkContext ctx{taylor, A, table, scale, out, scratch, MultiIndex(d)};
  kk_recurse(ctx, 0, k, v, n_in);
}

BasisCoefficients apply_Kk(const TaylorCoefficients& taylor, const WavepacketFrame& frame, int k,
                           const BasisCoefficients& c) {
  require(frame.dim() == c.dim() && taylor.dim() == c.dim(), "dimension mismatch in K_k");
  if (c.frame() && !(*c.frame() == frame)) {
    raise(ErrorCode::FrameMismatch, "coefficients are bound to a different wavepacket frame");
  }
  const int support = c.support() + k;
  const auto table = c.table().capacity() >= support ? c.table_ptr()
                                                     : MultiIndexTable::make(c.dim(), support);
  BasisCoefficients out(table, support);
  out.bind(c.frame() ? c.frame() : std::make_shared<const WavepacketFrame>(frame));
  const auto n = static_cast<Eigen::Index>(table->size());
  CVector in = CVector::Zero(n);
  for (Eigen::Index i = 0; i < c.values().size(); ++i) {
    in[static_cast<Eigen::Index>(table->position(c.table().at(static_cast<std::size_t>(i))))] =
        c.values()[i];
  }
  CVector acc = CVector::Zero(n);
  std::vector<CVector> scratch;
  apply_Kk_add(*table, taylor, frame.A, k, c.support(),
               {in.data(), static_cast<std::size_t>(n)}, 1.0,
               {acc.data(), static_cast<std::size_t>(n)}, scratch);
  out.values() = acc.head(out.values().size());
  return out;
}

const CVector& CoefficientHierarchy::c(std::size_t i, int k) const {
  require(i < times_.size() && k >= 0 && k < l_, "hierarchy index out of range");
  return c_[i][static_cast<std::size_t>(k)];
}

BasisCoefficients CoefficientHierarchy::coefficients(std::size_t i, int k) const {
  const int support = J_ + 3 * k;
  const CVector& full = c(i, k);
  return BasisCoefficients(table_, support,
                           full.head(static_cast<Eigen::Index>(table_->size_upto(support))));
}

std::size_t CoefficientHierarchy::part_slot(int k, int p) const {
  require(p_resolved_, "hierarchy was not integrated with p-resolved parts");
  require(k >= 1 && k < l_ && p >= 1 && p <= k, "part index out of range");
  return static_cast<std::size_t>((k - 1) * k / 2 + (p - 1));
}

const CVector& CoefficientHierarchy::part(std::size_t i, int k, int p) const {
  if (!p_resolved_) raise(ErrorCode::NotPResolved, "hierarchy has no p-resolved parts");
  require(i < times_.size(), "time index out of range");
  return parts_[i][part_slot(k, p)];
}

double CoefficientHierarchy::sup_norm(int k) const {
  double m = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) m = std::max(m, norm(i, k));
  return m;
}

CoefficientHierarchy integrate_hierarchy(const Trajectory& traj, const PotentialModel& pot,
                                         const BasisCoefficients& c0_init,
                                         const HierarchyOptions& options) {
  const int d = pot.dim();
  require(traj.size() >= 1, "empty trajectory");
  require(traj.front().dim() == d && c0_init.dim() == d, "dimension mismatch in hierarchy");
  require(options.l >= 1, "the hierarchy needs l >= 1");
  require(traj.t_end() >= traj.t_begin(), "hierarchy integration runs forward in time");

  const int l = options.l;
  const int J = std::max(0, c0_init.max_nonzero_degree());
  const int capacity = J + 3 * (l - 1);

  std::vector<double> outputs = options.output_times;
  if (outputs.empty()) outputs.push_back(traj.t_end());
  const double slack = 1e-12 * std::max(1.0, std::abs(traj.t_end()));
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    require(outputs[i] >= traj.t_begin() - slack && outputs[i] <= traj.t_end() + slack,
            "output time outside the trajectory span");
    require(i == 0 || outputs[i] >= outputs[i - 1], "output times must be non-decreasing");
  }

  const std::size_t n_parts = options.p_resolved ? static_cast<std::size_t>(l * (l - 1) / 2) : 0;
  const std::size_t n_vec = static_cast<std::size_t>(l) + n_parts;
  const std::uint64_t slots = count_upto(d, capacity);
  if (slots > options.budget || slots * n_vec > options.budget) {
    std::ostringstream os;
    os << "hierarchy needs " << slots << " x " << n_vec << " complex unknowns (budget "
       << options.budget << ")";
    raise(ErrorCode::SupportOverflow, os.str());
  }

  CoefficientHierarchy h;
  h.table_ = MultiIndexTable::make(d, capacity);
  h.J_ = J;
  h.l_ = l;
  h.p_resolved_ = options.p_resolved;
  h.t0_ = traj.t_begin();
  const MultiIndexTable& table = *h.table_;
  const auto n_slot = static_cast<Eigen::Index>(table.size());
  const Eigen::Index n_cls = classical_size(d);

  auto vec_offset = [&](std::size_t v) { return n_cls + 2 * n_slot * static_cast<Eigen::Index>(v); };
  auto part_vec = [&](int k, int p) {
    return static_cast<std::size_t>(l) + static_cast<std::size_t>((k - 1) * k / 2 + (p - 1));
  };

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(n_cls + 2 * n_slot * static_cast<Eigen::Index>(n_vec));
  y0.head(n_cls) = pack_classical(traj.front());
  {
    auto* c0 = reinterpret_cast<Complex*>(y0.data() + vec_offset(0));
    const auto& vals = c0_init.values();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      if (vals[i] == Complex(0.0)) continue;
      c0[table.position(c0_init.table().at(static_cast<std::size_t>(i)))] = vals[i];
    }
  }

  const int taylor_order = std::max(2, l + 1);
  TaylorCoefficients taylor(MultiIndexTable::make(d, taylor_order), taylor_order);
  std::vector<CVector> scratch;
  ClassicalState scratch_state;
  RVector a(d);
  const Complex minus_i(0.0, -1.0);

  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    a = y.head(d);
    pot.taylor_coeffs_into(a, taylor);
    classical_rhs(taylor, y, d, dydt);
    dydt.tail(dydt.size() - n_cls).setZero();
    if (l == 1) return;
    unpack_classical(y, d, scratch_state);
    const CMatrix& A = scratch_state.A;
    auto in_vec = [&](std::size_t v) {
      return std::span<const Complex>(reinterpret_cast<const Complex*>(y.data() + vec_offset(v)),
                                      static_cast<std::size_t>(n_slot));
    };
    auto out_vec = [&](std::size_t v) {
      return std::span<Complex>(reinterpret_cast<Complex*>(dydt.data() + vec_offset(v)),
                                static_cast<std::size_t>(n_slot));
    };
    for (int n = 1; n < l; ++n) {
      for (int m = 0; m < n; ++m) {
        apply_Kk_add(table, taylor, A, n + 2 - m, J + 3 * m, in_vec(static_cast<std::size_t>(m)), minus_i,
                     out_vec(static_cast<std::size_t>(n)), scratch);
      }
    }
    if (!options.p_resolved) return;
    for (int k = 1; k < l; ++k) {
      apply_Kk_add(table, taylor, A, k + 2, J, in_vec(0), minus_i, out_vec(part_vec(k, 1)), scratch);
      for (int p = 2; p <= k; ++p) {
        for (int n = p - 1; n <= k - 1; ++n) {
          apply_Kk_add(table, taylor, A, k + 2 - n, J + n + 2 * (p - 1), in_vec(part_vec(n, p - 1)),
                       minus_i, out_vec(part_vec(k, p)), scratch);
        }
      }
    }
  };

  auto support_leak = [&](const Eigen::VectorXd& y, std::size_t v, int support) {
    const auto* c = reinterpret_cast<const Complex*>(y.data() + vec_offset(v));
    double worst = 0.0;
    for (auto i = static_cast<Eigen::Index>(table.size_upto(support)); i < n_slot; ++i) {
      worst = std::max(worst, std::abs(c[i]));
    }
    return worst;
  };

  OdeOptions ode;
  ode.rtol = options.tol;
  ode.atol = options.tol;
  // Coefficient tolerances follow the size of the initial data, so scaling c0
  // scales every error ratio by one and leaves the step sequence unchanged.
  const double c0_norm = c0_init.norm();
  ode.atol_components = Eigen::VectorXd::Constant(y0.size(), options.tol * (c0_norm > 0.0 ? c0_norm : 1.0));
  ode.atol_components.head(n_cls).setConstant(options.tol);
  ode.max_steps = options.max_steps;
  DormandPrince45 solver(rhs, ode);
  solver.reset(traj.t_begin(), y0);

  double arg = unwrap_detA_arg(traj.front().A, traj.front().detA_arg);
  ClassicalState probe;
  auto observer = [&](const StepView& step) {
    if (!step.y1.allFinite()) raise(ErrorCode::StepSizeUnderflow, "hierarchy integration blew up");
    unpack_classical(step.y1, d, probe);
    const double next = unwrap_detA_arg(probe.A, arg);
    if (std::abs(next - arg) > std::numbers::pi / 2) return false;
    arg = next;
    for (int k = 0; k < l; ++k) {
      h.sparsity_violation_ =
          std::max(h.sparsity_violation_, support_leak(step.y1, static_cast<std::size_t>(k), J + 3 * k));
    }
    if (options.p_resolved) {
      for (int k = 1; k < l; ++k) {
        for (int p = 1; p <= k; ++p) {
          h.part_sparsity_violation_ = std::max(h.part_sparsity_violation_,
                                                support_leak(step.y1, part_vec(k, p), J + k + 2 * p));
        }
      }
    }
    return true;
  };

  auto read_vec = [&](const Eigen::VectorXd& y, std::size_t v) {
    CVector out(n_slot);
    const auto* c = reinterpret_cast<const Complex*>(y.data() + vec_offset(v));
    for (Eigen::Index i = 0; i < n_slot; ++i) out[i] = c[i];
    return out;
  };

  for (double t : outputs) {
    t = std::clamp(t, traj.t_begin(), traj.t_end());
    if (t != solver.t()) solver.advance_to(t, observer);
    const Eigen::VectorXd& y = solver.y();
    ClassicalState s;
    s.t = t;
    unpack_classical(y, d, s);
    s.detA_arg = unwrap_detA_arg(s.A, arg);
    const ClassicalState ref = traj.state_at(t);
    h.trajectory_deviation_ = std::max(
        {h.trajectory_deviation_, (s.a - ref.a).lpNorm<Eigen::Infinity>(),
         (s.eta - ref.eta).lpNorm<Eigen::Infinity>()});
    h.times_.push_back(t);
    h.states_.push_back(std::move(s));
    std::vector<CVector> cs;
    for (int k = 0; k < l; ++k) cs.push_back(read_vec(y, static_cast<std::size_t>(k)));
    h.c_.push_back(std::move(cs));
    if (options.p_resolved) {
      std::vector<CVector> ps;
      for (std::size_t v = 0; v < n_parts; ++v) ps.push_back(read_vec(y, static_cast<std::size_t>(l) + v));
      h.parts_.push_back(std::move(ps));
    }
  }
  h.steps_ = solver.accepted_steps();
  return h;
}

int default_probe_order(const PotentialModel& pot, int l) {
  const int deg = pot.polynomial_degree();
  if (deg >= 0) return deg;
  return 4 * l + 8;
}

BoundConstants bound_constants(const Trajectory& traj, const PotentialModel& pot, double delta,
                               int n_probe, int refine) {
  require(delta > 0.0, "delta must be positive");
  require(n_probe >= 0 && refine >= 0, "n_probe and refine must be >= 0");
  require(traj.size() >= 1, "empty trajectory");
  const int d = pot.dim();
  BoundConstants b;
  b.delta = delta;
  b.n_probe = n_probe;
  b.T = std::abs(traj.t_end() - traj.t_begin());
  b.D3 = static_cast<double>(binomial(d + 2, d - 1));
  const int deg = pot.polynomial_degree();
  b.probe_exhaustive = deg >= 0 && n_probe >= deg;

  TaylorCoefficients taylor(MultiIndexTable::make(d, n_probe), n_probe);
  double d1 = 1.0, d2 = 1.0;
  auto visit = [&](const ClassicalState& s) {
    pot.taylor_coeffs_into(s.a, taylor);
    const auto& table = taylor.table();
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
      const double v = std::pow(delta, table.degree_of(pos)) * std::abs(taylor[pos]);
      d1 = std::max(d1, v);
    }
    d2 = std::max(d2, std::numbers::sqrt2 * d * operator_norm(s.A) / delta);
  };
  const auto& nodes = traj.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    visit(nodes[i]);
    if (i + 1 == nodes.size()) break;
    for (int r = 1; r <= refine; ++r) {
      const double t = nodes[i].t + (nodes[i + 1].t - nodes[i].t) * r / (refine + 1);
      visit(traj.state_at(t));
    }
  }
  b.D1 = d1;
  b.D2 = d2;
  b.D5 = 1.0 + b.D1 * b.D2 * b.D2 * b.T;
  return b;
}

double log_order_bound(const BoundConstants& b, int J, int k, double t) {
  return 0.5 * log_factorial_ratio(J + 3 * k, J) + k * std::log(b.D2) + k * std::log(b.D3) -
         std::lgamma(k + 1.0) + k * std::log1p(b.D1 * b.D2 * b.D2 * t);
}

double log_part_bound(const BoundConstants& b, int J, int k, int p, double t) {
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(binomial(k - 1, p - 1))) + p * std::log(b.D1) +
         (k + 2 * p) * std::log(b.D2) + k * std::log(b.D3) +
         0.5 * log_factorial_ratio(J + k + 2 * p, J) + p * std::log(t) - std::lgamma(p + 1.0);
}

BoundReport check_order_bounds(const CoefficientHierarchy& h, const BoundConstants& bounds) {
  BoundReport r;
  for (std::size_t i = 0; i < h.num_times(); ++i) {
    const double t = h.times()[i] - h.t_begin();
    // k = 0 is the normalization of the initial data rather than a bound.
    for (int k = 1; k < h.l(); ++k) {
      const double ratio = ratio_from_logs(h.norm(i, k), log_order_bound(bounds, h.J(), k, t));
      ++r.checks;
      if (ratio > r.worst_ratio || r.worst_k < 0) {
        r.worst_ratio = std::max(r.worst_ratio, ratio);
        r.worst_k = k;
        r.worst_t = t;
      }
    }
  }
  return r;
}

BoundReport verify_p_decomposition(const CoefficientHierarchy& h, const BoundConstants& bounds,
                                   int k_max) {
  if (!h.p_resolved()) raise(ErrorCode::NotPResolved, "hierarchy has no p-resolved parts");
  BoundReport r;
  for (std::size_t i = 0; i < h.num_times(); ++i) {
    const double t = h.times()[i] - h.t_begin();
    for (int k = 1; k < h.l(); ++k) {
      CVector sum = CVector::Zero(h.c(i, k).size());
      for (int p = 1; p <= k; ++p) sum += h.part(i, k, p);
      r.telescoping = std::max(r.telescoping,
                               (sum - h.c(i, k)).norm() / std::max(1.0, h.c(i, k).norm()));
      if (k > k_max) continue;
      for (int p = 1; p <= k; ++p) {
        const double ratio =
            ratio_from_logs(h.part(i, k, p).norm(), log_part_bound(bounds, h.J(), k, p, t));
        ++r.checks;
        if (ratio > r.worst_ratio || r.worst_k < 0) {
          r.worst_ratio = std::max(r.worst_ratio, ratio);
          r.worst_k = k;
          r.worst_p = p;
          r.worst_t = t;
        }
      }
    }
  }
  return r;
}

}  // namespace hagedorn
