#include "hagedorn/scattering.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "hagedorn/errors.hpp"
#include "hagedorn/truncation.hpp"

namespace hagedorn {

namespace {

DecayBounds require_decay(const PotentialModel& pot) {
  const auto decay = pot.effective_decay();
  if (!decay) {
    raise(ErrorCode::MissingDecayMetadata,
          "scattering needs declared short-range decay bounds for the potential");
  }
  return *decay;
}

AsymptoticData extract(const ClassicalState& s, Side side) {
  AsymptoticData out;
  out.side = side;
  out.eta = s.eta;
  out.a = s.a - s.eta * s.t;
  out.B = s.B;
  out.A = s.A - Complex(0.0, s.t) * s.B;
  out.S = s.S - 0.5 * s.t * s.eta.squaredNorm();
  out.horizon = std::abs(s.t);
  return out;
}

double asymptote_gap(const AsymptoticData& x, const AsymptoticData& y) {
  const double scale = std::max(1.0, operator_norm(x.A));
  return std::max({(x.a - y.a).lpNorm<Eigen::Infinity>(), (x.eta - y.eta).lpNorm<Eigen::Infinity>(),
                   (x.A - y.A).norm() / scale, (x.B - y.B).norm() / scale, std::abs(x.S - y.S)});
}

FlowOptions flow_options(const ScatterOptions& o) {
  FlowOptions f;
  f.tol = o.flow_tol;
  // Scattering runs reach |t| in the hundreds or more, where the per-unit-time
  // drift allowance of short propagations is too tight for oscillatory legs.
  f.drift_factor = 100.0;
  return f;
}

}  // namespace

std::string to_string(Side side) { return side == Side::Past ? "past" : "future"; }

AsymptoticData classical_asymptotics(const PotentialModel& pot, const ClassicalState& init,
                                     Side side, const ScatterOptions& options) {
  require_decay(pot);
  require(options.first_check > 0.0 && options.t_max > options.first_check,
          "scatter checkpoints need 0 < first_check < t_max");
  const double sign = side == Side::Future ? 1.0 : -1.0;
  // Checkpoints are measured from the free-flight closest approach, so a state
  // still far out on the incoming leg is not mistaken for a settled asymptote.
  double lead = 0.0;
  if (init.eta.squaredNorm() > 0.0) {
    lead = std::max(0.0, -sign * init.a.dot(init.eta) / init.eta.squaredNorm());
  }
  const double t0 = init.t + sign * lead;
  ClassicalState state = init;
  AsymptoticData previous;
  bool have_previous = false;
  for (double reach = options.first_check; reach <= options.t_max; reach *= 2.0) {
    const double t = t0 + sign * reach;
    const Trajectory traj = integrate_flow(pot, state, t, flow_options(options));
    state = traj.back();
    AsymptoticData now = extract(state, side);
    if (have_previous) {
      now.convergence_residual = asymptote_gap(now, previous);
      if (now.convergence_residual < options.classical_tol) {
        if (now.eta.norm() < 1e-8) {
          raise(ErrorCode::NoConvergence, "asymptotic momentum vanishes; the orbit is not scattering");
        }
        return now;
      }
    }
    previous = std::move(now);
    have_previous = true;
  }
  std::ostringstream os;
  os << "classical asymptote on the " << to_string(side) << " side did not settle by |t| = "
     << options.t_max << " (trapped or exceptional orbit?)";
  raise(ErrorCode::NoConvergence, os.str());
}

ClassicalState free_state_at(const AsymptoticData& data, double t) {
  ClassicalState s;
  s.t = t;
  s.a = data.a + data.eta * t;
  s.eta = data.eta;
  s.A = data.A + Complex(0.0, t) * data.B;
  s.B = data.B;
  s.S = data.S + 0.5 * t * data.eta.squaredNorm();
  s.detA_arg = std::arg(s.A.determinant());
  return s;
}

double closest_approach_time(const AsymptoticData& data) {
  const double speed2 = data.eta.squaredNorm();
  if (!(speed2 > 0.0)) raise(ErrorCode::NoConvergence, "asymptotic momentum is zero");
  return -data.a.dot(data.eta) / speed2;
}

CoefficientLimits coefficient_limits(const PotentialModel& pot, const AsymptoticData& incoming,
                                     const BasisCoefficients& c0, int l,
                                     const ScatterOptions& options) {
  const DecayBounds decay = require_decay(pot);
  require(l >= 1, "coefficient limits need l >= 1");
  require(c0.dim() == pot.dim() && incoming.a.size() == pot.dim(), "dimension mismatch");
  const int d = pot.dim();
  const double s_star = closest_approach_time(incoming);
  const double speed = incoming.eta.norm();

  CoefficientLimits out;
  out.J = std::max(0, c0.max_nonzero_degree());
  out.table = MultiIndexTable::make(d, out.J + 3 * (l - 1));

  if (pot.is_zero()) {
    CVector base = CVector::Zero(static_cast<Eigen::Index>(out.table->size()));
    for (Eigen::Index i = 0; i < c0.values().size(); ++i) {
      base[static_cast<Eigen::Index>(out.table->position(c0.table().at(static_cast<std::size_t>(i))))] =
          c0.values()[i];
    }
    out.c.push_back(base);
    for (int k = 1; k < l; ++k) out.c.push_back(CVector::Zero(base.size()));
    out.outgoing = incoming;
    out.outgoing.side = Side::Future;
    out.t_start = out.horizon = s_star;
    return out;
  }

  // Start where the declared decay makes the neglected incoming tail negligible.
  const double reach = std::pow(decay.v0 / (0.01 * options.tol), 1.0 / decay.beta);
  out.t_start = s_star - reach / speed;
  const ClassicalState init = free_state_at(incoming, out.t_start);
  const int J = out.J;

  auto tail_bound = [&](const CoefficientHierarchy& h, std::size_t i) {
    const double tau = h.times()[i] - s_star;
    const double r = speed * tau;
    const auto& st = h.state(i);
    const double rho = std::max(operator_norm(st.A) / r, operator_norm(st.B) / speed);
    const double integral = std::pow(speed, -decay.beta) * std::pow(tau, 1.0 - decay.beta) /
                            (decay.beta - 1.0);
    double worst = 0.0;
    for (int n = 1; n < l; ++n) {
      double sum = 0.0;
      for (int m = 0; m < n; ++m) {
        const int q = n + 2 - m;
        const double count = static_cast<double>(count_exact_degree(d, q));
        const double growth = std::exp(0.5 * log_factorial_ratio(J + 3 * m + q, J + 3 * m));
        // Factor 2: later norms are assumed to stay within twice the checkpoint value.
        sum += count * growth * decay.v0 *
               std::pow(decay.v1 * std::numbers::sqrt2 * d * rho, q) * 2.0 * h.norm(i, m);
      }
      worst = std::max(worst, sum * integral);
    }
    return worst;
  };

  int rounds = 4;
  while (true) {
    const double span = options.first_check * std::pow(2.0, rounds);
    if (span > options.t_max) {
      std::ostringstream os;
      os << "coefficient limits did not converge to " << options.tol << " within |t - s*| = "
         << options.t_max;
      raise(ErrorCode::NoConvergence, os.str());
    }
    std::vector<double> checks;
    for (int m = 0; m <= rounds; ++m) checks.push_back(s_star + options.first_check * std::pow(2.0, m));
    const Trajectory traj = integrate_flow(pot, init, checks.back(), flow_options(options));
    HierarchyOptions ho;
    ho.l = l;
    ho.tol = options.hierarchy_tol;
    ho.output_times = checks;
    const CoefficientHierarchy h = integrate_hierarchy(traj, pot, c0, ho);

    for (std::size_t m = 1; m < checks.size(); ++m) {
      double cauchy = 0.0;
      for (int k = 0; k < l; ++k) cauchy = std::max(cauchy, (h.c(m, k) - h.c(m - 1, k)).norm());
      const double tail = tail_bound(h, m);
      AsymptoticData now = extract(h.state(m), Side::Future);
      now.convergence_residual = asymptote_gap(now, extract(h.state(m - 1), Side::Future));
      if (cauchy < options.tol && tail < options.tol &&
          now.convergence_residual < options.classical_tol) {
        for (int k = 0; k < l; ++k) out.c.push_back(h.c(m, k));
        out.outgoing = now;
        out.horizon = checks[m];
        out.cauchy_residual = cauchy;
        out.tail_bound = tail;
        out.checkpoints.assign(checks.begin(), checks.begin() + static_cast<std::ptrdiff_t>(m) + 1);
        return out;
      }
    }
    rounds += 3;
  }
}

ScatteringResult smatrix_apply(const PotentialModel& pot, const AsymptoticData& incoming,
                               const BasisCoefficients& c0, double hbar, double g,
                               const ScatterOptions& options) {
  require(hbar > 0.0, "hbar must be positive");
  ScatteringResult r;
  r.incoming = incoming;
  r.hbar = hbar;
  r.g = g;
  r.l = choose_l_fixed(g, hbar);
  r.dimension_caveat = pot.dim() < 3;
  r.limits = coefficient_limits(pot, incoming, c0, r.l, options);
  r.outgoing = r.limits.outgoing;
  const int support = r.limits.J + 3 * (r.l - 1);
  const auto n = static_cast<Eigen::Index>(r.limits.table->size_upto(support));
  CVector sum = CVector::Zero(n);
  for (int k = 0; k < r.l; ++k) {
    sum += std::pow(hbar, 0.5 * k) * r.limits.c[static_cast<std::size_t>(k)].head(n);
  }
  r.out_coefficients = BasisCoefficients(r.limits.table, support, std::move(sum));
  r.out_coefficients.bind(std::make_shared<const WavepacketFrame>(
      WavepacketFrame::from_state(free_state_at(r.outgoing, 0.0), hbar)));
  r.unitarity_deviation = std::abs(r.out_coefficients.norm() - 1.0);
  return r;
}

}  // namespace hagedorn
