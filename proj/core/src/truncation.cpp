#include "hagedorn/truncation.hpp"

#include <cmath>
#include <sstream>

#include "hagedorn/errors.hpp"

namespace hagedorn {

std::string to_string(TruncationMode mode) {
  return mode == TruncationMode::FixedG ? "fixed_g" : "empirical";
}

int choose_l_fixed(double g, double hbar) {
  require(hbar > 0.0 && g >= 0.0, "choose_l needs hbar > 0 and g >= 0");
  // Guard against g/hbar landing a rounding error below an integer.
  const double ratio = g / hbar;
  const double fl = std::floor(ratio + 1e-9 * std::max(1.0, ratio));
  return std::max(1, static_cast<int>(fl));
}

std::vector<double> norm_profile(const CoefficientHierarchy& h, double hbar) {
  require(hbar > 0.0, "hbar must be positive");
  std::vector<double> p;
  for (int k = 0; k < h.l(); ++k) p.push_back(std::pow(hbar, 0.5 * k) * h.sup_norm(k));
  return p;
}

int choose_l_empirical(const std::vector<double>& profile) {
  require(profile.size() >= 2, "empirical truncation needs at least two orders");
  if (profile[1] >= profile[0]) {
    std::ostringstream os;
    os << "first correction (" << profile[1] << ") is not smaller than the leading order ("
       << profile[0] << "); hbar is too large for the expansion";
    raise(ErrorCode::DegenerateProfile, os.str());
  }
  for (std::size_t l = 1; l + 1 < profile.size(); ++l) {
    if (profile[l + 1] >= profile[l]) return static_cast<int>(l);
  }
  return static_cast<int>(profile.size());
}

TruncationPlan choose_l(TruncationMode mode, double hbar, double g,
                        const std::optional<std::vector<double>>& profile) {
  TruncationPlan plan;
  plan.mode = mode;
  plan.hbar = hbar;
  if (mode == TruncationMode::FixedG) {
    plan.g = g;
    plan.l = choose_l_fixed(g, hbar);
  } else {
    require(profile.has_value(), "empirical truncation needs a norm profile");
    require(hbar > 0.0, "hbar must be positive");
    plan.l = choose_l_empirical(*profile);
  }
  return plan;
}

BasisCoefficients combined_coefficients(const CoefficientHierarchy& h, std::size_t i, double hbar,
                                        int l) {
  require(l >= 1 && l <= h.l(), "requested more orders than the hierarchy holds");
  require(hbar > 0.0, "hbar must be positive");
  const int support = h.J() + 3 * (l - 1);
  const auto n = static_cast<Eigen::Index>(h.table().size_upto(support));
  CVector sum = CVector::Zero(n);
  for (int k = 0; k < l; ++k) sum += std::pow(hbar, 0.5 * k) * h.c(i, k).head(n);
  BasisCoefficients out(h.table_ptr(), support, std::move(sum));
  out.bind(std::make_shared<const WavepacketFrame>(WavepacketFrame::from_state(h.state(i), hbar)));
  return out;
}

CVector assemble_wavefunction(const CoefficientHierarchy& h, std::size_t i, double hbar, int l,
                              const RMatrix& points) {
  const auto coeffs = combined_coefficients(h, i, hbar, l);
  const auto& frame = *coeffs.frame();
  return std::exp(Complex(0.0, frame.S / hbar)) * evaluate_expansion(frame, coeffs, points);
}

RVector taylor_remainder(const PotentialModel& pot, const RVector& a, int q,
                         const RMatrix& points) {
  require(q >= 0 && points.rows() == pot.dim(), "bad Taylor remainder request");
  const int d = pot.dim();
  RVector out(points.cols());
  const int deg = pot.polynomial_degree();
  // Polynomials: sum the omitted terms directly, which avoids cancellation near a.
  const bool finite = deg >= 0;
  const int top = finite ? std::max(deg, q) : q;
  const auto taylor = pot.taylor_coeffs(a, top);
  const auto& table = taylor.table();
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const RVector dx = points.col(c) - a;
    double acc = 0.0;
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
      const int order = table.degree_of(pos);
      if (finite == (order <= q)) continue;
      const double coef = taylor[pos];
      if (coef == 0.0) continue;
      double mono = 1.0;
      const auto& m = table.at(pos);
      for (int ax = 0; ax < d; ++ax) mono *= std::pow(dx[ax], m[ax]);
      acc += coef * mono;
    }
    out[c] = finite ? acc : pot.value(points.col(c)) - acc;
  }
  return out;
}

CVector residual(const CoefficientHierarchy& h, std::size_t i, const PotentialModel& pot,
                 double hbar, int l, const Grid& grid) {
  require(l >= 1 && l <= h.l(), "requested more orders than the hierarchy holds");
  const auto frame = WavepacketFrame::from_state(h.state(i), hbar);
  CVector xi = CVector::Zero(grid.size());
  for (int k = 0; k < l; ++k) {
    const auto ck = h.coefficients(i, k);
    if (ck.norm() == 0.0) continue;
    const CVector psi_k = evaluate_expansion(frame, ck, grid.points());
    const RVector w = taylor_remainder(pot, frame.a, l + 1 - k, grid.points());
    xi += std::pow(hbar, 0.5 * k) * (w.cast<Complex>().array() * psi_k.array()).matrix();
  }
  return -std::exp(Complex(0.0, frame.S / hbar)) * xi;
}

double residual_norm(const CoefficientHierarchy& h, std::size_t i, const PotentialModel& pot,
                     double hbar, int l, const Grid& grid) {
  const auto& st = h.state(i);
  const double width = std::sqrt(hbar) * operator_norm(st.A);
  for (int ax = 0; ax < grid.dim(); ++ax) {
    if (grid.dx(ax) > width / 16.0) {
      std::ostringstream os;
      os << "grid spacing " << grid.dx(ax) << " exceeds 1/16 of the packet width " << width;
      raise(ErrorCode::GridTooCoarse, os.str());
    }
  }
  const CVector xi = residual(h, i, pot, hbar, l, grid);
  const double fine = grid.norm(xi);
  // Same box at half resolution: every other point along each axis.
  double coarse_sq = 0.0;
  const auto& pts = grid.spec().points;
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    bool keep = true;
    Eigen::Index rest = flat;
    for (int ax = grid.dim() - 1; ax >= 0; --ax) {
      keep = keep && (rest % pts[static_cast<std::size_t>(ax)]) % 2 == 0;
      rest /= pts[static_cast<std::size_t>(ax)];
    }
    if (keep) coarse_sq += std::norm(xi[flat]);
  }
  const double coarse = std::sqrt(coarse_sq * grid.cell_volume() * std::pow(2.0, grid.dim()));
  if (std::abs(coarse - fine) > 0.1 * std::max(fine, 1e-300) && fine > 1e-300) {
    std::ostringstream os;
    os << "residual norm changes from " << coarse << " to " << fine
       << " under grid refinement; use more points";
    raise(ErrorCode::GridTooCoarse, os.str());
  }
  return fine;
}

double localization_mass(const Grid& grid, const CVector& psi, const RVector& center, double b) {
  require(b >= 0.0 && center.size() == grid.dim(), "bad localization request");
  require(psi.size() == grid.size(), "wavefunction does not live on this grid");
  const auto& s = grid.spec();
  for (int ax = 0; ax < grid.dim(); ++ax) {
    if (center[ax] - 3.0 * b < s.center[ax] - s.half_width[ax] ||
        center[ax] + 3.0 * b > s.center[ax] + s.half_width[ax]) {
      raise(ErrorCode::GridTooCoarse, "grid does not extend 3b beyond the packet centre");
    }
  }
  double mass = 0.0;
  for (Eigen::Index flat = 0; flat < grid.size(); ++flat) {
    if ((grid.points().col(flat) - center).norm() >= b) mass += std::norm(psi[flat]);
  }
  return std::sqrt(mass * grid.cell_volume());
}

EhrenfestSchedule ehrenfest_schedule(double T_prime, double lambda, double tau, double v,
                                     double hbar, std::optional<double> kappa) {
  require(lambda > 0.0, "Ehrenfest schedule needs lambda > 0");
  require(T_prime > 0.0 && tau >= 0.0 && v >= 0.0, "Ehrenfest schedule needs T' > 0, tau, v >= 0");
  require(hbar > 0.0 && hbar < 1.0, "Ehrenfest schedule needs 0 < hbar < 1");
  EhrenfestSchedule s;
  s.T_prime = T_prime;
  s.lambda = lambda;
  s.tau = tau;
  s.v = v;
  s.hbar = hbar;
  s.window_lo = 6.0 * lambda + 2.0 * v * tau;
  s.window_hi = 1.0 / T_prime;
  if (s.window_lo >= s.window_hi) {
    std::ostringstream os;
    os << "kappa window (" << s.window_lo << ", " << s.window_hi << ") is empty";
    raise(ErrorCode::EmptyWindow, os.str());
  }
  s.kappa = kappa.value_or(0.5 * (s.window_lo + s.window_hi));
  require(s.kappa > s.window_lo && s.kappa < s.window_hi, "kappa outside the admissible window");
  s.T = T_prime * std::log(1.0 / hbar);
  s.g = std::exp(-s.kappa * s.T);
  s.l = choose_l_fixed(s.g, hbar);
  return s;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, "fit_line needs two or more points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double vx = 0, vy = 0, cxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    vx += (xs[i] - mx) * (xs[i] - mx);
    vy += (ys[i] - my) * (ys[i] - my);
    cxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = vx > 0 ? cxy / vx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (vx > 0 && vy > 0) ? cxy * cxy / (vx * vy) : 1.0;
  return f;
}

}  // namespace hagedorn
