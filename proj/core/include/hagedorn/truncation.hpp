#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hagedorn/grid.hpp"
#include "hagedorn/hierarchy.hpp"

namespace hagedorn {

enum class TruncationMode { FixedG, Empirical };

std::string to_string(TruncationMode mode);

struct TruncationPlan {
  TruncationMode mode = TruncationMode::FixedG;
  double g = 0.0;  // only meaningful in FixedG mode
  double hbar = 0.0;
  int l = 1;
};

/// max(1, floor(g / hbar)).
int choose_l_fixed(double g, double hbar);

/// hbar^(k/2) sup_t ||c_k(t)|| for k = 0 .. h.l()-1.
std::vector<double> norm_profile(const CoefficientHierarchy& h, double hbar);

/// Smallest l >= 1 with profile[l+1] >= profile[l]: the first omitted order is
/// at a local minimum. Returns profile.size() if the profile keeps decreasing.
/// Throws DegenerateProfile when profile[1] >= profile[0].
int choose_l_empirical(const std::vector<double>& profile);

TruncationPlan choose_l(TruncationMode mode, double hbar, double g,
                        const std::optional<std::vector<double>>& profile = std::nullopt);

/// sum_{k<l} hbar^(k/2) c_k at output time i, support J + 3(l-1).
BasisCoefficients combined_coefficients(const CoefficientHierarchy& h, std::size_t i, double hbar,
                                        int l);

/// e^{iS/hbar} sum_j (sum_{k<l} hbar^(k/2) c_{k,j}) phi_j at every column of points.
CVector assemble_wavefunction(const CoefficientHierarchy& h, std::size_t i, double hbar, int l,
                              const RMatrix& points);

/// Taylor remainder W^(q)(x) = V(x) - sum_{|n|<=q} D^n V(a)/n! (x-a)^n at each column.
RVector taylor_remainder(const PotentialModel& pot, const RVector& a, int q, const RMatrix& points);

/// The defect xi_l = -e^{iS/hbar} sum_{k<l} hbar^(k/2) W^(l+1-k) psi_k on the grid.
CVector residual(const CoefficientHierarchy& h, std::size_t i, const PotentialModel& pot,
                 double hbar, int l, const Grid& grid);

/// ||xi_l|| on the grid. Throws GridTooCoarse when the grid under-resolves the
/// packet or when the half-resolution quadrature disagrees by more than 10%.
double residual_norm(const CoefficientHierarchy& h, std::size_t i, const PotentialModel& pot,
                     double hbar, int l, const Grid& grid);

/// (integral over |x - a| >= b of |psi|^2)^(1/2); needs the box to reach 3b past a.
double localization_mass(const Grid& grid, const CVector& psi, const RVector& center, double b);

struct EhrenfestSchedule {
  double T_prime = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
  double v = 0.0;
  double kappa = 0.0;
  double hbar = 0.0;
  double window_lo = 0.0;  // 6 lambda + 2 v tau
  double window_hi = 0.0;  // 1 / T'
  double T = 0.0;          // T' ln(1/hbar)
  double g = 0.0;          // e^{-kappa T}
  int l = 1;               // max(1, floor(g / hbar))
};

/// Throws EmptyWindow when 6 lambda + 2 v tau >= 1/T'. kappa defaults to the window midpoint.
EhrenfestSchedule ehrenfest_schedule(double T_prime, double lambda, double tau, double v,
                                     double hbar, std::optional<double> kappa = std::nullopt);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace hagedorn
