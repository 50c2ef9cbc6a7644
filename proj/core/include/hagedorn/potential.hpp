#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hagedorn/multiindex.hpp"

namespace hagedorn {

using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Declared short-range decay: |D^m V(x)| <= v0 v1^|m| m! / <x>^(beta+|m|).
struct DecayBounds {
  double beta = 2.0;
  double v0 = 1.0;
  double v1 = 1.0;
};

/// Declared growth |V(z)| <= M exp(tau |z|^p) on the analyticity strip. Metadata only.
struct GrowthBounds {
  double M = 1.0;
  double tau = 0.0;
};

struct PolynomialTerm {
  MultiIndex power;
  double coeff = 0.0;
};

/// V(x) = amplitude * exp(-|x - center|^2 / width^2)
struct GaussianTerm {
  RVector center;
  double width = 1.0;
  double amplitude = 1.0;
};

/// Normalized Taylor coefficients D^m V(a) / m! for all |m| <= max_order,
/// stored in graded-lex order.
class TaylorCoefficients {
 public:
  TaylorCoefficients(TablePtr table, int max_order);

  int dim() const noexcept { return table_->dim(); }
  int max_order() const noexcept { return max_order_; }
  const MultiIndexTable& table() const noexcept { return *table_; }
  const TablePtr& table_ptr() const noexcept { return table_; }

  double operator[](std::size_t pos) const { return values_[pos]; }
  double& operator[](std::size_t pos) { return values_[pos]; }
  double at(const MultiIndex& m) const;

  /// Coefficients of the degree-k shell, lex ordered.
  std::span<const double> shell(int k) const;

  /// Max |coefficient| on the degree-k shell.
  double shell_max_abs(int k) const;

  RVector gradient() const;
  RMatrix hessian() const;
  double value() const { return values_[0]; }

 private:
  TablePtr table_;
  int max_order_;
  std::vector<double> values_;
};

/// Potential with analytic Taylor oracle. Gradient, Hessian and value all come
/// out of taylor_coeffs so every consumer sees the same derivatives.
class PotentialModel {
 public:
  enum class Kind { Polynomial, GaussianSum, DoubleWell };

  static PotentialModel free(int dim);
  static PotentialModel polynomial(int dim, std::vector<PolynomialTerm> terms);
  static PotentialModel gaussian_sum(int dim, std::vector<GaussianTerm> terms);
  /// V = (lambda / 4) (|x|^2 - r^2)^2, stored in polynomial form.
  static PotentialModel double_well(int dim, double lambda = 1.0, double radius = 1.0);

  Kind kind() const noexcept { return kind_; }
  std::string kind_name() const;
  int dim() const noexcept { return dim_; }

  /// True when every coefficient of the model is zero.
  bool is_zero() const;
  /// Degree of the polynomial form, or -1 for non-polynomial kinds.
  int polynomial_degree() const;

  double value(const RVector& x) const;
  RVector gradient(const RVector& x) const;
  RMatrix hessian(const RVector& x) const;
  double derivative(const RVector& x, const MultiIndex& m) const;

  TaylorCoefficients taylor_coeffs(const RVector& a, int max_order) const;
  /// Same, reusing a caller-owned table (its capacity must be >= max_order).
  void taylor_coeffs_into(const RVector& a, TaylorCoefficients& out) const;

  const std::optional<DecayBounds>& decay() const noexcept { return decay_; }
  PotentialModel& with_decay(DecayBounds bounds);
  const std::optional<GrowthBounds>& growth() const noexcept { return growth_; }
  PotentialModel& with_growth(GrowthBounds bounds);

  const std::vector<PolynomialTerm>& polynomial_terms() const noexcept { return poly_; }
  const std::vector<GaussianTerm>& gaussian_terms() const noexcept { return gauss_; }

  /// The short-range decay triple, if the model can claim one. Identically zero
  /// potentials satisfy it trivially.
  std::optional<DecayBounds> effective_decay() const;

 private:
  PotentialModel(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  int dim_;
  std::vector<PolynomialTerm> poly_;
  std::vector<GaussianTerm> gauss_;
  std::optional<DecayBounds> decay_;
  std::optional<GrowthBounds> growth_;
};

struct DecayCheckReport {
  double worst_ratio = 0.0;  // <= 1 certifies the sampled points
  RVector worst_point;
  MultiIndex worst_index;
  std::size_t samples = 0;
};

/// Max over sampled x in [lo, hi] (per axis) and |m| <= max_order of
/// |D^m V(x)| <x>^(beta+|m|) / (v0 v1^|m| m!).
DecayCheckReport decay_check(const PotentialModel& pot, const RVector& lo, const RVector& hi,
                             int samples_per_axis = 2001, int max_order = 4);

}  // namespace hagedorn
