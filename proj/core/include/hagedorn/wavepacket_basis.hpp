#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "hagedorn/classical_flow.hpp"
#include "hagedorn/multiindex.hpp"

namespace hagedorn {

/// Parameters (A, B, hbar, a, eta, S) of the basis phi_j at one instant,
/// plus the continuous branch of arg det A that fixes the sign of (det A)^(-1/2).
struct WavepacketFrame {
  CMatrix A;
  CMatrix B;
  double hbar = 1.0;
  RVector a;
  RVector eta;
  double S = 0.0;
  double detA_arg = 0.0;

  static WavepacketFrame from_state(const ClassicalState& state, double hbar);
  static WavepacketFrame standard(int dim, double hbar = 1.0);

  int dim() const { return static_cast<int>(a.size()); }

  /// Throws SingularA / Cond1Drift / InvalidArgument when the frame is unusable.
  void validate(double tol_sympl = 1e-8) const;

  /// (det A)^(-1/2) on the tracked branch.
  Complex inv_sqrt_detA() const;

  friend bool operator==(const WavepacketFrame&, const WavepacketFrame&);
};

/// Coefficients c_j in graded-lex order over a shared multi-index table.
/// Entries with |j| > support() are implicitly zero.
class BasisCoefficients {
 public:
  BasisCoefficients(TablePtr table, int support);
  BasisCoefficients(TablePtr table, int support, CVector values);

  static BasisCoefficients delta(TablePtr table, const MultiIndex& j, Complex value = 1.0);

  const TablePtr& table_ptr() const noexcept { return table_; }
  const MultiIndexTable& table() const noexcept { return *table_; }
  int dim() const noexcept { return table_->dim(); }
  int support() const noexcept { return support_; }

  const CVector& values() const noexcept { return values_; }
  CVector& values() noexcept { return values_; }

  Complex operator[](const MultiIndex& j) const;
  Complex& at(const MultiIndex& j);

  double norm() const { return values_.norm(); }
  /// Largest |j| whose coefficient is non-zero (-1 when all vanish).
  int max_nonzero_degree() const;

  /// Frame these coefficients are expressed in, if bound.
  const std::shared_ptr<const WavepacketFrame>& frame() const noexcept { return frame_; }
  BasisCoefficients& bind(std::shared_ptr<const WavepacketFrame> frame);

  /// Copy with support widened (zero-padded) or narrowed (truncated).
  BasisCoefficients resized(int support) const;

  std::vector<std::pair<MultiIndex, Complex>> entries() const;

 private:
  TablePtr table_;
  int support_;
  CVector values_;
  std::shared_ptr<const WavepacketFrame> frame_;
};

/// Sparse ladder kernels on raw coefficient spans. `in` holds a vector of
/// support n_in; `out` must have room for support n_in + 1 and is accumulated into.
namespace ladder {

void raise_add(const MultiIndexTable& table, int axis, int n_in, std::span<const Complex> in,
               Complex scale, std::span<Complex> out);
void lower_add(const MultiIndexTable& table, int axis, int n_in, std::span<const Complex> in,
               Complex scale, std::span<Complex> out);
/// out += scale * X_i in, where X_i represents hbar^(-1/2) (x_i - a_i):
/// X_i = (1/sqrt 2) sum_p (A_ip R_p + conj(A_ip) L_p).
void position_add(const MultiIndexTable& table, const CMatrix& A, int axis, int n_in,
                  std::span<const Complex> in, Complex scale, std::span<Complex> out);

}  // namespace ladder

/// phi_0 at each column of `points` (d x n).
CVector evaluate_phi0(const WavepacketFrame& frame, const RMatrix& points);

/// phi_j for all |j| <= max_degree at each column of `points`; returns an
/// n x count_upto(d, max_degree) matrix in graded-lex column order. Uses the
/// three-term ladder recurrence
///   sqrt(j_m + 1) phi_{j+e_m} = sqrt(2/hbar) (A^{-1}(x-a))_m phi_j
///                               - sum_n (A^{-1} conj(A))_{mn} sqrt(j_n) phi_{j-e_n}.
CMatrix evaluate_basis(const WavepacketFrame& frame, int max_degree, const RMatrix& points);

/// Sum_j c_j phi_j(x) at every column of points, without the action phase.
CVector evaluate_expansion(const WavepacketFrame& frame, const BasisCoefficients& coeffs,
                           const RMatrix& points);

BasisCoefficients apply_raising(const WavepacketFrame& frame, int axis,
                                const BasisCoefficients& coeffs);
BasisCoefficients apply_lowering(const WavepacketFrame& frame, int axis,
                                 const BasisCoefficients& coeffs);
/// Coefficients of (x_i - a_i) psi.
BasisCoefficients apply_position(const WavepacketFrame& frame, int axis,
                                 const BasisCoefficients& coeffs);

}  // namespace hagedorn
