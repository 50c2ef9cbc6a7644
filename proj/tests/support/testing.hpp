#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "hagedorn/grid.hpp"
#include "hagedorn/wavepacket_basis.hpp"

namespace hagedorn::testing {

/// A valid (A, B) pair built from closed-form symplectic moves: a real
/// similarity M, a free drift of length s and a quadratic kick W.
/// cond1 holds for any M, s, W by construction.
inline std::pair<CMatrix, CMatrix> random_frame_matrices(int d, std::mt19937_64& rng,
                                                          double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
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

inline WavepacketFrame random_frame(int d, std::mt19937_64& rng, double hbar) {
  auto [A, B] = random_frame_matrices(d, rng);
  WavepacketFrame f = WavepacketFrame::standard(d, hbar);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < d; ++i) {
    f.a[i] = u(rng);
    f.eta[i] = u(rng);
  }
  f.A = A;
  f.B = B;
  f.detA_arg = std::arg(A.determinant());
  return f;
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

/// Hermite functions from their explicit polynomials, for n <= 4.
inline double hermite_function(int n, double x) {
  double H = 0.0;
  switch (n) {
    case 0: H = 1.0; break;
    case 1: H = 2.0 * x; break;
    case 2: H = 4.0 * x * x - 2.0; break;
    case 3: H = 8.0 * x * x * x - 12.0 * x; break;
    case 4: H = 16.0 * std::pow(x, 4) - 48.0 * x * x + 12.0; break;
    default: return std::nan("");
  }
  const double norm = std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi));
  return H * std::exp(-0.5 * x * x) / norm;
}

/// 1-D quadrature box centred at c.
inline Grid line_grid(double c, double half_width, int points) {
  GridSpec s;
  s.center = RVector::Constant(1, c);
  s.half_width = RVector::Constant(1, half_width);
  s.points = {points};
  return Grid(s);
}

inline Grid square_grid(const RVector& c, double half_width, int points) {
  GridSpec s;
  s.center = c;
  s.half_width = RVector::Constant(c.size(), half_width);
  s.points.assign(static_cast<std::size_t>(c.size()), points);
  return Grid(s);
}

}  // namespace hagedorn::testing
