#pragma once

#include <vector>

#include "hagedorn/classical_flow.hpp"

namespace hagedorn {

/// Periodic tensor grid in one or two dimensions. Axis 0 varies slowest, so a
/// flat index is i0 * n1 + i1 (row-major, as FFTW expects).
struct GridSpec {
  RVector center;
  RVector half_width;
  std::vector<int> points;  // per axis, powers of two
  double dt = 1e-3;

  int dim() const { return static_cast<int>(center.size()); }

  /// Box covering the classical positions on the trajectory plus
  /// margin * sqrt(hbar) * sup ||A|| on every side, rounded out to `points`.
  static GridSpec around(const Trajectory& traj, double hbar, int points_per_axis, double dt,
                         double margin = 12.0);

  void validate() const;
};

class Grid {
 public:
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim(); }
  Eigen::Index size() const noexcept { return size_; }
  double dx(int axis) const { return dx_[static_cast<std::size_t>(axis)]; }
  double cell_volume() const noexcept { return volume_; }

  /// d x size() matrix of grid points.
  const RMatrix& points() const noexcept { return points_; }
  /// Angular wave numbers per flat index (d x size()), in FFT order.
  const RMatrix& wavenumbers() const noexcept { return k_; }

  double norm(const CVector& psi) const;
  Complex inner(const CVector& a, const CVector& b) const;  // <a, b>, antilinear in a

  /// Mass (not its root) in the outer band of relative width `band` next to each face.
  double boundary_mass(const CVector& psi, double band = 0.05) const;

  /// Same box, twice the points per axis.
  Grid refined() const;

 private:
  GridSpec spec_;
  Eigen::Index size_ = 0;
  std::vector<double> dx_;
  double volume_ = 1.0;
  RMatrix points_;
  RMatrix k_;
};

}  // namespace hagedorn
