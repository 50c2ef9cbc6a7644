#include "hagedorn/grid.hpp"

#include <cmath>
#include <numbers>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

GridSpec GridSpec::around(const Trajectory& traj, double hbar, int points_per_axis, double dt,
                          double margin) {
  require(traj.size() >= 1 && hbar > 0.0, "grid sizing needs a trajectory and hbar > 0");
  const int d = traj.front().dim();
  RVector lo = traj.front().a, hi = traj.front().a;
  double sup_a = 0.0;
  for (const auto& s : traj.nodes()) {
    lo = lo.cwiseMin(s.a);
    hi = hi.cwiseMax(s.a);
    sup_a = std::max(sup_a, operator_norm(s.A));
  }
  const double pad = margin * std::sqrt(hbar) * sup_a;
  GridSpec g;
  g.center = 0.5 * (lo + hi);
  g.half_width = (0.5 * (hi - lo)).array() + pad;
  g.points.assign(static_cast<std::size_t>(d), points_per_axis);
  g.dt = dt;
  return g;
}

void GridSpec::validate() const {
  const int d = dim();
  require(d == 1 || d == 2, "the reference grid supports d = 1 or 2");
  require(half_width.size() == d && static_cast<int>(points.size()) == d,
          "grid axes disagree in length");
  for (int i = 0; i < d; ++i) {
    require(half_width[i] > 0.0, "grid half-width must be positive");
    require(is_power_of_two(points[static_cast<std::size_t>(i)]) &&
                points[static_cast<std::size_t>(i)] >= 8,
            "grid points per axis must be a power of two >= 8");
  }
  require(dt > 0.0, "grid time step must be positive");
}

Grid::Grid(GridSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int d = dim();
  size_ = 1;
  for (int n : spec_.points) size_ *= n;
  for (int i = 0; i < d; ++i) {
    dx_.push_back(2.0 * spec_.half_width[i] / spec_.points[static_cast<std::size_t>(i)]);
    volume_ *= dx_.back();
  }
  points_.resize(d, size_);
  k_.resize(d, size_);
  for (Eigen::Index flat = 0; flat < size_; ++flat) {
    Eigen::Index rest = flat;
    for (int axis = d - 1; axis >= 0; --axis) {
      const int n = spec_.points[static_cast<std::size_t>(axis)];
      const auto idx = static_cast<int>(rest % n);
      rest /= n;
      points_(axis, flat) = spec_.center[axis] - spec_.half_width[axis] + idx * dx_[static_cast<std::size_t>(axis)];
      const int m = idx < n / 2 ? idx : idx - n;
      k_(axis, flat) = std::numbers::pi * m / spec_.half_width[axis];
    }
  }
}

double Grid::norm(const CVector& psi) const {
  require(psi.size() == size_, "wavefunction does not live on this grid");
  return std::sqrt(psi.squaredNorm() * volume_);
}

Complex Grid::inner(const CVector& a, const CVector& b) const {
  require(a.size() == size_ && b.size() == size_, "wavefunction does not live on this grid");
  return a.dot(b) * volume_;
}

double Grid::boundary_mass(const CVector& psi, double band) const {
  require(psi.size() == size_, "wavefunction does not live on this grid");
  double mass = 0.0;
  for (Eigen::Index flat = 0; flat < size_; ++flat) {
    bool outer = false;
    for (int axis = 0; axis < dim(); ++axis) {
      const double rel = std::abs(points_(axis, flat) - spec_.center[axis]) / spec_.half_width[axis];
      outer = outer || rel >= 1.0 - 2.0 * band;
    }
    if (outer) mass += std::norm(psi[flat]);
  }
  return mass * volume_;
}

Grid Grid::refined() const {
  GridSpec s = spec_;
  for (auto& n : s.points) n *= 2;
  return Grid(s);
}

}  // namespace hagedorn
