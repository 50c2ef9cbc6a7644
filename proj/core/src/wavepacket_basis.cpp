#include "hagedorn/wavepacket_basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

constexpr Eigen::Index kPointChunk = 2048;

void check_frame(const WavepacketFrame& frame, const BasisCoefficients& coeffs) {
  require(frame.dim() == coeffs.dim(), "frame and coefficient dimensions differ");
  if (coeffs.frame() && !(*coeffs.frame() == frame)) {
    raise(ErrorCode::FrameMismatch, "coefficients are bound to a different wavepacket frame");
  }
}

BasisCoefficients grown(const WavepacketFrame& frame, const BasisCoefficients& coeffs) {
  BasisCoefficients out(coeffs.table_ptr(), coeffs.support() + 1);
  if (coeffs.frame()) {
    out.bind(coeffs.frame());
  } else {
    out.bind(std::make_shared<const WavepacketFrame>(frame));
  }
  return out;
}

}  // namespace

WavepacketFrame WavepacketFrame::from_state(const ClassicalState& state, double hbar) {
  WavepacketFrame f;
  f.A = state.A;
  f.B = state.B;
  f.hbar = hbar;
  f.a = state.a;
  f.eta = state.eta;
  f.S = state.S;
  f.detA_arg = state.detA_arg;
  return f;
}

WavepacketFrame WavepacketFrame::standard(int dim, double hbar) {
  return from_state(ClassicalState::coherent(RVector::Zero(dim), RVector::Zero(dim)), hbar);
}

void WavepacketFrame::validate(double tol_sympl) const {
  const int d = dim();
  require(d >= 1 && eta.size() == d, "frame position/momentum dimension mismatch");
  require(A.rows() == d && A.cols() == d && B.rows() == d && B.cols() == d,
          "frame matrices must be d x d");
  require(hbar > 0.0, "hbar must be positive");
  const Complex det = A.determinant();
  if (!(std::abs(det) > 1e-300)) raise(ErrorCode::SingularA, "det A is zero");
  const auto r = cond1_residuals(A, B);
  if (r.max() > tol_sympl) {
    std::ostringstream os;
    os << "frame violates the symplectic conditions (residual " << r.max() << ")";
    raise(ErrorCode::Cond1Drift, os.str());
  }
  const Complex tracked = std::abs(det) * std::exp(Complex(0, detA_arg));
  require(std::abs(tracked - det) <= 1e-10 * std::max(1.0, std::abs(det)),
          "tracked arg det A inconsistent with det A");
}

Complex WavepacketFrame::inv_sqrt_detA() const {
  const double mod = std::abs(A.determinant());
  if (!(mod > 1e-300)) raise(ErrorCode::SingularA, "det A is zero");
  return std::exp(Complex(-0.5 * std::log(mod), -0.5 * detA_arg));
}

bool operator==(const WavepacketFrame& x, const WavepacketFrame& y) {
  return x.hbar == y.hbar && x.S == y.S && x.detA_arg == y.detA_arg && x.a == y.a &&
         x.eta == y.eta && x.A == y.A && x.B == y.B;
}

BasisCoefficients::BasisCoefficients(TablePtr table, int support)
    : table_(std::move(table)), support_(support) {
  require(table_ != nullptr, "coefficients need a multi-index table");
  require(support >= 0, "support bound must be >= 0");
  values_ = CVector::Zero(static_cast<Eigen::Index>(table_->size_upto(support)));
}

BasisCoefficients::BasisCoefficients(TablePtr table, int support, CVector values)
    : BasisCoefficients(std::move(table), support) {
  require(values.size() == values_.size(), "coefficient vector length does not match support");
  values_ = std::move(values);
}

BasisCoefficients BasisCoefficients::delta(TablePtr table, const MultiIndex& j, Complex value) {
  BasisCoefficients c(std::move(table), j.order());
  c.at(j) = value;
  return c;
}

Complex BasisCoefficients::operator[](const MultiIndex& j) const {
  if (j.order() > support_) return 0.0;
  return values_[static_cast<Eigen::Index>(table_->position(j))];
}

Complex& BasisCoefficients::at(const MultiIndex& j) {
  if (j.order() > support_) {
    raise(ErrorCode::SupportOverflow,
          "index " + j.to_string() + " beyond support " + std::to_string(support_));
  }
  return values_[static_cast<Eigen::Index>(table_->position(j))];
}

int BasisCoefficients::max_nonzero_degree() const {
  for (Eigen::Index i = values_.size() - 1; i >= 0; --i) {
    if (values_[i] != Complex(0.0)) return table_->degree_of(static_cast<std::size_t>(i));
  }
  return -1;
}

BasisCoefficients& BasisCoefficients::bind(std::shared_ptr<const WavepacketFrame> frame) {
  frame_ = std::move(frame);
  return *this;
}

BasisCoefficients BasisCoefficients::resized(int support) const {
  BasisCoefficients out(table_, support);
  const auto n = std::min(out.values_.size(), values_.size());
  out.values_.head(n) = values_.head(n);
  out.frame_ = frame_;
  return out;
}

std::vector<std::pair<MultiIndex, Complex>> BasisCoefficients::entries() const {
  std::vector<std::pair<MultiIndex, Complex>> out;
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (values_[i] != Complex(0.0)) {
      out.emplace_back(table_->at(static_cast<std::size_t>(i)), values_[i]);
    }
  }
  return out;
}

namespace ladder {

void raise_add(const MultiIndexTable& table, int axis, int n_in, std::span<const Complex> in,
               Complex scale, std::span<Complex> out) {
  if (n_in + 1 > table.capacity()) {
    raise(ErrorCode::SupportOverflow, "raising beyond table capacity");
  }
  const std::size_t n = table.size_upto(n_in);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Complex v = in[pos];
    if (v == Complex(0.0)) continue;
    const auto up = static_cast<std::size_t>(table.raised(pos, axis));
    out[up] += scale * std::sqrt(static_cast<double>(table.at(pos)[axis] + 1)) * v;
  }
}

void lower_add(const MultiIndexTable& table, int axis, int n_in, std::span<const Complex> in,
               Complex scale, std::span<Complex> out) {
  const std::size_t n = table.size_upto(n_in);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const auto down = table.lowered(pos, axis);
    if (down < 0) continue;
    const Complex v = in[pos];
    if (v == Complex(0.0)) continue;
    out[static_cast<std::size_t>(down)] +=
        scale * std::sqrt(static_cast<double>(table.at(pos)[axis])) * v;
  }
}

void position_add(const MultiIndexTable& table, const CMatrix& A, int axis, int n_in,
                  std::span<const Complex> in, Complex scale, std::span<Complex> out) {
  const int d = table.dim();
  const Complex s = scale * (1.0 / std::numbers::sqrt2);
  for (int p = 0; p < d; ++p) {
    const Complex aip = A(axis, p);
    if (aip != Complex(0.0)) {
      raise_add(table, p, n_in, in, s * aip, out);
      lower_add(table, p, n_in, in, s * std::conj(aip), out);
    }
  }
}

}  // namespace ladder

CVector evaluate_phi0(const WavepacketFrame& frame, const RMatrix& points) {
  const int d = frame.dim();
  require(points.rows() == d, "points must be d x n");
  const CMatrix gamma = frame.B * frame.A.inverse();
  const Complex prefactor = std::pow(std::numbers::pi * frame.hbar, -0.25 * d) *
                            frame.inv_sqrt_detA();
  CVector out(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const RVector dx = points.col(c) - frame.a;
    const Complex quad = dx.cast<Complex>().dot(gamma * dx.cast<Complex>());
    const Complex expo = -quad / (2.0 * frame.hbar) + Complex(0, frame.eta.dot(dx) / frame.hbar);
    out[c] = prefactor * std::exp(expo);
  }
  return out;
}

CMatrix evaluate_basis(const WavepacketFrame& frame, int max_degree, const RMatrix& points) {
  const int d = frame.dim();
  require(max_degree >= 0, "max degree must be >= 0");
  require(points.rows() == d, "points must be d x n");
  const auto table = MultiIndexTable::make(d, max_degree);
  const auto n_basis = static_cast<Eigen::Index>(table->size());
  const Eigen::Index n_pts = points.cols();

  CMatrix phi(n_pts, n_basis);
  phi.col(0) = evaluate_phi0(frame, points);
  if (max_degree == 0) return phi;

  const CMatrix a_inv = frame.A.inverse();
  const CMatrix mix = a_inv * frame.A.conjugate();
  const CMatrix y =
      std::sqrt(2.0 / frame.hbar) * a_inv * (points.colwise() - frame.a).cast<Complex>();

  for (std::size_t pos = 1; pos < table->size(); ++pos) {
    const MultiIndex& j = table->at(pos);
    int m = 0;
    while (j[m] == 0) ++m;
    const auto k = static_cast<std::size_t>(table->lowered(pos, m));
    const MultiIndex& kk = table->at(k);
    auto col = phi.col(static_cast<Eigen::Index>(pos));
    col = y.row(m).transpose().cwiseProduct(phi.col(static_cast<Eigen::Index>(k)));
    for (int n = 0; n < d; ++n) {
      const auto kn = table->lowered(k, n);
      if (kn < 0) continue;
      col -= mix(m, n) * std::sqrt(static_cast<double>(kk[n])) * phi.col(kn);
    }
    col /= std::sqrt(static_cast<double>(j[m]));
  }
  return phi;
}

CVector evaluate_expansion(const WavepacketFrame& frame, const BasisCoefficients& coeffs,
                           const RMatrix& points) {
  check_frame(frame, coeffs);
  const int support = coeffs.support();
  const Eigen::Index n_pts = points.cols();
  CVector out(n_pts);
  for (Eigen::Index start = 0; start < n_pts; start += kPointChunk) {
    const Eigen::Index len = std::min(kPointChunk, n_pts - start);
    const CMatrix phi = evaluate_basis(frame, support, points.middleCols(start, len));
    out.segment(start, len) = phi * coeffs.values();
  }
  return out;
}

BasisCoefficients apply_raising(const WavepacketFrame& frame, int axis,
                                const BasisCoefficients& coeffs) {
  check_frame(frame, coeffs);
  require(axis >= 0 && axis < frame.dim(), "axis out of range");
  auto out = grown(frame, coeffs);
  ladder::raise_add(coeffs.table(), axis, coeffs.support(),
                    {coeffs.values().data(), static_cast<std::size_t>(coeffs.values().size())},
                    1.0, {out.values().data(), static_cast<std::size_t>(out.values().size())});
  return out;
}

BasisCoefficients apply_lowering(const WavepacketFrame& frame, int axis,
                                 const BasisCoefficients& coeffs) {
  check_frame(frame, coeffs);
  require(axis >= 0 && axis < frame.dim(), "axis out of range");
  auto out = grown(frame, coeffs);
  ladder::lower_add(coeffs.table(), axis, coeffs.support(),
                    {coeffs.values().data(), static_cast<std::size_t>(coeffs.values().size())},
                    1.0, {out.values().data(), static_cast<std::size_t>(out.values().size())});
  return out;
}

BasisCoefficients apply_position(const WavepacketFrame& frame, int axis,
                                 const BasisCoefficients& coeffs) {
  check_frame(frame, coeffs);
  require(axis >= 0 && axis < frame.dim(), "axis out of range");
  auto out = grown(frame, coeffs);
  ladder::position_add(coeffs.table(), frame.A, axis, coeffs.support(),
                       {coeffs.values().data(), static_cast<std::size_t>(coeffs.values().size())},
                       std::sqrt(frame.hbar),
                       {out.values().data(), static_cast<std::size_t>(out.values().size())});
  return out;
}

}  // namespace hagedorn
