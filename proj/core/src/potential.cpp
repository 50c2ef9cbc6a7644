#include "hagedorn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

constexpr int kMaxTaylorOrder = 160;

// Normalized Hermite values h_n(y) = H_n(y) / n! for n <= order.
void normalized_hermite(double y, int order, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(order) + 1, 0.0);
  out[0] = 1.0;
  if (order >= 1) out[1] = 2.0 * y;
  for (int n = 1; n < order; ++n) {
    out[static_cast<std::size_t>(n) + 1] =
        (2.0 * y * out[static_cast<std::size_t>(n)] - 2.0 * out[static_cast<std::size_t>(n) - 1]) /
        static_cast<double>(n + 1);
  }
}

double binomial_real(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

TaylorCoefficients::TaylorCoefficients(TablePtr table, int max_order)
    : table_(std::move(table)), max_order_(max_order) {
  require(table_ != nullptr, "Taylor coefficients need a multi-index table");
  require(max_order >= 0 && max_order <= table_->capacity(),
          "Taylor order exceeds table capacity");
  values_.assign(table_->size_upto(max_order), 0.0);
}

double TaylorCoefficients::at(const MultiIndex& m) const {
  if (m.order() > max_order_) {
    raise(ErrorCode::UnsupportedOrder, "Taylor coefficient " + m.to_string() +
                                           " beyond computed order " +
                                           std::to_string(max_order_));
  }
  return values_[table_->position(m)];
}

std::span<const double> TaylorCoefficients::shell(int k) const {
  require(k >= 0 && k <= max_order_, "Taylor shell out of range");
  const auto b = table_->shell_begin(k);
  const auto e = table_->size_upto(k);
  return std::span<const double>(values_).subspan(b, e - b);
}

double TaylorCoefficients::shell_max_abs(int k) const {
  double m = 0.0;
  for (double v : shell(k)) m = std::max(m, std::abs(v));
  return m;
}

RVector TaylorCoefficients::gradient() const {
  require(max_order_ >= 1, "gradient needs Taylor order >= 1");
  const int d = dim();
  RVector g(d);
  for (int i = 0; i < d; ++i) g[i] = at(MultiIndex::unit(d, i));
  return g;
}

RMatrix TaylorCoefficients::hessian() const {
  require(max_order_ >= 2, "Hessian needs Taylor order >= 2");
  const int d = dim();
  RMatrix h(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      MultiIndex m(d);
      m.set(i, i == j ? 2 : 1);
      if (i != j) m.set(j, 1);
      // D^m V / m! carries a 1/2 on the diagonal.
      const double v = at(m) * (i == j ? 2.0 : 1.0);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

PotentialModel PotentialModel::free(int dim) {
  require(dim >= 1, "potential dimension must be >= 1");
  return PotentialModel(Kind::Polynomial, dim);
}

PotentialModel PotentialModel::polynomial(int dim, std::vector<PolynomialTerm> terms) {
  require(dim >= 1, "potential dimension must be >= 1");
  std::map<MultiIndex, double> merged;
  for (auto& t : terms) {
    require(t.power.dim() == dim, "polynomial term dimension mismatch");
    merged[t.power] += t.coeff;
  }
  PotentialModel p(Kind::Polynomial, dim);
  for (auto& [power, coeff] : merged) {
    if (coeff != 0.0) p.poly_.push_back({power, coeff});
  }
  return p;
}

PotentialModel PotentialModel::gaussian_sum(int dim, std::vector<GaussianTerm> terms) {
  require(dim >= 1, "potential dimension must be >= 1");
  for (const auto& t : terms) {
    require(t.center.size() == dim, "Gaussian center dimension mismatch");
    require(t.width > 0.0, "Gaussian width must be positive");
  }
  PotentialModel p(Kind::GaussianSum, dim);
  p.gauss_ = std::move(terms);
  return p;
}

PotentialModel PotentialModel::double_well(int dim, double lambda, double radius) {
  std::vector<PolynomialTerm> terms;
  const double q = lambda / 4.0;
  for (int i = 0; i < dim; ++i) {
    MultiIndex quartic(dim);
    quartic.set(i, 4);
    terms.push_back({quartic, q});
    MultiIndex quad(dim);
    quad.set(i, 2);
    terms.push_back({quad, -2.0 * q * radius * radius});
    for (int j = i + 1; j < dim; ++j) {
      MultiIndex mixed(dim);
      mixed.set(i, 2);
      mixed.set(j, 2);
      terms.push_back({mixed, 2.0 * q});
    }
  }
  terms.push_back({MultiIndex(dim), q * std::pow(radius, 4)});
  auto p = polynomial(dim, std::move(terms));
  p.kind_ = Kind::DoubleWell;
  return p;
}

std::string PotentialModel::kind_name() const {
  switch (kind_) {
    case Kind::Polynomial: return is_zero() ? "free" : "polynomial";
    case Kind::GaussianSum: return "gaussian_sum";
    case Kind::DoubleWell: return "double_well";
  }
  return "unknown";
}

bool PotentialModel::is_zero() const {
  if (kind_ == Kind::GaussianSum) {
    return std::all_of(gauss_.begin(), gauss_.end(),
                       [](const GaussianTerm& g) { return g.amplitude == 0.0; });
  }
  return poly_.empty();
}

int PotentialModel::polynomial_degree() const {
  if (kind_ == Kind::GaussianSum) return is_zero() ? 0 : -1;
  int deg = 0;
  for (const auto& t : poly_) deg = std::max(deg, t.power.order());
  return deg;
}

PotentialModel& PotentialModel::with_decay(DecayBounds bounds) {
  require(bounds.beta > 1.0 && bounds.v0 > 0.0 && bounds.v1 > 0.0,
          "decay bounds need beta > 1, v0 > 0, v1 > 0");
  decay_ = bounds;
  return *this;
}

PotentialModel& PotentialModel::with_growth(GrowthBounds bounds) {
  require(bounds.M > 0.0 && bounds.tau >= 0.0, "growth bounds need M > 0, tau >= 0");
  growth_ = bounds;
  return *this;
}

std::optional<DecayBounds> PotentialModel::effective_decay() const {
  if (decay_) return decay_;
  if (is_zero()) return DecayBounds{2.0, 1.0, 1.0};
  return std::nullopt;
}

void PotentialModel::taylor_coeffs_into(const RVector& a, TaylorCoefficients& out) const {
  require(a.size() == dim_, "evaluation point dimension mismatch");
  require(out.dim() == dim_, "Taylor table dimension mismatch");
  const int order = out.max_order();
  if (order > kMaxTaylorOrder) {
    raise(ErrorCode::UnsupportedOrder,
          "Taylor order " + std::to_string(order) + " exceeds supported maximum " +
              std::to_string(kMaxTaylorOrder));
  }
  const auto& table = out.table();
  const std::size_t n = table.size_upto(order);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;

  if (kind_ != Kind::GaussianSum) {
    // D^m (x^p) / m! at a = C(p, m) a^(p-m), per axis.
    std::vector<int> sub(static_cast<std::size_t>(dim_));
    for (const auto& term : poly_) {
      auto recurse = [&](auto&& self, int axis, int deg, double w) -> void {
        if (axis == dim_) {
          if (deg <= order) out[table.position(MultiIndex(sub))] += w * term.coeff;
          return;
        }
        const int p = term.power[axis];
        for (int m = 0; m <= p && deg + m <= order; ++m) {
          sub[static_cast<std::size_t>(axis)] = m;
          const double f = binomial_real(p, m) * std::pow(a[axis], p - m);
          self(self, axis + 1, deg + m, w * f);
        }
      };
      recurse(recurse, 0, 0, 1.0);
    }
    return;
  }

  std::vector<std::vector<double>> herm(static_cast<std::size_t>(dim_));
  for (const auto& g : gauss_) {
    double r2 = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double y = (a[i] - g.center[i]) / g.width;
      r2 += y * y;
      normalized_hermite(y, order, herm[static_cast<std::size_t>(i)]);
      // Fold in (-1)^k / width^k.
      double s = 1.0;
      for (int k = 0; k <= order; ++k) {
        herm[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *= s;
        s *= -1.0 / g.width;
      }
    }
    const double base = g.amplitude * std::exp(-r2);
    if (base == 0.0) continue;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const auto& m = table.at(pos);
      double v = base;
      for (int i = 0; i < dim_; ++i) {
        v *= herm[static_cast<std::size_t>(i)][static_cast<std::size_t>(m[i])];
      }
      out[pos] += v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(out[i])) {
      raise(ErrorCode::UnsupportedOrder, "Taylor recurrence overflow at order " +
                                             std::to_string(table.at(i).order()));
    }
  }
}

TaylorCoefficients PotentialModel::taylor_coeffs(const RVector& a, int max_order) const {
  require(max_order >= 0, "Taylor order must be >= 0");
  TaylorCoefficients out(MultiIndexTable::make(dim_, max_order), max_order);
  taylor_coeffs_into(a, out);
  return out;
}

double PotentialModel::value(const RVector& x) const { return taylor_coeffs(x, 0).value(); }

RVector PotentialModel::gradient(const RVector& x) const {
  return taylor_coeffs(x, 1).gradient();
}

RMatrix PotentialModel::hessian(const RVector& x) const { return taylor_coeffs(x, 2).hessian(); }

double PotentialModel::derivative(const RVector& x, const MultiIndex& m) const {
  return taylor_coeffs(x, m.order()).at(m) * m.factorial();
}

DecayCheckReport decay_check(const PotentialModel& pot, const RVector& lo, const RVector& hi,
                             int samples_per_axis, int max_order) {
  const int d = pot.dim();
  require(lo.size() == d && hi.size() == d, "decay_check box dimension mismatch");
  require(samples_per_axis >= 2, "decay_check needs at least 2 samples per axis");
  DecayCheckReport report;
  report.worst_point = RVector::Zero(d);
  report.worst_index = MultiIndex(d);
  if (pot.is_zero()) return report;
  if (pot.kind() != PotentialModel::Kind::GaussianSum) {
    raise(ErrorCode::MissingDecayMetadata,
          "polynomial potentials cannot satisfy the short-range decay hypothesis");
  }
  if (!pot.decay()) {
    raise(ErrorCode::MissingDecayMetadata, "potential declares no decay bounds");
  }
  const auto bounds = *pot.decay();
  TaylorCoefficients taylor(MultiIndexTable::make(d, max_order), max_order);

  std::vector<int> counter(static_cast<std::size_t>(d), 0);
  RVector x(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      x[i] = lo[i] + (hi[i] - lo[i]) * counter[static_cast<std::size_t>(i)] /
                         static_cast<double>(samples_per_axis - 1);
    }
    pot.taylor_coeffs_into(x, taylor);
    const double bracket = std::sqrt(1.0 + x.squaredNorm());
    for (std::size_t pos = 0; pos < taylor.table().size_upto(max_order); ++pos) {
      const int k = taylor.table().degree_of(pos);
      const double ratio = std::abs(taylor[pos]) * std::pow(bracket, bounds.beta + k) /
                           (bounds.v0 * std::pow(bounds.v1, k));
      if (ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        report.worst_point = x;
        report.worst_index = taylor.table().at(pos);
      }
    }
    ++report.samples;
    int axis = 0;
    while (axis < d && ++counter[static_cast<std::size_t>(axis)] == samples_per_axis) {
      counter[static_cast<std::size_t>(axis)] = 0;
      ++axis;
    }
    if (axis == d) break;
  }
  return report;
}

}  // namespace hagedorn
