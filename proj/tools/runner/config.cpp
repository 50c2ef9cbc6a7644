#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include <toml.hpp>

namespace hagedorn::runner {

namespace {

std::string describe(const std::string& field, int line, const std::string& message) {
  std::ostringstream os;
  os << "config field '" << field << "'";
  if (line > 0) os << " (line " << line << ")";
  os << ": " << message;
  return os.str();
}

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

// Typed access to one table with field names qualified by their section, and
// rejection of keys nobody asked for.
class Section {
 public:
  Section(const toml::table* table, std::string name, int line)
      : table_(table), name_(std::move(name)), line_(line) {}

  bool present() const { return table_ != nullptr; }
  const std::string& name() const { return name_; }

  std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const toml::node* n = table_ ? table_->get(key) : nullptr;
    throw ConfigError(field(key), n ? line_of(*n) : line_, message);
  }

  const toml::node* node(const std::string& key) {
    seen_.insert(key);
    return table_ ? table_->get(key) : nullptr;
  }

  bool has(const std::string& key) {
    return node(key) != nullptr;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      fail(key, "required number is missing");
    }
    return as_number(*n, key);
  }

  std::optional<double> optional_number(const std::string& key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    return as_number(*n, key);
  }

  long integer(const std::string& key, std::optional<long> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      fail(key, "required integer is missing");
    }
    if (auto v = n->value_exact<std::int64_t>()) return static_cast<long>(*v);
    fail(key, "expected an integer");
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      fail(key, "required string is missing");
    }
    if (auto v = n->value_exact<std::string>()) return *v;
    fail(key, "expected a string");
  }

  bool boolean(const std::string& key, bool fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    fail(key, "expected true or false");
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    const toml::node* n = node(key);
    if (!n) {
      if (fallback) return *fallback;
      fail(key, "required array is missing");
    }
    if (auto scalar = n->value<double>()) return {*scalar};
    const toml::array* arr = n->as_array();
    if (!arr) fail(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
      const auto v = e.value<double>();
      if (!v) throw ConfigError(field(key), line_of(e), "array entries must be numbers");
      out.push_back(*v);
    }
    return out;
  }

  RVector vector(const std::string& key, int dim, std::optional<double> fill = std::nullopt) {
    if (!has(key) && fill) return RVector::Constant(dim, *fill);
    const auto v = numbers(key);
    if (static_cast<int>(v.size()) != dim) fail(key, "expected " + std::to_string(dim) + " entries");
    return Eigen::Map<const RVector>(v.data(), dim);
  }

  RMatrix matrix(const std::string& key, int dim, const RMatrix& fallback) {
    const toml::node* n = node(key);
    if (!n) return fallback;
    const toml::array* rows = n->as_array();
    if (!rows || static_cast<int>(rows->size()) != dim) fail(key, "expected " + std::to_string(dim) + " rows");
    RMatrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      const toml::array* row = (*rows)[static_cast<std::size_t>(r)].as_array();
      if (!row || static_cast<int>(row->size()) != dim) fail(key, "every row needs " + std::to_string(dim) + " entries");
      for (int c = 0; c < dim; ++c) {
        const auto v = (*row)[static_cast<std::size_t>(c)].value<double>();
        if (!v) fail(key, "matrix entries must be numbers");
        m(r, c) = *v;
      }
    }
    return m;
  }

  const toml::array* array(const std::string& key) {
    const toml::node* n = node(key);
    if (!n) return nullptr;
    const toml::array* arr = n->as_array();
    if (!arr) fail(key, "expected an array");
    return arr;
  }

  const toml::table* subtable(const std::string& key) {
    const toml::node* n = node(key);
    if (!n) return nullptr;
    const toml::table* t = n->as_table();
    if (!t) fail(key, "expected a table");
    return t;
  }

  void reject_unknown() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (!seen_.contains(key)) throw ConfigError(field(key), line_of(v), "unknown key");
    }
  }

 private:
  double as_number(const toml::node& n, const std::string& key) const {
    if (auto v = n.value<double>()) {
      if (!std::isfinite(*v)) fail(key, "must be finite");
      return *v;
    }
    fail(key, "expected a number");
  }

  const toml::table* table_;
  std::string name_;
  int line_;
  std::set<std::string> seen_;
};

Section section(const toml::table& root, const std::string& name) {
  const toml::node* n = root.get(name);
  if (!n) return Section(nullptr, name, 0);
  const toml::table* t = n->as_table();
  if (!t) throw ConfigError(name, line_of(*n), "expected a table");
  return Section(t, name, line_of(*n));
}

MultiIndex index_entry(Section& s, const std::string& key, const toml::node& node, int dim) {
  const toml::array* arr = node.as_array();
  if (!arr || static_cast<int>(arr->size()) != dim) {
    throw ConfigError(s.field(key), line_of(node), "multi-index needs " + std::to_string(dim) + " entries");
  }
  std::vector<int> entries;
  for (const auto& e : *arr) {
    const auto v = e.value_exact<std::int64_t>();
    if (!v || *v < 0) throw ConfigError(s.field(key), line_of(e), "multi-index entries must be integers >= 0");
    entries.push_back(static_cast<int>(*v));
  }
  return MultiIndex(entries);
}

PotentialModel parse_potential(Section s) {
  if (!s.present()) throw ConfigError("potential", 0, "section is missing");
  const int dim = static_cast<int>(s.integer("dim", 1));
  if (dim < 1 || dim > 8) s.fail("dim", "must be between 1 and 8");
  const std::string kind = s.string("kind");
  PotentialModel pot = PotentialModel::free(dim);
  if (kind == "free") {
    pot = PotentialModel::free(dim);
  } else if (kind == "polynomial") {
    const toml::array* terms = s.array("terms");
    if (!terms || terms->empty()) s.fail("terms", "polynomial potentials need at least one term");
    std::vector<PolynomialTerm> out;
    for (const auto& t : *terms) {
      const toml::table* tt = t.as_table();
      if (!tt) throw ConfigError(s.field("terms"), line_of(t), "each term is a table {power = [...], coeff = x}");
      Section term(tt, s.field("terms"), line_of(t));
      const toml::node* p = term.node("power");
      if (!p) term.fail("power", "missing");
      out.push_back({index_entry(term, "power", *p, dim), term.number("coeff")});
      term.reject_unknown();
    }
    pot = PotentialModel::polynomial(dim, std::move(out));
  } else if (kind == "gaussian_sum") {
    const toml::array* terms = s.array("terms");
    if (!terms || terms->empty()) s.fail("terms", "Gaussian sums need at least one term");
    std::vector<GaussianTerm> out;
    for (const auto& t : *terms) {
      const toml::table* tt = t.as_table();
      if (!tt) throw ConfigError(s.field("terms"), line_of(t), "each term is a table {center, width, amplitude}");
      Section term(tt, s.field("terms"), line_of(t));
      GaussianTerm g;
      g.center = term.vector("center", dim, 0.0);
      g.width = term.number("width", 1.0);
      g.amplitude = term.number("amplitude");
      if (!(g.width > 0.0)) term.fail("width", "must be positive");
      term.reject_unknown();
      out.push_back(std::move(g));
    }
    pot = PotentialModel::gaussian_sum(dim, std::move(out));
  } else if (kind == "double_well") {
    const double lambda = s.number("lambda", 1.0);
    const double radius = s.number("radius", 1.0);
    if (!(lambda > 0.0)) s.fail("lambda", "must be positive");
    pot = PotentialModel::double_well(dim, lambda, radius);
  } else {
    s.fail("kind", "unknown potential kind '" + kind + "' (free, polynomial, gaussian_sum, double_well)");
  }
  if (const toml::table* d = s.subtable("decay")) {
    Section decay(d, s.field("decay"), 0);
    DecayBounds b;
    b.beta = decay.number("beta");
    b.v0 = decay.number("v0");
    b.v1 = decay.number("v1");
    if (!(b.beta > 1.0)) decay.fail("beta", "must exceed 1");
    if (!(b.v0 > 0.0 && b.v1 > 0.0)) decay.fail("v0", "v0 and v1 must be positive");
    decay.reject_unknown();
    pot.with_decay(b);
  }
  s.reject_unknown();
  return pot;
}

InitialSpec parse_initial(Section s, int dim) {
  InitialSpec init;
  ClassicalState& st = init.state;
  st.t = 0.0;
  st.a = s.vector("a", dim, 0.0);
  st.eta = s.vector("eta", dim, 0.0);
  const RMatrix I = RMatrix::Identity(dim, dim);
  const RMatrix Z = RMatrix::Zero(dim, dim);
  st.A = s.matrix("A_re", dim, I).cast<Complex>() + Complex(0.0, 1.0) * s.matrix("A_im", dim, Z).cast<Complex>();
  st.B = s.matrix("B_re", dim, I).cast<Complex>() + Complex(0.0, 1.0) * s.matrix("B_im", dim, Z).cast<Complex>();
  st.S = 0.0;
  if (std::abs(st.A.determinant()) < 1e-12) s.fail("A_re", "A is singular");
  st.detA_arg = std::arg(st.A.determinant());
  const double cond = cond1_residuals(st.A, st.B).max();
  if (cond > 1e-8) {
    std::ostringstream os;
    os << "A and B violate the symplectic conditions (residual " << cond << " > 1e-8)";
    s.fail(s.has("B_re") ? "B_re" : "A_re", os.str());
  }

  init.declared_K = s.optional_number("K");
  if (const toml::table* t = s.subtable("tail")) {
    Section tail(t, s.field("tail"), 0);
    TailClass tc;
    tc.K = tail.number("K");
    tc.rate = tail.number("rate", tc.K);
    tc.nu = static_cast<int>(tail.integer("nu", 1));
    if (!(tc.K > 0.0)) tail.fail("K", "must be positive");
    if (tc.rate < tc.K) tail.fail("rate", "actual decay rate must be at least the declared K");
    if (tc.nu < 1) tail.fail("nu", "must be >= 1");
    tail.reject_unknown();
    init.tail = tc;
  }

  if (const toml::array* coeffs = s.array("coefficients")) {
    if (init.tail) s.fail("coefficients", "give either coefficients or a tail class, not both");
    double norm2 = 0.0;
    for (const auto& e : *coeffs) {
      const toml::table* et = e.as_table();
      if (!et) throw ConfigError(s.field("coefficients"), line_of(e), "each entry is {index = [...], re = x, im = y}");
      Section entry(et, s.field("coefficients"), line_of(e));
      const toml::node* idx = entry.node("index");
      if (!idx) entry.fail("index", "missing");
      const MultiIndex j = index_entry(entry, "index", *idx, dim);
      const Complex c(entry.number("re", 0.0), entry.number("im", 0.0));
      entry.reject_unknown();
      if (init.declared_K && std::abs(c) > std::exp(-*init.declared_K * j.order()) * (1.0 + 1e-12)) {
        throw ConfigError(s.field("coefficients"), line_of(e),
                          "|c_j| exceeds exp(-K|j|) for the declared K at index " + j.to_string());
      }
      norm2 += std::norm(c);
      init.coefficients.emplace_back(j, c);
    }
    if (std::abs(norm2 - 1.0) > 1e-10) {
      std::ostringstream os;
      os << "coefficients must have unit norm (sum |c|^2 = " << norm2 << ")";
      s.fail("coefficients", os.str());
    }
  } else if (!init.tail) {
    init.coefficients.emplace_back(MultiIndex(dim), Complex(1.0));
  }
  s.reject_unknown();
  return init;
}

RunSection parse_run(Section s) {
  RunSection r;
  r.hbar = s.numbers("hbar", std::vector<double>{0.1});
  for (double h : r.hbar)
    if (!(h > 0.0 && h < 1.0)) s.fail("hbar", "every hbar must lie in (0, 1)");
  const std::string mode = s.string("truncation", "fixed_g");
  if (mode == "fixed_g") {
    r.mode = TruncationMode::FixedG;
    r.g = s.number("g", 0.4);
    if (!(r.g > 0.0)) s.fail("g", "must be positive");
  } else if (mode == "empirical") {
    r.mode = TruncationMode::Empirical;
    r.l_max = static_cast<int>(s.integer("l_max", 12));
    if (r.l_max < 2) s.fail("l_max", "must be >= 2");
  } else {
    s.fail("truncation", "expected 'fixed_g' or 'empirical'");
  }
  r.T = s.number("T", 1.0);
  if (!(r.T > 0.0)) s.fail("T", "must be positive");
  r.times = s.numbers("times", std::vector<double>{r.T});
  for (double t : r.times)
    if (t < 0.0 || t > r.T) s.fail("times", "output times must lie in [0, T]");
  std::sort(r.times.begin(), r.times.end());
  r.b = s.numbers("b", std::vector<double>{});
  for (double b : r.b)
    if (!(b >= 0.0)) s.fail("b", "radii must be non-negative");
  r.oracle = s.boolean("oracle", true);
  s.reject_unknown();
  return r;
}

GridSection parse_grid(Section s) {
  GridSection g;
  g.points = static_cast<int>(s.integer("points", 4096));
  if (g.points < 16 || (g.points & (g.points - 1)) != 0) s.fail("points", "must be a power of two >= 16");
  g.dt = s.number("dt", 1e-4);
  if (!(g.dt > 0.0)) s.fail("dt", "must be positive");
  g.margin = s.number("margin", 12.0);
  if (!(g.margin > 0.0)) s.fail("margin", "must be positive");
  g.order = static_cast<int>(s.integer("order", 2));
  if (g.order != 2 && g.order != 4) s.fail("order", "splitting order must be 2 or 4");
  s.reject_unknown();
  return g;
}

ScatterSection parse_scatter(Section s) {
  ScatterSection out;
  out.present = s.present();
  out.g = s.number("g", 0.3);
  out.tol = s.number("tol", 1e-6);
  out.first_check = s.number("first_check", 8.0);
  out.t_max = s.number("t_max", 1e6);
  if (!(out.g > 0.0)) s.fail("g", "must be positive");
  if (!(out.tol > 0.0)) s.fail("tol", "must be positive");
  if (!(out.first_check > 0.0 && out.t_max > out.first_check)) s.fail("t_max", "need 0 < first_check < t_max");
  s.reject_unknown();
  return out;
}

EhrenfestSection parse_ehrenfest(Section s) {
  EhrenfestSection e;
  e.present = s.present();
  e.T_prime = s.number("T_prime", 0.1);
  e.tau = s.number("tau", 0.0);
  e.v = s.number("v", 0.0);
  e.kappa = s.optional_number("kappa");
  e.lambda = s.optional_number("lambda");
  e.lyapunov_time = s.number("lyapunov_time", 12.0);
  if (!(e.T_prime > 0.0)) s.fail("T_prime", "must be positive");
  if (!(e.lyapunov_time > 0.0)) s.fail("lyapunov_time", "must be positive");
  s.reject_unknown();
  return e;
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : Error(ErrorCode::ConfigError, describe(field, line, message)), field_(std::move(field)), line_(line) {}

RunConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  toml::table root;
  try {
    root = toml::parse(text, source.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError("<syntax>", static_cast<int>(e.source().begin.line), std::string(e.description()));
  }
  RunConfig cfg;
  cfg.source = source;
  cfg.potential = parse_potential(section(root, "potential"));
  const int dim = cfg.potential.dim();
  cfg.initial = parse_initial(section(root, "initial"), dim);
  cfg.run = parse_run(section(root, "run"));
  cfg.grid = parse_grid(section(root, "grid"));
  cfg.scatter = parse_scatter(section(root, "scatter"));
  cfg.ehrenfest = parse_ehrenfest(section(root, "ehrenfest"));
  Section top(&root, "", 0);
  for (const char* name : {"potential", "initial", "run", "grid", "scatter", "ehrenfest"}) (void)top.node(name);
  const long seed = top.integer("seed", 0);
  if (seed < 0) top.fail("seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  top.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", 0, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

double tail_truncation_norm(const TailClass& tail, int dim, int J) {
  // |c_j|^2 = C^2 q^|j| with q = exp(-2 rate) and C^2 = (1 - q)^dim.
  const double q = std::exp(-2.0 * tail.rate);
  const double c2 = std::pow(1.0 - q, dim);
  double rest = 0.0;
  for (int n = J + 1;; ++n) {
    const double term = static_cast<double>(count_exact_degree(dim, n)) * c2 * std::pow(q, n);
    rest += term;
    if (term < 1e-18 * std::max(rest, 1e-300) || n > J + 4000) break;
  }
  return std::sqrt(rest);
}

BasisCoefficients initial_coefficients(const RunConfig& cfg, int l) {
  const int dim = cfg.dim();
  if (cfg.initial.tail) {
    const TailClass& tail = *cfg.initial.tail;
    const int J = tail.nu * l;
    const auto table = MultiIndexTable::make(dim, J);
    BasisCoefficients c(table, J);
    const double q = std::exp(-tail.rate);
    const double C = std::pow(1.0 - q * q, 0.5 * dim);
    // Phases come from the run seed so the same config reproduces the same state.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < table->size_upto(J); ++i) {
      const MultiIndex& j = table->at(i);
      c.values()[static_cast<Eigen::Index>(i)] = std::polar(C * std::pow(q, j.order()), phase(rng));
    }
    c.values() /= c.values().norm();
    return c;
  }
  int J = 0;
  for (const auto& [j, v] : cfg.initial.coefficients) J = std::max(J, j.order());
  const auto table = MultiIndexTable::make(dim, J);
  BasisCoefficients c(table, J);
  c.values().setZero();
  for (const auto& [j, v] : cfg.initial.coefficients) c.at(j) += v;
  return c;
}

}  // namespace hagedorn::runner
