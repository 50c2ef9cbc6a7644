#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hagedorn/errors.hpp"
#include "hagedorn/truncation.hpp"

namespace hagedorn::runner {

/// Configuration problem tied to a field and, when known, a source line.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Initial coefficients drawn from an exponentially decaying class:
/// |c_j| = C exp(-rate |j|) with seeded phases, truncated at J = nu * l.
struct TailClass {
  double K = 1.0;     // declared decay constant, |c_j| <= exp(-K |j|)
  double rate = 1.0;  // actual decay rate, must be >= K
  int nu = 1;
};

struct InitialSpec {
  ClassicalState state;
  /// Explicit c_{0,j}; empty when a tail class is used.
  std::vector<std::pair<MultiIndex, Complex>> coefficients;
  std::optional<double> declared_K;
  std::optional<TailClass> tail;
};

struct RunSection {
  std::vector<double> hbar;
  TruncationMode mode = TruncationMode::FixedG;
  double g = 0.4;
  int l_max = 12;  // empirical mode only
  double T = 1.0;
  std::vector<double> times;  // defaults to {T}
  std::vector<double> b;
  bool oracle = true;
};

struct GridSection {
  int points = 4096;
  double dt = 1e-4;
  double margin = 12.0;
  int order = 2;
};

struct ScatterSection {
  bool present = false;
  double g = 0.3;
  double tol = 1e-6;
  double first_check = 8.0;
  double t_max = 1e6;
};

struct EhrenfestSection {
  bool present = false;
  double T_prime = 0.1;
  double tau = 0.0;
  double v = 0.0;
  std::optional<double> kappa;
  std::optional<double> lambda;
  double lyapunov_time = 12.0;
};

struct RunConfig {
  std::filesystem::path source;
  PotentialModel potential = PotentialModel::free(1);
  InitialSpec initial;
  RunSection run;
  GridSection grid;
  ScatterSection scatter;
  EhrenfestSection ehrenfest;
  std::uint64_t seed = 0;

  int dim() const { return potential.dim(); }
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& source = "<string>");

/// Initial coefficients for a run whose truncation order is l.
BasisCoefficients initial_coefficients(const RunConfig& cfg, int l);

/// Norm of the discarded part of a tail-class state truncated at |j| <= J.
double tail_truncation_norm(const TailClass& tail, int dim, int J);

}  // namespace hagedorn::runner
