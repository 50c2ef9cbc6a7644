#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "hagedorn/wavepacket_basis.hpp"

namespace hagedorn::runner {

/// Coefficients of (x_axis - a_axis) psi; replaceable so that validate can be
/// shown to catch a broken kernel.
using PositionKernel = std::function<BasisCoefficients(const WavepacketFrame&, int, const BasisCoefficients&)>;

struct ValidateOptions {
  /// Multiplies every scalable tolerance; 0.01 shows which checks are close to their limit.
  double tolerance_scale = 1.0;
  std::uint64_t seed = 7;
  PositionKernel position = apply_position;
};

struct Invariant {
  enum class Kind { AtMost, AtLeast, Exact };
  std::string module;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  Kind kind = Kind::AtMost;
  bool scalable = true;
  bool passed = false;
  /// Decades of headroom: log10(limit / value) for AtMost, log10(value / limit) for AtLeast.
  double margin = 0.0;
  std::string note;
};

struct ValidateReport {
  std::vector<Invariant> items;
  bool passed() const;
  std::size_t failures() const;
  void print(std::ostream& os) const;
  const Invariant* find(const std::string& name) const;
};

ValidateReport run_validate(const ValidateOptions& options = {});

}  // namespace hagedorn::runner
