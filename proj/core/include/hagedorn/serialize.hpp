#pragma once

#include <nlohmann/json.hpp>

#include "hagedorn/hierarchy.hpp"
#include "hagedorn/scattering.hpp"

namespace hagedorn {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const MultiIndex& j);
nlohmann::json to_json(const ClassicalState& s);
/// Columns t, a, eta, A_re, A_im, B_re, B_im, S, detA_arg; matrices row-major.
nlohmann::json to_json(const Trajectory& traj);
/// List of {"index": [...], "re": x, "im": y} for the non-zero entries.
nlohmann::json to_json(const BasisCoefficients& c);
nlohmann::json to_json(const CoefficientHierarchy& h);
nlohmann::json to_json(const AsymptoticData& a);
nlohmann::json to_json(const ScatteringResult& r);
nlohmann::json to_json(const BoundConstants& b);
nlohmann::json to_json(const BoundReport& r);

BasisCoefficients coefficients_from_json(const nlohmann::json& j, TablePtr table, int support);

}  // namespace hagedorn
