#include "hagedorn/serialize.hpp"

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {

using nlohmann::json;

json vec(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json rows(const RMatrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
  return out;
}

json cvec(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

}  // namespace

json to_json(const MultiIndex& j) {
  return std::vector<int>(j.entries().begin(), j.entries().end());
}

json to_json(const ClassicalState& s) {
  return {{"t", s.t},           {"a", vec(s.a)},
          {"eta", vec(s.eta)},  {"A_re", rows(s.A.real())},
          {"A_im", rows(s.A.imag())}, {"B_re", rows(s.B.real())},
          {"B_im", rows(s.B.imag())}, {"S", s.S},
          {"detA_arg", s.detA_arg}};
}

json to_json(const Trajectory& traj) {
  json cols = {{"t", json::array()},    {"a", json::array()},    {"eta", json::array()},
               {"A_re", json::array()}, {"A_im", json::array()}, {"B_re", json::array()},
               {"B_im", json::array()}, {"S", json::array()},    {"detA_arg", json::array()}};
  for (const auto& s : traj.nodes()) {
    const json row = to_json(s);
    for (auto& [key, col] : cols.items()) col.push_back(row.at(key));
  }
  return {{"schema_version", kSchemaVersion}, {"tolerance", traj.tolerance()}, {"nodes", cols}};
}

json to_json(const BasisCoefficients& c) {
  json out = json::array();
  for (const auto& [j, v] : c.entries()) {
    out.push_back({{"index", to_json(j)}, {"re", v.real()}, {"im", v.imag()}});
  }
  return out;
}

json to_json(const CoefficientHierarchy& h) {
  json orders = json::array();
  for (int k = 0; k < h.l(); ++k) {
    json per_time = json::array();
    for (std::size_t i = 0; i < h.num_times(); ++i) per_time.push_back(to_json(h.coefficients(i, k)));
    orders.push_back({{"k", k}, {"support", h.J() + 3 * k}, {"snapshots", per_time}});
  }
  return {{"schema_version", kSchemaVersion},
          {"dim", h.dim()},
          {"J", h.J()},
          {"l", h.l()},
          {"p_resolved", h.p_resolved()},
          {"times", h.times()},
          {"sparsity_violation", h.sparsity_violation()},
          {"orders", orders}};
}

json to_json(const AsymptoticData& a) {
  return {{"side", to_string(a.side)},
          {"a", vec(a.a)},
          {"eta", vec(a.eta)},
          {"A_re", rows(a.A.real())},
          {"A_im", rows(a.A.imag())},
          {"B_re", rows(a.B.real())},
          {"B_im", rows(a.B.imag())},
          {"S", a.S},
          {"convergence_residual", a.convergence_residual},
          {"horizon", a.horizon}};
}

json to_json(const ScatteringResult& r) {
  json limits = json::array();
  for (std::size_t k = 0; k < r.limits.c.size(); ++k) {
    limits.push_back({{"k", k}, {"values", cvec(r.limits.c[k].head(static_cast<Eigen::Index>(
                                             r.limits.table->size_upto(r.limits.J + 3 * static_cast<int>(k)))))}});
  }
  json caveats = json::array();
  if (r.dimension_caveat) {
    caveats.push_back("dimension below 3: convergence of the coefficient limits is not covered by the proof");
  }
  return {{"schema_version", kSchemaVersion},
          {"hbar", r.hbar},
          {"g", r.g},
          {"l", r.l},
          {"incoming", to_json(r.incoming)},
          {"outgoing", to_json(r.outgoing)},
          {"t_start", r.limits.t_start},
          {"horizon", r.limits.horizon},
          {"cauchy_residual", r.limits.cauchy_residual},
          {"tail_bound", r.limits.tail_bound},
          {"coefficient_limits", limits},
          {"out_coefficients", to_json(r.out_coefficients)},
          {"unitarity_deviation", r.unitarity_deviation},
          {"caveats", caveats}};
}

json to_json(const BoundConstants& b) {
  return {{"D1", b.D1},       {"D2", b.D2},           {"D3", b.D3},
          {"D5", b.D5},       {"delta", b.delta},     {"T", b.T},
          {"n_probe", b.n_probe}, {"probe_exhaustive", b.probe_exhaustive}};
}

json to_json(const BoundReport& r) {
  return {{"worst_ratio", r.worst_ratio}, {"worst_k", r.worst_k}, {"worst_p", r.worst_p},
          {"worst_t", r.worst_t},         {"checks", r.checks},   {"telescoping", r.telescoping},
          {"holds", r.holds()}};
}

BasisCoefficients coefficients_from_json(const json& j, TablePtr table, int support) {
  BasisCoefficients c(std::move(table), support);
  for (const auto& e : j) {
    const MultiIndex idx(e.at("index").get<std::vector<int>>());
    require(idx.dim() == c.dim(), "coefficient index has the wrong dimension");
    c.at(idx) = Complex(e.at("re").get<double>(), e.at("im").get<double>());
  }
  return c;
}

}  // namespace hagedorn
