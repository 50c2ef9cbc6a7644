#include <benchmark/benchmark.h>

#include <random>

#include "hagedorn/hierarchy.hpp"
#include "hagedorn/oracle.hpp"
#include "hagedorn/truncation.hpp"

using namespace hagedorn;

namespace {

PotentialModel quartic(int d) {
  std::vector<PolynomialTerm> terms;
  for (int ax = 0; ax < d; ++ax) {
    MultiIndex two(d), four(d);
    two.set(ax, 2);
    four.set(ax, 4);
    terms.push_back({two, 0.5});
    terms.push_back({four, 0.1});
  }
  return PotentialModel::polynomial(d, terms);
}

CVector random_vector(Eigen::Index n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

ClassicalState start(int d) { return ClassicalState::coherent(RVector::Constant(d, 0.8), RVector::Zero(d)); }

}  // namespace

// One application of the order-k operator at support N.
void BM_apply_Kk(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  const int k = 3;
  const auto pot = quartic(d);
  const auto taylor = pot.taylor_coeffs(RVector::Constant(d, 0.8), k + 2);
  const auto frame = WavepacketFrame::standard(d);
  const auto table = MultiIndexTable::make(d, N + k + 2);
  BasisCoefficients c(table, N);
  c.values() = random_vector(c.values().size());
  for (auto _ : state) benchmark::DoNotOptimize(apply_Kk(taylor, frame, k, c));
  state.counters["coefficients"] = static_cast<double>(c.values().size());
}
BENCHMARK(BM_apply_Kk)->Args({1, 40})->Args({2, 20})->Args({3, 10});

void BM_evaluate_basis(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const auto frame = WavepacketFrame::standard(1, 0.05);
  GridSpec s;
  s.center = RVector::Zero(1);
  s.half_width = RVector::Constant(1, 4.0);
  s.points = {4096};
  const Grid g(s);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_basis(frame, degree, g.points()));
}
BENCHMARK(BM_evaluate_basis)->Arg(8)->Arg(32);

void BM_split_operator_step(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  GridSpec s;
  s.center = RVector::Zero(d);
  s.half_width = RVector::Constant(d, 6.0);
  s.points = std::vector<int>(static_cast<std::size_t>(d), n);
  s.dt = 1e-3;
  const Grid g(s);
  auto frame = WavepacketFrame::standard(d, 0.1);
  frame.a.setConstant(0.8);
  SplitOperator op(g, quartic(d), 0.1);
  CVector psi = evaluate_phi0(frame, g.points());
  for (auto _ : state) op.advance(psi, s.dt);
  state.counters["points"] = static_cast<double>(g.size());
}
BENCHMARK(BM_split_operator_step)->Args({1, 4096})->Args({2, 256});

void BM_integrate_hierarchy(benchmark::State& state) {
  const int l = static_cast<int>(state.range(0));
  const auto pot = quartic(1);
  const auto traj = integrate_flow(pot, start(1), 1.0);
  HierarchyOptions ho;
  ho.l = l;
  const auto c0 = BasisCoefficients::delta(MultiIndexTable::make(1, 0), MultiIndex{0});
  for (auto _ : state) benchmark::DoNotOptimize(integrate_hierarchy(traj, pot, c0, ho));
}
BENCHMARK(BM_integrate_hierarchy)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
