#include <random>

#include <benchmark/benchmark.h>

#include "ckt/connalg.hpp"
#include "ckt/polyharm.hpp"
#include "ckt/spectral.hpp"
#include "ckt/torusmodel.hpp"

using namespace ckt;

namespace {

Eigen::MatrixXcd random_skew(std::mt19937_64& rng, int r) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd M(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) M(i, j) = cplx(g(rng), g(rng));
  Eigen::MatrixXcd S = 0.5 * (M - M.adjoint());
  S -= (S.trace() / static_cast<double>(r)) * Eigen::MatrixXcd::Identity(r, r);
  return S;
}

FourierConnection test_connection(std::mt19937_64& rng, int n, int r) {
  FourierConnection c(n, r);
  FiberConnForm G0(n, r), Gp(n, r, false), Gm(n, r, false);
  for (int j = 0; j < n; ++j) {
    G0.gammas[static_cast<size_t>(j)] = random_skew(rng, r);
    Gp.gammas[static_cast<size_t>(j)] = random_skew(rng, r) * cplx(0.5, 0.5);
    Gm.gammas[static_cast<size_t>(j)] = -Gp.gammas[static_cast<size_t>(j)].adjoint();
  }
  std::vector<int> q(static_cast<size_t>(n), 0);
  c.add_mode(q, G0);
  q[0] = 1;
  c.add_mode(q, Gp);
  q[0] = -1;
  c.add_mode(q, Gm);
  return c;
}

void BM_HarmonicDecompose(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  HPoly p(4, m);
  for (const auto& a : monomials(4, m)) p.add(a, cplx(g(rng), g(rng)));
  for (auto _ : state) benchmark::DoNotOptimize(harmonic_decompose(p));
}
BENCHMARK(BM_HarmonicDecompose)->DenseRange(2, 6, 2);

void BM_CoordinateSplitRaise(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto& cs = coordinate_split(3, m);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(cs.raise[0].cols());
  for (auto _ : state) benchmark::DoNotOptimize((cs.raise[0] * x).eval());
}
BENCHMARK(BM_CoordinateSplitRaise)->DenseRange(1, 4);

void BM_GammaSplit(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  FiberConnForm G(3, 3);
  for (auto& gm : G.gammas) gm = random_skew(rng, 3);
  TwistedHarmonic f(3, m, 3);
  const auto& B = harmonic_basis(3, m);
  for (auto& col : f.columns) col = B.combine(Eigen::VectorXcd::Ones(B.size()));
  for (auto _ : state) benchmark::DoNotOptimize(gamma_split(G, f));
}
BENCHMARK(BM_GammaSplit)->DenseRange(1, 4);

void BM_TorusAssemble(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  const TorusConfig c{3, K, 2, 2, BundleKind::Vector};
  const FourierConnection conn = test_connection(rng, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(c, conn));
}
BENCHMARK(BM_TorusAssemble)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_CkTKernel(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const TorusConfig c{3, 2, 1, 2, BundleKind::Vector};
  const TorusAssembly a = assemble(c, test_connection(rng, 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(ckt_kernel(a));
}
BENCHMARK(BM_CkTKernel)->Unit(benchmark::kMillisecond);

void BM_CommutatorFactor(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd u = random_skew(rng, r);
  for (auto _ : state) benchmark::DoNotOptimize(commutator_factor(u));
}
BENCHMARK(BM_CommutatorFactor)->DenseRange(2, 6, 2);

void BM_SpectralWindow(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(6);
  Eigen::MatrixXcd X = random_skew(rng, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cplx(0, -1) * X);
  X -= cplx(0, es.eigenvalues()[d / 2]) * Eigen::MatrixXcd::Identity(d, d);
  double gap = 1e300;
  for (int i = 0; i < d; ++i)
    if (i != d / 2) gap = std::min(gap, std::abs(es.eigenvalues()[i] - es.eigenvalues()[d / 2]));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_window(X, 0.5 * gap));
}
BENCHMARK(BM_SpectralWindow)->RangeMultiplier(2)->Range(8, 32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
