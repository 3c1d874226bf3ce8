#include <benchmark/benchmark.h>

#include "dstruct/cotangent.hpp"
#include "dstruct/io.hpp"
#include "dstruct/sampling.hpp"

using namespace dstruct;

namespace {

ScalarField seeded_field(std::size_t n, std::uint64_t trial) {
  TrialRng rng(42, trial);
  ScalarField u;
  u.values.resize(n);
  for (double& v : u.values) v = rng.uniform(-2.0, 2.0);
  return u;
}

void BM_MinimizeGraph(benchmark::State& state) {
  const FiniteMetricSpace X = io::make_complete(static_cast<std::size_t>(state.range(0)));
  const ScalarField u = seeded_field(X.size(), 0);
  const DStructureDescriptor desc = DStructureDescriptor::graph();
  for (auto _ : state)
    benchmark::DoNotOptimize(minimal_pseudo_gradient(desc, X, u, 2.0).energy);
}
BENCHMARK(BM_MinimizeGraph)->Arg(3)->Arg(4)->Arg(5);

void BM_KktOracle(benchmark::State& state) {
  const FiniteMetricSpace X = io::make_complete(static_cast<std::size_t>(state.range(0)));
  const ScalarField u = seeded_field(X.size(), 0);
  const DStructureDescriptor desc = DStructureDescriptor::graph();
  for (auto _ : state) benchmark::DoNotOptimize(kkt_oracle(desc, X, u).energy);
}
BENCHMARK(BM_KktOracle)->Arg(3)->Arg(4)->Arg(5);

void BM_MembershipHajlasz(benchmark::State& state) {
  const FiniteMetricSpace X = io::make_complete(static_cast<std::size_t>(state.range(0)));
  const ScalarField u = seeded_field(X.size(), 0);
  const DStructureDescriptor desc = DStructureDescriptor::hajlasz();
  // Half the Lipschitz constant at every point is always a member.
  const ScalarField g{std::vector<double>(X.size(), 0.5 * lipschitz_constant(X, u))};
  for (auto _ : state) benchmark::DoNotOptimize(membership(desc, X, u, g).member);
}
BENCHMARK(BM_MembershipHajlasz)->Arg(5)->Arg(8);

void BM_AxiomSuite(benchmark::State& state) {
  const FiniteMetricSpace X = io::make_path(4);
  CheckOptions opts;
  opts.trials = static_cast<int>(state.range(0));
  const DStructureDescriptor desc = DStructureDescriptor::graph();
  for (auto _ : state)
    benchmark::DoNotOptimize(check_axiom(desc, X, Axiom::A2, opts).passes);
}
BENCHMARK(BM_AxiomSuite)->Arg(10)->Arg(100);

void BM_IntervalFloor(benchmark::State& state) {
  const IntervalGridSpace grid =
      IntervalGridSpace::uniform(static_cast<std::size_t>(state.range(0)));
  TrialRng rng(7, 0);
  const PiecewisePolyField u = sampling::random_pl_field(rng, grid);
  const DStructureDescriptor desc = DStructureDescriptor::interval_derivative();
  for (auto _ : state) benchmark::DoNotOptimize(floor_of(desc, u).cell_count());
}
BENCHMARK(BM_IntervalFloor)->Arg(16)->Arg(64)->Arg(256);

void BM_CotangentAudit(benchmark::State& state) {
  CheckOptions opts;
  opts.trials = 10;
  opts.seed = 7;
  const CotangentModule mod(DStructureDescriptor::interval_derivative(),
                            IntervalGridSpace::uniform(static_cast<std::size_t>(state.range(0))),
                            opts);
  for (auto _ : state) benchmark::DoNotOptimize(mod.uniqueness_audit(opts).passes);
}
BENCHMARK(BM_CotangentAudit)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
