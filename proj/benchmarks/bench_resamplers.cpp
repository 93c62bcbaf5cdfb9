#include <benchmark/benchmark.h>

#include "adaptrt/randtest.hpp"
#include "adaptrt/simlab.hpp"

using namespace adaptrt;

namespace {

GenResult make_data(EnvKind kind, int horizon, std::uint64_t seed) {
  EnvSpec spec;
  spec.kind = kind;
  Rng rng(seed);
  const PolicyPtr pol = make_policy_for_env("eps_greedy", spec, {{"epsilon", 0.1}});
  return gen_env_data(spec, *pol, horizon, false, rng);
}

void BM_sample_resample(benchmark::State& state, const char* scheme_name) {
  const int horizon = static_cast<int>(state.range(0));
  const GenResult gen = make_data(EnvKind::NonstatContextless, horizon, 7);
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  replay(*pol, gen.data, 0);
  const Scheme scheme = scheme_from_name(scheme_name, false, GMap::constant(2));
  Rng rng(11);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng stream = rng.split(++i);
    benchmark::DoNotOptimize(
        sample_resample(gen.data, scheme, *pol, &gen.u_trace, stream));
  }
}

void BM_weighted_test(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const GenResult gen = make_data(EnvKind::NonstatContextless, horizon, 3);
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  const Scheme scheme = scheme_from_name("imitation_pi", false, GMap::constant(2));
  const Statistic stat = stat_abs_residual(RegressorSpec{});
  Rng rng(5);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng stream = rng.split(++i);
    benchmark::DoNotOptimize(
        weighted_mc_test(gen.data, scheme, *pol, 100, stat, &gen.u_trace, stream));
  }
}

void BM_mdp_resample(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  EnvSpec spec;
  spec.kind = EnvKind::NonstatMdp;
  Rng rng(9);
  const PolicyPtr pol = make_q_eps_greedy(2, 3, 0.1);
  const GenResult gen = gen_env_data(spec, *pol, horizon, false, rng);
  const Scheme scheme = scheme_from_name("imitation_pi", true, GMap::constant(2));
  std::uint64_t i = 0;
  for (auto _ : state) {
    Rng stream = rng.split(++i);
    benchmark::DoNotOptimize(
        sample_resample(gen.data, scheme, *pol, &gen.u_trace, stream));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_sample_resample, uniform_pi, "uniform_pi")->Arg(50)->Arg(100);
BENCHMARK_CAPTURE(BM_sample_resample, imitation_pi, "imitation_pi")->Arg(50)->Arg(100);
BENCHMARK_CAPTURE(BM_sample_resample, re_imitation_pi, "re_imitation_pi")->Arg(50)->Arg(100);
BENCHMARK_CAPTURE(BM_sample_resample, cond_imitation_pi, "cond_imitation_pi")
    ->Arg(50)
    ->Arg(100);
BENCHMARK(BM_weighted_test)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mdp_resample)->Arg(50);

BENCHMARK_MAIN();
