#include <doctest.h>

#include <cmath>
#include <sstream>

#include "adaptrt/inversion.hpp"
#include "adaptrt/simlab.hpp"

using namespace adaptrt;

namespace {
Triple step(ActionId a, double y) {
  return Triple{Context::empty(), a, Response::of_real(y)};
}

GenResult three_arm_data(int horizon, std::uint64_t seed) {
  EnvSpec spec;
  spec.kind = EnvKind::ThreeArmCondIndep;
  spec.alt_means = {0.0, 4.0, 2.0};  // location difference b0 = 4
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  Rng rng(seed);
  return gen_env_data(spec, *pol, horizon, true, rng);
}

GenResult nonstat_data(int horizon, std::uint64_t seed) {
  EnvSpec spec;
  spec.kind = EnvKind::NonstatContextless;
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  Rng rng(seed);
  return gen_env_data(spec, *pol, horizon, false, rng);
}
}  // namespace

TEST_CASE("modify_location examples") {
  const Dataset d = Dataset::bandit({step(0, 1.0), step(1, 1.0)});
  CHECK(modify_location(d, 0.0, 1) == d);
  const Dataset shifted = modify_location(d, 2.0, 1);
  CHECK(shifted.at(0).response.value == doctest::Approx(1.0));
  CHECK(shifted.at(1).response.value == doctest::Approx(3.0));
  CHECK(modify_location(modify_location(d, 2.0, 1), -2.0, 1) == d);
}

TEST_CASE("modify_scale examples") {
  const Dataset d = Dataset::bandit({step(0, 3.0), step(1, 5.0)});
  const Dataset same = modify_scale(d, 1.0, 0);
  CHECK(same == d);
  const Dataset scaled = modify_scale(d, 2.0, 0);
  CHECK(scaled.at(0).response.value == doctest::Approx(6.0));
  CHECK(scaled.at(1).response.value == doctest::Approx(5.0));
  const Dataset round = modify_scale(modify_scale(d, 2.0, 0), 0.5, 0);
  CHECK(round == d);
  CHECK_THROWS_AS(modify_scale(d, 0.0, 0), ArgumentError);
}

TEST_CASE("alpha = 0 accepts the whole grid") {
  const GenResult gen = three_arm_data(10, 3);
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  const Scheme s = scheme_from_name("restricted_uniform_pi_imitation_x", false,
                                    GMap::pair_merge(3, 0, 1));
  const Statistic stat = stat_abs_t(DesignKind::ArmIndicators, {0, 2}, 1);
  const Grid grid = make_grid(GridKind::Location, -1.0, 3.0, 1.0);
  Rng rng(5);
  const Region r =
      confidence_region(gen.data, *pol, 0, 1, grid, 0.0,
                        EnvClass::StationaryNonReactive, s, 20, stat, nullptr, rng);
  CHECK(r.accepted.size() == grid.values.size());
}

TEST_CASE("m = 0 accepts the whole grid") {
  const GenResult gen = three_arm_data(8, 7);
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  const Scheme s = scheme_from_name("restricted_uniform_pi_imitation_x", false,
                                    GMap::pair_merge(3, 0, 1));
  const Statistic stat = stat_abs_t(DesignKind::ArmIndicators, {0, 2}, 1);
  const Grid grid = make_grid(GridKind::Location, -1.0, 9.0, 1.0);
  Rng rng(9);
  const Region r =
      confidence_region(gen.data, *pol, 0, 1, grid, 0.05,
                        EnvClass::StationaryNonReactive, s, 0, stat, nullptr, rng);
  CHECK(r.accepted.size() == grid.values.size());

  const GenResult ns = nonstat_data(8, 11);
  const Scheme perm = scheme_from_name("imitation_pi", false, GMap::constant(2));
  Rng rng2(13);
  const Region cr = conformal_region(ns.data, *make_eps_greedy(2, 0.1),
                                     make_grid(GridKind::Response, -5, 5, 1), 0.05,
                                     EnvClass::CStationaryStrongNonReactive, perm,
                                     0, stat_abs_residual(RegressorSpec{}),
                                     &ns.u_trace, rng2, false);
  CHECK(cr.accepted.size() == 11);
}

TEST_CASE("lowering alpha never shrinks a region (same seed)") {
  const GenResult gen = three_arm_data(14, 17);
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  const Scheme s = scheme_from_name("restricted_uniform_pi_imitation_x", false,
                                    GMap::pair_merge(3, 0, 1));
  const Statistic stat = stat_abs_t(DesignKind::ArmIndicators, {0, 2}, 1);
  const Grid grid = make_grid(GridKind::Location, -1.0, 9.0, 1.0);
  Rng r1(21), r2(21);
  const Region wide =
      confidence_region(gen.data, *pol, 0, 1, grid, 0.01,
                        EnvClass::StationaryNonReactive, s, 40, stat, nullptr, r1);
  const Region narrow =
      confidence_region(gen.data, *pol, 0, 1, grid, 0.20,
                        EnvClass::StationaryNonReactive, s, 40, stat, nullptr, r2);
  for (double v : narrow.accepted) CHECK(wide.contains(v));
}

TEST_CASE("delta = 0 modification leaves the test bit-identical") {
  const GenResult gen = three_arm_data(12, 23);
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  Scheme s = scheme_from_name("restricted_uniform_pi_imitation_x", false,
                              GMap::pair_merge(3, 0, 1));
  const Statistic stat = stat_abs_t(DesignKind::ArmIndicators, {0, 2}, 1);
  Rng r1(31), r2(31);
  const TestOutcome a =
      cond_indep_test(gen.data, *pol, GMap::pair_merge(3, 0, 1),
                      EnvClass::StationaryNonReactive, s, 25, stat, nullptr, r1);
  const TestOutcome b = cond_indep_test(
      modify_location(gen.data, 0.0, 0), *pol, GMap::pair_merge(3, 0, 1),
      EnvClass::StationaryNonReactive, s, 25, stat, nullptr, r2);
  CHECK(a.p == b.p);
  CHECK(a.p_minus == b.p_minus);
}

TEST_CASE("conditional conformal only counts resamples matching X_T") {
  const GenResult gen = nonstat_data(10, 37);
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  const Scheme s = scheme_from_name("uniform_pi", false, GMap::constant(2));
  const ActionId last = gen.data.at(gen.data.length() - 1).action;
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    Rng stream = rng.split(static_cast<std::uint64_t>(i));
    const Resample r =
        sample_resample(gen.data, s, *pol, nullptr, stream, last);
    CHECK(r.data.at(r.data.length() - 1).action == last);
  }
  Rng rng2(43);
  const Region region = conformal_region(
      gen.data, *pol, make_grid(GridKind::Response, -3, 3, 1), 0.05,
      EnvClass::CStationaryStrongNonReactive, s, 25,
      stat_abs_residual(RegressorSpec{}), &gen.u_trace, rng2, true);
  for (const auto& pt : region.points) CHECK_FALSE(pt.errored);
}

TEST_CASE("single-value shared pool equals the swap-weight test") {
  const GenResult gen = nonstat_data(9, 47);
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  const Scheme s = scheme_from_name("imitation_pi", false, GMap::constant(2));
  const Statistic stat = stat_abs_residual(RegressorSpec{});
  const double y = 0.75;
  const int m = 12;

  Grid grid;
  grid.kind = GridKind::Response;
  grid.values = {y};
  Rng rng(51);
  const Region shared = conformal_region_shared(
      gen.data, *pol, grid, 0.05, EnvClass::CStationaryStrongNonReactive, s, m,
      stat, nullptr, rng);

  // Rebuild the same pool with the same streams and run the generalized
  // swap-weight formula directly.
  std::vector<Triple> ts = gen.data.triples();
  ts.back().response = Response::of_real(y);
  const Dataset d_y = Dataset::bandit(std::move(ts));
  std::vector<double> lf{fhat_log(d_y, *pol)};
  std::vector<double> lq{scheme_log_prob_identity(s, *pol, d_y, nullptr)};
  std::vector<double> stats{stat(d_y)};
  Rng rng2(51);
  Rng stream = rng2.split(0x5a11, 0);
  for (int i = 1; i <= m; ++i) {
    Rng draw = stream.split(static_cast<std::uint64_t>(i));
    const Resample r = sample_resample(d_y, s, *pol, nullptr, draw);
    lf.push_back(fhat_log(r.data, *pol));
    lq.push_back(r.log_q_self);
    stats.push_back(stat(r.data));
  }
  const auto log_joint = [&](const Permutation& pi, int) {
    double total = 0.0;
    for (int k = 1; k < pi.size(); ++k)
      total += lq[static_cast<std::size_t>(pi.image[static_cast<std::size_t>(k)])];
    return total;
  };
  const auto w = non_iid_swap_weights(lf, swap_sigma(m), log_joint);
  double p = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (stats[i] >= stats[0]) p += w[i];

  REQUIRE(shared.points.size() == 1);
  CHECK(shared.points[0].p == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("region csv has the (value, p, accepted) schema") {
  Region r;
  r.points.push_back(RegionPoint{0.0, 0.4, true, false});
  r.points.push_back(RegionPoint{1.0, 0.01, false, false});
  r.accepted = {0.0};
  r.hull_lo = r.hull_hi = 0.0;
  std::stringstream ss;
  write_region_csv(r, ss);
  CHECK(ss.str() == "value,p,accepted\n0,0.4,1\n1,0.01,0\n");
}

TEST_CASE("inverted tests replay the policy on the un-modified history") {
  // The assignment law of a modified dataset is the base policy applied to
  // the un-modified responses, so fhat of the modified data under the
  // unshift wrapper equals fhat of the original data under the base policy.
  const GenResult gen = three_arm_data(20, 53);
  const PolicyPtr pol = make_eps_greedy(3, 0.1);
  const double delta = 4.0;
  const Dataset modified = modify_location(gen.data, delta, 0);
  const PolicyPtr wrapped = make_unshift_policy(*pol, delta, 0, false);
  CHECK(fhat_log(modified, *wrapped) ==
        doctest::Approx(fhat_log(gen.data, *pol)).epsilon(1e-9));

  const Dataset scaled = modify_scale(gen.data, 2.0, 1);
  const PolicyPtr wrapped_scale = make_unshift_policy(*pol, 2.0, 1, true);
  CHECK(fhat_log(scaled, *wrapped_scale) ==
        doctest::Approx(fhat_log(gen.data, *pol)).epsilon(1e-9));
}

TEST_CASE("expansion radius widens containment and hull length") {
  Region r;
  r.accepted = {0.0, 1.0, 2.0};
  r.hull_lo = 0.0;
  r.hull_hi = 2.0;
  CHECK_FALSE(r.contains(2.4));
  CHECK(r.hull_length() == doctest::Approx(2.0));
  r.expansion = 0.5;
  CHECK(r.contains(2.4));
  CHECK_FALSE(r.contains(2.6));
  CHECK(r.hull_length() == doctest::Approx(3.0));
}

TEST_CASE("a statistic constant in y accepts the full conformal grid") {
  const GenResult gen = nonstat_data(9, 59);
  const PolicyPtr pol = make_eps_greedy(2, 0.1);
  const Scheme s = scheme_from_name("imitation_pi", false, GMap::constant(2));
  Rng rng(61);
  const Region r = conformal_region(
      gen.data, *pol, make_grid(GridKind::Response, -5, 5, 1), 0.05,
      EnvClass::CStationaryStrongNonReactive, s, 30,
      [](const Dataset& d) { return static_cast<double>(d.length()); },
      &gen.u_trace, rng, false);
  CHECK(r.accepted.size() == 11);
}
