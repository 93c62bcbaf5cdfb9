#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adaptrt/inference.hpp"

namespace adaptrt {

enum class GridKind { Location, Scale, Response };

struct Grid {
  GridKind kind = GridKind::Location;
  std::vector<double> values;  // strictly increasing
};

Grid make_grid(GridKind kind, double lo, double hi, double step);

// One inverted test per grid value.
struct RegionPoint {
  double value = 0.0;
  double p = 1.0;
  bool accepted = false;
  bool errored = false;  // test failed at this grid point; excluded, recorded
};

struct Region {
  std::vector<RegionPoint> points;
  std::vector<double> accepted;  // accepted grid values, increasing
  double hull_lo = 0.0, hull_hi = 0.0;
  double expansion = 0.0;  // values within this distance of an accepted point count
  bool empty() const { return accepted.empty(); }
  double hull_length() const {
    return empty() ? 0.0 : (hull_hi - hull_lo) + 2.0 * expansion;
  }
  bool contains(double v) const;
};

// Location / scale modification of the response sequence on action-x steps.
Dataset modify_location(const Dataset& d, double delta, ActionId x);
Dataset modify_scale(const Dataset& d, double delta, ActionId x);

struct InversionOptions {
  bool smoothed = false;  // inversion uses the conservative unsmoothed p
  bool use_mcmc = false;
  int mcmc_steps_per_member = 1;
  // Optional rounding: include every value within this distance of an
  // accepted grid point.  Default 0 reports the bare accepted set.
  double expansion_radius = 0.0;
};

// Confidence region for the location (or scale) difference between actions x
// and x_prime by grid inversion of the conditional-independence test with the
// pair-merging g.
Region confidence_region(const Dataset& d, const Policy& policy, ActionId x,
                         ActionId x_prime, const Grid& grid, double alpha,
                         EnvClass env, const Scheme& scheme, int m,
                         const Statistic& s, const std::vector<ExoDraw>* u_record,
                         Rng& rng, const InversionOptions& opts = {});

// Conformal prediction region for Y_T: `prefix` carries the first T-1 triples
// plus (C_T, X_T) with an arbitrary placeholder response at T, completed with
// each grid value in turn.  With `conditional` set, every counted resample
// has the observed last action.
Region conformal_region(const Dataset& prefix, const Policy& policy,
                        const Grid& grid, double alpha, EnvClass env,
                        const Scheme& scheme, int m, const Statistic& s,
                        const std::vector<ExoDraw>* u_record, Rng& rng,
                        bool conditional, const InversionOptions& opts = {});

// Sample-sharing variant: one pool of m permutations per grid value, shared
// across all values through the generalized swap weights; the q-ratio path
// needs q(.|member) to be invariant across the pool, which holds for the
// content-driven permutation samplers and is asserted here.
Region conformal_region_shared(const Dataset& prefix, const Policy& policy,
                               const Grid& grid, double alpha, EnvClass env,
                               const Scheme& scheme, int m, const Statistic& s,
                               const std::vector<ExoDraw>* u_record, Rng& rng);

void write_region_csv(const Region& r, std::ostream& os);

}  // namespace adaptrt
