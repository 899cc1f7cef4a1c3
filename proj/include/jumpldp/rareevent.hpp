#ifndef JUMPLDP_RAREEVENT_HPP
#define JUMPLDP_RAREEVENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jumpldp/action.hpp"
#include "jumpldp/model.hpp"
#include "jumpldp/stochastic.hpp"

namespace jumpldp {

// Piecewise-constant absolute tilt intensities: transition j fires at rate
// N mu[window][j] during window [l eps, (l+1) eps).
struct Tilt {
  double epsilon = 0.0;
  std::vector<Eigen::VectorXd> rates;              // one length-k vector per window
  std::vector<std::pair<int, int>> support_flags;  // (window, transition) with mu > 0
                                                   // where the base rate may vanish

  Tilt() = default;
  Tilt(double eps, std::vector<Eigen::VectorXd> window_rates);

  double T() const { return epsilon * static_cast<double>(rates.size()); }
  int windows() const { return static_cast<int>(rates.size()); }
  int window_of(double t) const;
  const Eigen::VectorXd& intensities(int window) const {
    return rates[static_cast<std::size_t>(window)];
  }
};

// Jump-hold simulation under the tilt's state-independent window rates.
Trajectory simulate_tilted(const Model& model, const Tilt& tilt, long long N,
                           const Eigen::VectorXd& z, double T, std::uint64_t seed);

struct LikelihoodResult {
  double log_xi = 0.0;            // log dP~/dP on F_T; +inf when a realized jump
                                  // is impossible under the base law
  double jump_term = 0.0;         // sum_p log(beta~_{j_p} / beta_{j_p}) at pre-jump states
  double compensator_term = 0.0;  // N sum_j int (beta_j - beta~_j) dt
  bool impossible_under_base = false;  // some jump had beta = 0 (weight -inf)
  bool impossible_under_tilt = false;  // some jump had beta~ = 0

  double log_weight() const { return -log_xi; }  // the estimator orientation
};

LikelihoodResult log_likelihood_ratio(const Model& model, const Tilt& tilt,
                                      const Trajectory& traj);

struct ImportanceResult {
  double estimate = 0.0;
  double log_estimate = 0.0;
  double se = 0.0;
  int support_violations = 0;
  double hit_fraction = 0.0;
  int reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> values;  // per-replicate weighted indicators
};

using TrajectoryPredicate = std::function<bool(const Model&, const Trajectory&)>;

// Averages xi^{-1} 1{event} over tilted replicates. Replicates whose
// realized support escapes the base law contribute zero weight and are
// counted, keeping the estimator a valid lower bound.
ImportanceResult importance_sampling_estimate(const Model& model, const TrajectoryPredicate& event,
                                              const Tilt& tilt, long long N,
                                              const Eigen::VectorXd& z, double T, int reps,
                                              std::uint64_t base_seed, int workers = 1);

// Piecewise-constant control built from the optimal intensities of the
// local Lagrangian along the polygonalized path.
Tilt tilt_from_path(const Model& model, const Path& path, double epsilon);

}  // namespace jumpldp

#endif
