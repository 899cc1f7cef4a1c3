#ifndef JUMPLDP_STOCHASTIC_HPP
#define JUMPLDP_STOCHASTIC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jumpldp/dynamics.hpp"
#include "jumpldp/model.hpp"
#include "jumpldp/numerics.hpp"
#include "jumpldp/rng.hpp"

namespace jumpldp {

// One realized sample of Z^N: scaled initial state and ordered jump events.
struct Trajectory {
  long long N = 0;
  Eigen::VectorXd z_init;                      // [Nz]/N, a lattice point
  std::vector<std::pair<double, int>> events;  // (time, transition index)
  double T = 0.0;
};

// Right-continuous state at time t (replays events up to and including t).
Eigen::VectorXd trajectory_state_at(const Model& model, const Trajectory& traj, double t);

// CSV rows "t,transition,<state after jump...>"; first row is t=0 with
// transition -1 and the initial state.
std::string trajectory_to_csv(const Model& model, const Trajectory& traj);

// Walks a trajectory forward keeping exact integer counts.
class TrajectoryWalker {
 public:
  explicit TrajectoryWalker(const Trajectory& traj, const Model& model);
  // Advance past all events with time <= t; queries must be nondecreasing.
  void advance_to(double t);
  const Eigen::VectorXd& state() const { return state_; }
  Eigen::VectorXd state_before_event(std::size_t event_index) const;

 private:
  const Trajectory& traj_;
  const Model& model_;
  Eigen::Matrix<long long, Eigen::Dynamic, 1> counts_;
  std::size_t next_event_ = 0;
  Eigen::VectorXd state_;
  void refresh();
};

// Snap z to the lattice A^(N): component-wise floor(N z)/N.
Eigen::VectorXd lattice_init(const Eigen::VectorXd& z, long long N);

// Exact jump-hold simulation of Z^N; identical seeds give identical
// trajectories bit for bit.
Trajectory simulate(const Model& model, long long N, const Eigen::VectorXd& z, double T,
                    std::uint64_t seed);

// sup distance between the trajectory (right-continuous) and the linear
// interpolation of the ODE path, over event times and path nodes.
double lln_distance(const Model& model, const Trajectory& traj, const Path& ode_path);

struct ExitSample {
  std::optional<double> tau;
  std::optional<Eigen::VectorXd> exit_state;
  std::optional<double> censored_at;
};

ExitSample sample_exit_time(const Model& model, long long N, const Eigen::VectorXd& z,
                            const std::function<bool(const Eigen::VectorXd&)>& in_domain,
                            double t_max, std::uint64_t seed);

struct EnsembleStats {
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
  int reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> values;
};

// Runs fn once per replicate with the replicate's derived stream seed, in
// parallel; results are merged by replicate index so statistics do not
// depend on worker count or scheduling.
template <typename T>
std::vector<T> run_replicates(int reps, std::uint64_t base_seed, int workers,
                              const std::function<T(std::uint64_t seed, int rep)>& fn) {
  std::vector<T> out(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
    out[r] = fn(derive_stream(base_seed, r), static_cast<int>(r));
  });
  return out;
}

EnsembleStats monte_carlo(const std::function<double(std::uint64_t seed)>& op, int reps,
                          std::uint64_t base_seed, int workers = 1);

EnsembleStats stats_from_values(std::vector<double> values, std::uint64_t base_seed);

}  // namespace jumpldp

#endif
