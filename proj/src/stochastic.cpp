#include "jumpldp/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jumpldp/errors.hpp"

namespace jumpldp {

namespace {

using Counts = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

Counts counts_from_state(const Eigen::VectorXd& z, long long N) {
  Counts n(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    n[i] = static_cast<long long>(std::floor(static_cast<double>(N) * z[i] + 1e-9));
  return n;
}

bool counts_in_lattice(const Counts& n, long long N) {
  long long sum = 0;
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] < 0) return false;
    sum += n[i];
  }
  return sum <= N;
}

Eigen::VectorXd counts_to_state(const Counts& n, long long N) {
  return n.cast<double>() / static_cast<double>(N);
}

std::string format_state(const Eigen::VectorXd& z) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? "," : "") << z[i];
  os << ")";
  return os.str();
}

}  // namespace

Eigen::VectorXd lattice_init(const Eigen::VectorXd& z, long long N) {
  return counts_to_state(counts_from_state(z, N), N);
}

Eigen::VectorXd trajectory_state_at(const Model& model, const Trajectory& traj, double t) {
  TrajectoryWalker walker(traj, model);
  walker.advance_to(t);
  return walker.state();
}

std::string trajectory_to_csv(const Model& model, const Trajectory& traj) {
  std::ostringstream out;
  out.precision(17);
  out << "t,transition";
  for (const auto& c : model.compartments()) out << "," << c;
  out << "\n";
  Counts counts = counts_from_state(traj.z_init, traj.N);
  auto emit = [&](double t, int j) {
    out << t << "," << j;
    Eigen::VectorXd z = counts_to_state(counts, traj.N);
    for (Eigen::Index i = 0; i < z.size(); ++i) out << "," << z[i];
    out << "\n";
  };
  emit(0.0, -1);
  for (const auto& [t, j] : traj.events) {
    counts += model.transition(j).jump.cast<long long>();
    emit(t, j);
  }
  return out.str();
}

TrajectoryWalker::TrajectoryWalker(const Trajectory& traj, const Model& model)
    : traj_(traj), model_(model), counts_(counts_from_state(traj.z_init, traj.N)) {
  refresh();
}

void TrajectoryWalker::refresh() { state_ = counts_to_state(counts_, traj_.N); }

void TrajectoryWalker::advance_to(double t) {
  bool moved = false;
  while (next_event_ < traj_.events.size() && traj_.events[next_event_].first <= t) {
    const int j = traj_.events[next_event_].second;
    counts_ += model_.transition(j).jump.cast<long long>();
    ++next_event_;
    moved = true;
  }
  if (moved) refresh();
}

Eigen::VectorXd TrajectoryWalker::state_before_event(std::size_t event_index) const {
  if (event_index < next_event_) throw PreconditionError("walker already past event");
  Counts n = counts_;
  for (std::size_t p = next_event_; p < event_index; ++p)
    n += model_.transition(traj_.events[p].second).jump.cast<long long>();
  return counts_to_state(n, traj_.N);
}

Trajectory simulate(const Model& model, long long N, const Eigen::VectorXd& z, double T,
                    std::uint64_t seed) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (!(T > 0.0)) throw PreconditionError("T must be positive");
  if (!model.domain().contains(z)) throw OutOfDomainError("initial state outside A");

  Trajectory traj;
  traj.N = N;
  traj.z_init = lattice_init(z, N);
  traj.T = T;

  CounterRng rng(seed);
  Counts counts = counts_from_state(traj.z_init, N);
  Eigen::VectorXd state = counts_to_state(counts, N);
  Eigen::VectorXd beta(model.k());

  double t = 0.0;
  for (;;) {
    model.rates(state, beta);
    double total = 0.0;
    for (int j = 0; j < model.k(); ++j) total += std::max(0.0, beta[j]);
    if (total <= kTolRate) break;  // absorbed; remainder of [0,T] is constant

    t += rng.next_exponential(static_cast<double>(N) * total);
    if (t > T) break;

    double r = rng.next_unit() * total;
    int chosen = -1;
    double acc = 0.0;
    for (int j = 0; j < model.k(); ++j) {
      double bj = std::max(0.0, beta[j]);
      if (bj <= 0.0) continue;
      acc += bj;
      if (r <= acc) {
        chosen = j;
        break;
      }
    }
    if (chosen < 0) {
      for (int j = model.k() - 1; j >= 0; --j)
        if (beta[j] > 0.0) {
          chosen = j;
          break;
        }
    }

    Counts next = counts + model.transition(chosen).jump.cast<long long>();
    if (!counts_in_lattice(next, N))
      throw LeftDomainError("transition '" + model.transition(chosen).name + "' exits A at " +
                            format_state(state));
    counts = next;
    state = counts_to_state(counts, N);
    traj.events.emplace_back(t, chosen);
  }
  return traj;
}

double lln_distance(const Model& model, const Trajectory& traj, const Path& ode_path) {
  if (std::abs(traj.T - ode_path.T()) > 1e-9 * std::max(1.0, traj.T))
    throw HorizonMismatchError("trajectory T=" + std::to_string(traj.T) + " vs path T=" +
                               std::to_string(ode_path.T()));
  // merge event times and node times, evaluate the right-continuous state
  std::vector<double> eval_times;
  eval_times.reserve(traj.events.size() + ode_path.times.size() + 1);
  eval_times.push_back(0.0);
  for (const auto& [t, j] : traj.events) eval_times.push_back(t);
  for (double t : ode_path.times) eval_times.push_back(t);
  std::sort(eval_times.begin(), eval_times.end());

  TrajectoryWalker walker(traj, model);
  double sup = 0.0;
  for (double t : eval_times) {
    walker.advance_to(t);
    sup = std::max(sup, (walker.state() - ode_path.state_at(t)).norm());
  }
  return sup;
}

ExitSample sample_exit_time(const Model& model, long long N, const Eigen::VectorXd& z,
                            const std::function<bool(const Eigen::VectorXd&)>& in_domain,
                            double t_max, std::uint64_t seed) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (!(t_max > 0.0)) throw PreconditionError("t_max must be positive");
  if (!model.domain().contains(z)) throw OutOfDomainError("initial state outside A");

  Eigen::VectorXd init = lattice_init(z, N);
  if (!in_domain(init))
    throw PreconditionError("initial state is already outside the exit domain");

  CounterRng rng(seed);
  Counts counts = counts_from_state(init, N);
  Eigen::VectorXd state = counts_to_state(counts, N);
  Eigen::VectorXd beta(model.k());

  double t = 0.0;
  for (;;) {
    model.rates(state, beta);
    double total = 0.0;
    for (int j = 0; j < model.k(); ++j) total += std::max(0.0, beta[j]);
    if (total <= kTolRate) {
      // absorbed inside the domain; it will never exit
      ExitSample s;
      s.censored_at = t_max;
      return s;
    }
    t += rng.next_exponential(static_cast<double>(N) * total);
    if (t > t_max) {
      ExitSample s;
      s.censored_at = t_max;
      return s;
    }

    double r = rng.next_unit() * total;
    int chosen = -1;
    double acc = 0.0;
    for (int j = 0; j < model.k(); ++j) {
      double bj = std::max(0.0, beta[j]);
      if (bj <= 0.0) continue;
      acc += bj;
      if (r <= acc) {
        chosen = j;
        break;
      }
    }
    if (chosen < 0) {
      for (int j = model.k() - 1; j >= 0; --j)
        if (beta[j] > 0.0) {
          chosen = j;
          break;
        }
    }

    Counts next = counts + model.transition(chosen).jump.cast<long long>();
    if (!counts_in_lattice(next, N))
      throw LeftDomainError("transition '" + model.transition(chosen).name + "' exits A at " +
                            format_state(state));
    counts = next;
    state = counts_to_state(counts, N);
    if (!in_domain(state)) {
      ExitSample s;
      s.tau = t;
      s.exit_state = state;
      return s;
    }
  }
}

EnsembleStats stats_from_values(std::vector<double> values, std::uint64_t base_seed) {
  EnsembleStats st;
  st.reps = static_cast<int>(values.size());
  st.base_seed = base_seed;
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = st.reps > 0 ? sum / st.reps : 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - st.mean) * (v - st.mean);
  st.variance = st.reps > 1 ? ss / (st.reps - 1) : 0.0;
  st.se = st.reps > 0 ? std::sqrt(st.variance / st.reps) : 0.0;
  st.values = std::move(values);
  return st;
}

EnsembleStats monte_carlo(const std::function<double(std::uint64_t seed)>& op, int reps,
                          std::uint64_t base_seed, int workers) {
  if (reps < 1) throw PreconditionError("reps must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t r) {
    try {
      values[r] = op(derive_stream(base_seed, r));
    } catch (const std::exception& e) {
      throw ReplicateError(static_cast<int>(r), e.what());
    }
  });
  return stats_from_values(std::move(values), base_seed);
}

}  // namespace jumpldp
