#include "jumpldp/rareevent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jumpldp/errors.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Counts = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

Counts counts_of(const Eigen::VectorXd& z, long long N) {
  Counts n(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    n[i] = static_cast<long long>(std::floor(static_cast<double>(N) * z[i] + 1e-9));
  return n;
}

bool in_lattice(const Counts& n, long long N) {
  long long sum = 0;
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n[i] < 0) return false;
    sum += n[i];
  }
  return sum <= N;
}

}  // namespace

Tilt::Tilt(double eps, std::vector<Eigen::VectorXd> window_rates)
    : epsilon(eps), rates(std::move(window_rates)) {
  if (!(epsilon > 0.0)) throw BadEpsilonError("tilt window length must be positive");
  if (rates.empty()) throw PreconditionError("tilt needs at least one window");
  const Eigen::Index k = rates.front().size();
  for (const auto& r : rates) {
    if (r.size() != k) throw PreconditionError("tilt windows disagree on transition count");
    if ((r.array() < 0.0).any()) throw PreconditionError("tilt intensities must be nonnegative");
  }
}

int Tilt::window_of(double t) const {
  int w = static_cast<int>(std::floor(t / epsilon));
  return std::clamp(w, 0, windows() - 1);
}

Trajectory simulate_tilted(const Model& model, const Tilt& tilt, long long N,
                           const Eigen::VectorXd& z, double T, std::uint64_t seed) {
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (!(T > 0.0)) throw PreconditionError("T must be positive");
  if (std::abs(tilt.T() - T) > 1e-9 * std::max(1.0, T))
    throw WindowMismatchError("tilt tiles [0," + std::to_string(tilt.T()) + "], horizon " +
                              std::to_string(T));
  if (tilt.rates.front().size() != model.k())
    throw WindowMismatchError("tilt transition count != model k");
  if (!model.domain().contains(z)) throw OutOfDomainError("initial state outside A");

  Trajectory traj;
  traj.N = N;
  traj.z_init = lattice_init(z, N);
  traj.T = T;

  CounterRng rng(seed);
  Counts counts = counts_of(traj.z_init, N);
  double t = 0.0;

  for (int w = 0; w < tilt.windows(); ++w) {
    const double w_end = (w + 1 == tilt.windows()) ? T : (w + 1) * tilt.epsilon;
    const Eigen::VectorXd& mu = tilt.intensities(w);
    double total = 0.0;
    for (Eigen::Index j = 0; j < mu.size(); ++j) total += mu[j];
    if (total <= kTolRate) {
      t = w_end;
      continue;
    }
    for (;;) {
      double hold = rng.next_exponential(static_cast<double>(N) * total);
      if (t + hold > w_end) {
        t = w_end;  // memoryless: restart the clock in the next window
        break;
      }
      t += hold;
      double r = rng.next_unit() * total;
      int chosen = -1;
      double acc = 0.0;
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        if (mu[j] <= 0.0) continue;
        acc += mu[j];
        if (r <= acc) {
          chosen = static_cast<int>(j);
          break;
        }
      }
      if (chosen < 0) {
        for (Eigen::Index j = mu.size() - 1; j >= 0; --j)
          if (mu[j] > 0.0) {
            chosen = static_cast<int>(j);
            break;
          }
      }
      Counts next = counts + model.transition(chosen).jump.cast<long long>();
      if (!in_lattice(next, N))
        throw LeftDomainError("tilted transition '" + model.transition(chosen).name +
                              "' exits A");
      counts = next;
      traj.events.emplace_back(t, chosen);
    }
  }
  return traj;
}

LikelihoodResult log_likelihood_ratio(const Model& model, const Tilt& tilt,
                                      const Trajectory& traj) {
  if (std::abs(tilt.T() - traj.T) > 1e-9 * std::max(1.0, traj.T))
    throw HorizonMismatchError("tilt horizon " + std::to_string(tilt.T()) + " vs trajectory " +
                               std::to_string(traj.T));
  if (tilt.rates.front().size() != model.k())
    throw WindowMismatchError("tilt transition count != model k");

  LikelihoodResult res;
  const long long N = traj.N;

  // jump term: sum over realized events of log(beta~/beta) at pre-jump states
  double jump_term = 0.0;
  {
    Counts counts = counts_of(traj.z_init, N);
    for (const auto& [te, j] : traj.events) {
      Eigen::VectorXd state = counts.cast<double>() / static_cast<double>(N);
      const double base = std::max(0.0, model.rate(j, state));
      const double tilted = tilt.intensities(tilt.window_of(te))[j];
      if (base <= 0.0) {
        res.impossible_under_base = true;
      } else if (tilted <= 0.0) {
        res.impossible_under_tilt = true;
      } else {
        jump_term += std::log(tilted / base);
      }
      counts += model.transition(j).jump.cast<long long>();
    }
  }

  // compensator: the realized path is constant between events and the tilt
  // is constant within windows, so integrating the rate difference over the
  // common refinement of both partitions is exact
  double comp = 0.0;
  {
    std::vector<double> breaks;
    breaks.push_back(0.0);
    for (int w = 1; w < tilt.windows(); ++w) breaks.push_back(w * tilt.epsilon);
    for (const auto& [te, j] : traj.events) breaks.push_back(te);
    breaks.push_back(traj.T);
    std::sort(breaks.begin(), breaks.end());

    Counts counts = counts_of(traj.z_init, N);
    std::size_t next_event = 0;
    Eigen::VectorXd beta(model.k());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double ta = breaks[i], tb = breaks[i + 1];
      // apply events at ta before integrating over [ta, tb)
      while (next_event < traj.events.size() && traj.events[next_event].first <= ta) {
        counts += model.transition(traj.events[next_event].second).jump.cast<long long>();
        ++next_event;
      }
      if (tb <= ta) continue;
      Eigen::VectorXd state = counts.cast<double>() / static_cast<double>(N);
      model.rates(state, beta);
      const Eigen::VectorXd& mu = tilt.intensities(tilt.window_of(ta));
      double diff = 0.0;
      for (int j = 0; j < model.k(); ++j) diff += std::max(0.0, beta[j]) - mu[j];
      comp += diff * (tb - ta);
    }
  }

  res.jump_term = res.impossible_under_base ? kInf : (res.impossible_under_tilt ? -kInf : jump_term);
  res.compensator_term = static_cast<double>(N) * comp;
  res.log_xi = res.jump_term + res.compensator_term;
  return res;
}

ImportanceResult importance_sampling_estimate(const Model& model, const TrajectoryPredicate& event,
                                              const Tilt& tilt, long long N,
                                              const Eigen::VectorXd& z, double T, int reps,
                                              std::uint64_t base_seed, int workers) {
  if (reps < 1) throw PreconditionError("reps must be >= 1");

  struct Rep {
    double weighted = 0.0;
    bool hit = false;
    bool violation = false;
  };

  std::function<Rep(std::uint64_t, int)> one = [&](std::uint64_t seed, int rep) -> Rep {
    Rep r;
    try {
      Trajectory traj = simulate_tilted(model, tilt, N, z, T, seed);
      LikelihoodResult lr = log_likelihood_ratio(model, tilt, traj);
      r.hit = event(model, traj);
      if (lr.impossible_under_base || !std::isfinite(lr.log_weight())) {
        r.violation = true;
        r.weighted = 0.0;
      } else {
        r.weighted = r.hit ? std::exp(lr.log_weight()) : 0.0;
      }
    } catch (const LeftDomainError&) {
      // the tilt pushed the walk out of A; impossible under the base law
      r.violation = true;
      r.weighted = 0.0;
    } catch (const std::exception& e) {
      throw ReplicateError(rep, e.what());
    }
    return r;
  };

  std::vector<Rep> results = run_replicates<Rep>(reps, base_seed, workers, one);

  ImportanceResult out;
  out.reps = reps;
  out.base_seed = base_seed;
  int hits = 0;
  for (const Rep& r : results) {
    out.values.push_back(r.weighted);
    if (r.hit) ++hits;
    if (r.violation) ++out.support_violations;
  }
  EnsembleStats st = stats_from_values(out.values, base_seed);
  out.estimate = st.mean;
  out.se = st.se;
  out.log_estimate = out.estimate > 0.0 ? std::log(out.estimate) : -kInf;
  out.hit_fraction = static_cast<double>(hits) / reps;
  return out;
}

Tilt tilt_from_path(const Model& model, const Path& path, double epsilon) {
  Path poly = polygonalize(path, epsilon);
  const int m = poly.segments();
  std::vector<Eigen::VectorXd> rates;
  rates.reserve(static_cast<std::size_t>(m));
  for (int l = 0; l < m; ++l) {
    const auto s = static_cast<std::size_t>(l);
    const double dt = poly.times[s + 1] - poly.times[s];
    const Eigen::VectorXd mid = 0.5 * (poly.states[s] + poly.states[s + 1]);
    const Eigen::VectorXd slope = (poly.states[s + 1] - poly.states[s]) / dt;
    LagrangianResult lr = local_lagrangian(model, mid, slope);
    if (!lr.finite())
      throw InfeasibleWindowError(l, "path slope leaves the achievable cone");
    rates.push_back(lr.mu_star);
  }
  Tilt tilt(epsilon, std::move(rates));

  // record windows whose intensity is positive while the base rate can
  // vanish somewhere along the window
  for (int l = 0; l < m; ++l) {
    const auto s = static_cast<std::size_t>(l);
    for (int j = 0; j < model.k(); ++j) {
      if (tilt.rates[s][j] <= kTolRate) continue;
      double bmin = std::min({model.rate(j, poly.states[s]),
                              model.rate(j, 0.5 * (poly.states[s] + poly.states[s + 1])),
                              model.rate(j, poly.states[s + 1])});
      if (bmin <= kTolRate) tilt.support_flags.emplace_back(l, j);
    }
  }
  return tilt;
}

}  // namespace jumpldp
