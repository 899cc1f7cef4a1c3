#include "jumpldp/quasipotential.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "jumpldp/errors.hpp"
#include "jumpldp/numerics.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Path nodes_to_path(const std::vector<Eigen::VectorXd>& nodes, double T) {
  Path p;
  const int n = static_cast<int>(nodes.size()) - 1;
  p.times.reserve(nodes.size());
  p.states = nodes;
  for (int i = 0; i <= n; ++i) p.times.push_back(T * i / n);
  p.times.back() = T;
  return p;
}

}  // namespace

double path_action_gradient(const Model& model, const std::vector<Eigen::VectorXd>& nodes,
                            double T, std::vector<Eigen::VectorXd>* grad, int quad_order) {
  const QuadRule& rule = gauss_legendre(quad_order);
  const int n = static_cast<int>(nodes.size()) - 1;
  const double dt = T / n;
  if (grad) grad->assign(nodes.size(), Eigen::VectorXd::Zero(model.d()));

  double total = 0.0;
  Eigen::VectorXd theta_carry = Eigen::VectorXd::Zero(model.d());
  bool have_carry = false;
  for (int seg = 0; seg < n; ++seg) {
    const auto s = static_cast<std::size_t>(seg);
    const Eigen::VectorXd slope = (nodes[s + 1] - nodes[s]) / dt;
    if (!velocity_feasible(model, nodes[s], slope) ||
        !velocity_feasible(model, nodes[s + 1], slope))
      return kInf;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = rule.nodes[q];
      const Eigen::VectorXd zt = (1.0 - u) * nodes[s] + u * nodes[s + 1];
      LagrangianResult lr =
          local_lagrangian_warm(model, zt, slope, have_carry ? &theta_carry : nullptr);
      if (!lr.finite()) return kInf;
      theta_carry = *lr.theta_star;
      have_carry = true;
      const double w = rule.weights[q] * dt;
      total += w * lr.value;
      if (grad) {
        const Eigen::VectorXd dz = lagrangian_dz(model, zt, lr);
        const Eigen::VectorXd& dy = *lr.theta_star;
        (*grad)[s] += w * ((1.0 - u) * dz - dy / dt);
        (*grad)[s + 1] += w * (u * dz + dy / dt);
      }
    }
  }
  return total;
}

FixedTResult minimize_action_fixed_T(const Model& model, const Eigen::VectorXd& z_start,
                                     const Eigen::VectorXd& z_end, double T, int n_segments,
                                     const Path* init, const MinimizeOptions& opts) {
  if (n_segments < 2) throw PreconditionError("n_segments must be >= 2");
  if (!(T > 0.0)) throw PreconditionError("T must be positive");
  const DomainA dom = model.domain();
  if (!dom.contains(z_start) || !dom.contains(z_end))
    throw OutOfDomainError("minimize_action_fixed_T endpoints must lie in A");
  const InteriorMap map = InteriorMap::centroid_default(model.d());

  // initial nodes: supplied path resampled at uniform fractions, else the
  // straight chord with interior nodes shrunk off the boundary
  std::vector<Eigen::VectorXd> nodes(static_cast<std::size_t>(n_segments) + 1);
  nodes.front() = z_start;
  nodes.back() = z_end;
  for (int i = 1; i < n_segments; ++i) {
    const double u = static_cast<double>(i) / n_segments;
    if (init) {
      nodes[static_cast<std::size_t>(i)] = init->state_at(u * init->T());
    } else {
      nodes[static_cast<std::size_t>(i)] = (1.0 - u) * z_start + u * z_end;
    }
  }

  auto guard_nodes = [&](std::vector<Eigen::VectorXd>& ns, double a) {
    for (std::size_t i = 1; i + 1 < ns.size(); ++i) {
      if (!dom.contains(ns[i])) ns[i] = dom.project(ns[i]);
      if (dom.boundary_distance(ns[i]) < map.c2 * a) ns[i] = interior_shrink(ns[i], a, map);
    }
  };
  guard_nodes(nodes, opts.a_regularize);

  double value = path_action_gradient(model, nodes, T, nullptr, opts.quad_order);
  if (!std::isfinite(value)) {
    for (double a : {1e-3, 1e-2, 0.1, 0.5}) {
      std::vector<Eigen::VectorXd> trial = nodes;
      for (std::size_t i = 1; i + 1 < trial.size(); ++i)
        trial[i] = interior_shrink(trial[i], a, map);
      double v = path_action_gradient(model, trial, T, nullptr, opts.quad_order);
      if (std::isfinite(v)) {
        nodes = std::move(trial);
        value = v;
        break;
      }
    }
  }
  if (!std::isfinite(value)) {
    FixedTResult res;
    res.action = kInf;
    res.path = nodes_to_path(nodes, T);
    res.converged = false;
    return res;
  }

  std::vector<Eigen::VectorXd> grad, prev_nodes, prev_grad;
  double step = 0.1;
  std::deque<double> recent{value};
  int iter = 0;
  bool converged = false;

  for (; iter < opts.max_iterations; ++iter) {
    value = path_action_gradient(model, nodes, T, &grad, opts.quad_order);
    double gnorm2 = 0.0;
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) gnorm2 += grad[i].squaredNorm();
    if (gnorm2 == 0.0) {
      converged = true;
      break;
    }

    // spectral (Barzilai-Borwein) estimate seeds the backtracking search
    if (!prev_nodes.empty()) {
      double ss = 0.0, sg = 0.0;
      for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
        Eigen::VectorXd dx = nodes[i] - prev_nodes[i];
        Eigen::VectorXd dg = grad[i] - prev_grad[i];
        ss += dx.squaredNorm();
        sg += dx.dot(dg);
      }
      if (sg > 0.0 && ss > 0.0) step = std::clamp(ss / sg, 1e-8, 1e4);
    }
    prev_nodes = nodes;
    prev_grad = grad;

    // backtracking line search on the interior nodes
    bool accepted = false;
    double alpha = step;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<Eigen::VectorXd> trial = nodes;
      for (std::size_t i = 1; i + 1 < trial.size(); ++i) trial[i] -= alpha * grad[i];
      guard_nodes(trial, opts.a_regularize);
      double v = path_action_gradient(model, trial, T, nullptr, opts.quad_order);
      if (std::isfinite(v) && v <= value - 1e-4 * alpha * gnorm2) {
        nodes = std::move(trial);
        value = v;
        step = alpha;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no descent direction at line-search resolution
      break;
    }

    recent.push_back(value);
    if (static_cast<int>(recent.size()) > opts.stall_window + 1) recent.pop_front();
    if (static_cast<int>(recent.size()) == opts.stall_window + 1 &&
        recent.front() - recent.back() < opts.decrease_tol) {
      converged = true;
      break;
    }
  }

  FixedTResult res;
  res.action = path_action_gradient(model, nodes, T, nullptr, opts.quad_order);
  res.path = nodes_to_path(nodes, T);
  res.converged = converged;
  res.iterations = iter;
  return res;
}

std::vector<double> default_t_grid() {
  std::vector<double> grid;
  for (int i = 0; i < kTGridPoints; ++i)
    grid.push_back(kTGridMin *
                   std::pow(kTGridMax / kTGridMin, static_cast<double>(i) / (kTGridPoints - 1)));
  return grid;
}

namespace {

// Boundary endpoints where some rate vanishes are pulled inside; the
// comparison oracle must then be evaluated at the same point.
Eigen::VectorXd regularize_endpoint(const Model& model, const Eigen::VectorXd& z, double a_end) {
  if (a_end <= 0.0) return z;
  const DomainA dom = model.domain();
  if (dom.boundary_distance(z) > 1e-9) return z;
  bool vanished = false;
  for (int j = 0; j < model.k(); ++j)
    if (model.rate(j, z) <= kTolRate) vanished = true;
  if (!vanished) return z;
  return interior_shrink(z, a_end, InteriorMap::centroid_default(model.d()));
}

}  // namespace

QuasipotentialResult quasipotential(const Model& model, const Eigen::VectorXd& z_start,
                                    const Eigen::VectorXd& z_end, std::vector<double> T_grid,
                                    int n_segments, double a_end, const MinimizeOptions& opts) {
  if (T_grid.empty()) T_grid = default_t_grid();
  std::sort(T_grid.begin(), T_grid.end());

  QuasipotentialResult out;
  out.z_end_requested = z_end;
  const Eigen::VectorXd start = regularize_endpoint(model, z_start, a_end);
  const Eigen::VectorXd target = regularize_endpoint(model, z_end, a_end);
  out.z_end_used = target;

  double best = kInf;
  FixedTResult best_res;
  double best_T = T_grid.front();
  const Path* warm = nullptr;
  Path warm_path;

  auto consider = [&](double T, const Path* init) {
    FixedTResult r = minimize_action_fixed_T(model, start, target, T, n_segments, init, opts);
    out.per_T.emplace_back(T, r.action);
    if (r.action < best) {
      best = r.action;
      best_res = r;
      best_T = T;
    }
    return r;
  };

  for (double T : T_grid) {
    FixedTResult r = consider(T, warm);
    warm_path = r.path;
    warm = &warm_path;
  }

  // golden-section refinement around the best horizon (3 extra evaluations)
  auto it = std::find(T_grid.begin(), T_grid.end(), best_T);
  std::size_t pos = static_cast<std::size_t>(it - T_grid.begin());
  double lo = pos > 0 ? T_grid[pos - 1] : best_T / 1.6;
  double hi = pos + 1 < T_grid.size() ? T_grid[pos + 1] : best_T * 1.6;
  const double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  for (int probe = 0; probe < 3; ++probe) {
    double mid = (best_T - a > b - best_T) ? best_T - (best_T - a) * (1.0 - invphi)
                                           : best_T + (b - best_T) * (1.0 - invphi);
    warm_path = best_res.path;
    FixedTResult r = consider(mid, &warm_path);
    if (r.action < best) {
      // shrink the bracket toward the improvement
      if (mid < best_T) b = best_T; else a = best_T;
      best_T = mid;
    } else {
      if (mid < best_T) a = mid; else b = mid;
    }
  }

  std::sort(out.per_T.begin(), out.per_T.end());
  out.value = best;
  out.path = best_res.path;
  out.T_star = best_T;
  out.converged = best_res.converged && std::isfinite(best);
  return out;
}

BoundaryQuasipotentialResult boundary_quasipotential(const Model& model,
                                                     const Eigen::VectorXd& z_star,
                                                     const DomainSpec& spec,
                                                     std::vector<double> T_grid, int n_segments,
                                                     double a_end) {
  if (spec.boundary_samples.empty())
    throw EmptyBoundaryError("boundary_quasipotential needs boundary samples");
  BoundaryQuasipotentialResult out;
  double best = kInf;
  for (std::size_t i = 0; i < spec.boundary_samples.size(); ++i) {
    QuasipotentialResult qp =
        quasipotential(model, z_star, spec.boundary_samples[i], T_grid, n_segments, a_end);
    out.sample_values.push_back(qp.value);
    if (qp.value < best) {
      best = qp.value;
      out.best = std::move(qp);
      out.argmin_sample = static_cast<int>(i);
    }
  }
  return out;
}

namespace {

struct BirthDeath {
  int up = -1;    // transition index with jump +1
  int down = -1;  // transition index with jump -1
};

BirthDeath birth_death_indices(const Model& model) {
  if (model.d() != 1) throw NotBirthDeathError("model dimension must be 1");
  if (model.k() != 2) throw NotBirthDeathError("model must have exactly two transitions");
  BirthDeath bd;
  for (int j = 0; j < model.k(); ++j) {
    if (model.transition(j).jump[0] == 1) bd.up = j;
    if (model.transition(j).jump[0] == -1) bd.down = j;
  }
  if (bd.up < 0 || bd.down < 0) throw NotBirthDeathError("jumps must be +1 and -1");
  return bd;
}

}  // namespace

double bd_quasipotential_1d(const Model& model, double x_from, double x_to) {
  const BirthDeath bd = birth_death_indices(model);
  if (x_from == x_to) return 0.0;
  const double lo = std::min(x_from, x_to), hi = std::max(x_from, x_to);
  Eigen::VectorXd z(1);

  auto ratio_log = [&](double x) {
    z[0] = x;
    double bp = model.rate(bd.up, z);
    double bm = model.rate(bd.down, z);
    if (bp > 0.0 && bm > 0.0) return std::log(bm / bp);
    // isolated common zeros (e.g. both rates vanish at x=0): nudge inward
    for (double eps = 1e-13; eps <= 1e-7; eps *= 10.0) {
      double xx = x + (x <= 0.5 * (lo + hi) ? eps : -eps);
      z[0] = xx;
      bp = model.rate(bd.up, z);
      bm = model.rate(bd.down, z);
      if (bp > 0.0 && bm > 0.0) return std::log(bm / bp);
    }
    throw NotBirthDeathError("rate ratio undefined near x=" + std::to_string(x));
  };

  return adaptive_simpson(ratio_log, x_from, x_to, kSimpsonTol);
}

BdMeanExitResult bd_exact_mean_exit_time(const Model& model, long long N, long long start_index) {
  const BirthDeath bd = birth_death_indices(model);
  if (N < 1) throw PreconditionError("N must be >= 1");
  if (start_index < 1 || start_index > N)
    throw PreconditionError("start_index must lie in {1,...,N}");

  Eigen::VectorXd z(1);
  auto birth = [&](long long m) {
    z[0] = static_cast<double>(m) / static_cast<double>(N);
    return static_cast<double>(N) * std::max(0.0, model.rate(bd.up, z));
  };
  auto death = [&](long long m) {
    z[0] = static_cast<double>(m) / static_cast<double>(N);
    return static_cast<double>(N) * std::max(0.0, model.rate(bd.down, z));
  };

  z[0] = 0.0;
  if (model.rate(bd.up, z) > kTolRate)
    throw NotBirthDeathError("state 0 is not absorbing (birth rate positive at 0)");
  if (birth(N) > kTolRate)
    throw NotBirthDeathError("birth rate must vanish at the top state");

  // T[m] = expected passage time m -> m-1:  T[N] = 1/d_N,
  // T[m] = (1 + b_m T[m+1]) / d_m; mean = sum_{m<=start} T[m].
  std::vector<long double> T(static_cast<std::size_t>(N) + 1, 0.0L);
  bool overflow = false;
  for (long long m = N; m >= 1; --m) {
    const double dm = death(m);
    if (dm <= 0.0) throw NotBirthDeathError("death rate vanishes at interior state " +
                                            std::to_string(m));
    long double t;
    if (m == N) {
      t = 1.0L / static_cast<long double>(dm);
    } else {
      t = (1.0L + static_cast<long double>(birth(m)) * T[static_cast<std::size_t>(m) + 1]) /
          static_cast<long double>(dm);
    }
    if (std::isinf(t)) overflow = true;
    T[static_cast<std::size_t>(m)] = t;
  }

  std::vector<long double> terms(T.begin() + 1, T.begin() + 1 + static_cast<std::ptrdiff_t>(start_index));
  std::sort(terms.begin(), terms.end());  // smallest-first summation
  long double sum = 0.0L;
  for (long double t : terms) sum += t;

  BdMeanExitResult res;
  overflow = overflow || std::isinf(sum);
  if (overflow) {
    // redo the recursion in log space
    std::vector<long double> logT(static_cast<std::size_t>(N) + 1, 0.0L);
    for (long long m = N; m >= 1; --m) {
      const long double ld = std::log(static_cast<long double>(death(m)));
      if (m == N) {
        logT[static_cast<std::size_t>(m)] = -ld;
      } else {
        const double bm = birth(m);
        long double inc = bm > 0.0 ? std::log(static_cast<long double>(bm)) +
                                         logT[static_cast<std::size_t>(m) + 1]
                                   : -std::numeric_limits<long double>::infinity();
        // log(1 + e^inc)
        long double l1p = inc > 30.0L ? inc : std::log1p(std::exp(inc));
        logT[static_cast<std::size_t>(m)] = l1p - ld;
      }
    }
    long double lmax = -std::numeric_limits<long double>::infinity();
    for (long long m = 1; m <= start_index; ++m)
      lmax = std::max(lmax, logT[static_cast<std::size_t>(m)]);
    long double acc = 0.0L;
    for (long long m = 1; m <= start_index; ++m)
      acc += std::exp(logT[static_cast<std::size_t>(m)] - lmax);
    res.log_mean = static_cast<double>(lmax + std::log(acc));
    res.mean = std::numeric_limits<double>::infinity();
    res.overflow = true;
    return res;
  }
  res.mean = static_cast<double>(sum);
  res.log_mean = static_cast<double>(std::log(sum));
  res.overflow = false;
  return res;
}

ExitTimePrediction exit_time_prediction(double V, long long N) {
  if (V < 0.0) throw PreconditionError("V must be nonnegative");
  ExitTimePrediction p;
  p.log_value = static_cast<double>(N) * V;
  p.value = std::exp(p.log_value);
  return p;
}

}  // namespace jumpldp
