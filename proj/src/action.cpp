#include "jumpldp/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jumpldp/errors.hpp"
#include "jumpldp/numerics.hpp"

namespace jumpldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ActiveSet {
  std::vector<int> idx;     // transitions with beta > tol
  Eigen::MatrixXd H;        // d x |idx| jump matrix
  Eigen::VectorXd beta;     // rates for idx
};

ActiveSet active_transitions(const Model& model, const Eigen::VectorXd& z) {
  ActiveSet a;
  Eigen::VectorXd beta(model.k());
  model.rates(z, beta);
  for (int j = 0; j < model.k(); ++j)
    if (beta[j] > kTolRate) a.idx.push_back(j);
  a.H.resize(model.d(), static_cast<Eigen::Index>(a.idx.size()));
  a.beta.resize(static_cast<Eigen::Index>(a.idx.size()));
  for (std::size_t c = 0; c < a.idx.size(); ++c) {
    a.H.col(static_cast<Eigen::Index>(c)) = model.transition(a.idx[c]).jump.cast<double>();
    a.beta[static_cast<Eigen::Index>(c)] = beta[a.idx[c]];
  }
  return a;
}

double dual_objective(const ActiveSet& a, const Eigen::VectorXd& theta, const Eigen::VectorXd& y) {
  double v = theta.dot(y);
  for (Eigen::Index c = 0; c < a.beta.size(); ++c) {
    double e = a.H.col(c).dot(theta);
    v -= a.beta[c] * (std::exp(std::min(e, 700.0)) - 1.0);
  }
  return v;
}

// Newton ascent on the concave dual restricted to the given active set.
// Returns false when the supremum is approached at |theta| -> inf; in that
// case *drop receives the column indices whose intensities vanish.
bool newton_dual(const ActiveSet& a, const Eigen::VectorXd& y, Eigen::VectorXd& theta,
                 int& iterations, std::vector<std::size_t>* drop) {
  const Eigen::Index d = theta.size();
  const Eigen::Index m = a.beta.size();
  Eigen::VectorXd s(m);

  for (int it = 0; it < kNewtonMaxIter; ++it) {
    ++iterations;
    for (Eigen::Index c = 0; c < m; ++c)
      s[c] = std::exp(std::min(a.H.col(c).dot(theta), 700.0));
    Eigen::VectorXd grad = y;
    for (Eigen::Index c = 0; c < m; ++c) grad -= a.beta[c] * s[c] * a.H.col(c);
    if (grad.norm() <= kNewtonGradTol) return true;

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index c = 0; c < m; ++c)
      hess += (a.beta[c] * s[c]) * (a.H.col(c) * a.H.col(c).transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success) step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() ||
        (hess * step - grad).norm() > 1e-6 * std::max(1.0, grad.norm())) {
      // active jumps do not span R^d
      Eigen::MatrixXd reg = hess + kTikhonov * Eigen::MatrixXd::Identity(d, d);
      step = reg.ldlt().solve(grad);
    }

    const double f0 = dual_objective(a, theta, y);
    const double g0 = grad.norm();
    auto grad_norm_at = [&](const Eigen::VectorXd& th) {
      Eigen::VectorXd g = y;
      for (Eigen::Index c = 0; c < m; ++c)
        g -= a.beta[c] * std::exp(std::min(a.H.col(c).dot(th), 700.0)) * a.H.col(c);
      return g.norm();
    };
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = theta + alpha * step;
      // objective ascent far from the optimum; near it the improvement can
      // drop below machine epsilon, so a gradient-norm contraction also
      // accepts (Newton is locally contractive on the concave dual)
      if (dual_objective(a, cand, y) > f0 || grad_norm_at(cand) < 0.5 * g0) {
        theta = cand;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return true;  // numerically stationary

    if (theta.norm() > kThetaDivergence) {
      if (drop) {
        for (Eigen::Index c = 0; c < m; ++c) {
          double e = a.H.col(c).dot(theta);
          if (a.beta[c] * std::exp(std::min(e, 700.0)) < kTolRate) drop->push_back(static_cast<std::size_t>(c));
        }
      }
      return false;
    }
  }
  return true;  // iteration cap; caller checks gradient
}

double segment_slope_guard(const Model& model, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  return velocity_feasible(model, z, y) ? 0.0 : kInf;
}

}  // namespace

double f_cost(double nu, double omega) {
  if (nu < 0.0 || omega < 0.0) throw PreconditionError("f_cost arguments must be nonnegative");
  if (nu == 0.0) return omega;
  if (omega == 0.0) return kInf;
  return nu * std::log(nu / omega) - nu + omega;
}

bool velocity_feasible(const Model& model, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  if (model.d() == 1) {
    double Bp = 0.0, Bm = 0.0;
    for (int j = 0; j < model.k(); ++j) {
      double b = model.rate(j, z);
      if (b <= kTolRate) continue;
      (model.transition(j).jump[0] > 0 ? Bp : Bm) += b;
    }
    if (y[0] > kFeasibilityResidual) return Bp > 0.0;
    if (y[0] < -kFeasibilityResidual) return Bm > 0.0;
    return true;
  }
  ActiveSet a = active_transitions(model, z);
  if (a.idx.empty()) return y.norm() <= kFeasibilityResidual;
  double residual = 0.0;
  nnls(a.H, y, &residual);
  return residual <= kFeasibilityResidual;
}

namespace {

// d = 1: jumps are +-1, so the stationarity condition for x = e^theta is the
// quadratic Bp x^2 - y x - Bm = 0 with Bp, Bm the total up/down rates.
LagrangianResult lagrangian_1d(const Model& model, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& y) {
  LagrangianResult res;
  res.mu_star = Eigen::VectorXd::Zero(model.k());
  const double v = y[0];

  double Bp = 0.0, Bm = 0.0;
  for (int j = 0; j < model.k(); ++j) {
    double b = model.rate(j, z);
    if (b <= kTolRate) continue;
    (model.transition(j).jump[0] > 0 ? Bp : Bm) += b;
  }

  double x;  // e^theta
  if (Bp > 0.0 && Bm > 0.0) {
    x = (v + std::sqrt(v * v + 4.0 * Bp * Bm)) / (2.0 * Bp);
  } else if (Bp > 0.0) {
    if (v < -kFeasibilityResidual) {
      res.value = kInf;
      return res;
    }
    if (v <= kTolRate) {
      // supremum approached as theta -> -inf; cost is f(0, Bp) = Bp
      res.value = Bp;
      res.theta_star = Eigen::VectorXd::Constant(1, std::log(kTolRate / (Bp + 1.0)));
      return res;
    }
    x = v / Bp;
  } else if (Bm > 0.0) {
    if (v > kFeasibilityResidual) {
      res.value = kInf;
      return res;
    }
    if (v >= -kTolRate) {
      res.value = Bm;
      res.theta_star = Eigen::VectorXd::Constant(1, -std::log(kTolRate / (Bm + 1.0)));
      return res;
    }
    x = Bm / (-v);  // from -y = Bm e^{-theta}
  } else {
    res.value = std::abs(v) <= kFeasibilityResidual ? 0.0 : kInf;
    if (res.value == 0.0) res.theta_star = Eigen::VectorXd::Zero(1);
    return res;
  }

  const double theta = std::log(x);
  double value = theta * v;
  for (int j = 0; j < model.k(); ++j) {
    double b = model.rate(j, z);
    if (b <= kTolRate) continue;
    double s = model.transition(j).jump[0] > 0 ? x : 1.0 / x;
    res.mu_star[j] = b * s;
    value -= b * (s - 1.0);
  }
  res.value = value;
  res.theta_star = Eigen::VectorXd::Constant(1, theta);
  res.iterations = 1;
  return res;
}

LagrangianResult local_lagrangian_impl(const Model& model, const Eigen::VectorXd& z,
                                       const Eigen::VectorXd& y, const Eigen::VectorXd* theta0,
                                       bool run_precheck) {
  if (!model.domain().contains(z)) throw OutOfDomainError("local_lagrangian state outside A");

  if (model.d() == 1) return lagrangian_1d(model, z, y);

  LagrangianResult res;
  res.mu_star = Eigen::VectorXd::Zero(model.k());

  ActiveSet act = active_transitions(model, z);

  if (act.idx.empty()) {
    if (y.norm() <= kFeasibilityResidual) {
      res.value = 0.0;
      res.theta_star = Eigen::VectorXd::Zero(model.d());
      return res;
    }
    res.value = kInf;
    return res;
  }
  if (run_precheck) {
    // feasibility: y must lie in the cone of active jump directions
    double residual = 0.0;
    nnls(act.H, y, &residual);
    if (residual > kFeasibilityResidual) {
      res.value = kInf;
      return res;
    }
  }

  // Newton ascent, reducing the active set when the maximizer escapes to
  // infinity (y on the boundary of the cone).
  ActiveSet cur = act;
  double dropped_cost = 0.0;  // sum of f(0, beta_j) over removed transitions
  Eigen::VectorXd theta =
      theta0 ? *theta0 : Eigen::VectorXd::Zero(model.d());
  for (;;) {
    std::vector<std::size_t> drop;
    bool finite_opt = newton_dual(cur, y, theta, res.iterations, &drop);
    if (finite_opt) break;
    if (drop.empty())
      throw NoConvergenceError("dual ascent diverged without removable transitions at |theta|=" +
                               std::to_string(theta.norm()));
    ActiveSet reduced;
    for (std::size_t c = 0, dpos = 0; c < cur.idx.size(); ++c) {
      if (dpos < drop.size() && drop[dpos] == c) {
        dropped_cost += cur.beta[static_cast<Eigen::Index>(c)];
        ++dpos;
        continue;
      }
      reduced.idx.push_back(cur.idx[c]);
    }
    if (reduced.idx.empty())
      throw NoConvergenceError("dual ascent removed every transition");
    reduced.H.resize(model.d(), static_cast<Eigen::Index>(reduced.idx.size()));
    reduced.beta.resize(static_cast<Eigen::Index>(reduced.idx.size()));
    for (std::size_t c = 0; c < reduced.idx.size(); ++c) {
      reduced.H.col(static_cast<Eigen::Index>(c)) =
          model.transition(reduced.idx[c]).jump.cast<double>();
      reduced.beta[static_cast<Eigen::Index>(c)] = model.rate(reduced.idx[c], z);
    }
    cur = std::move(reduced);
    theta.setZero();
  }

  // final gradient check
  Eigen::VectorXd s(cur.beta.size());
  for (Eigen::Index c = 0; c < cur.beta.size(); ++c)
    s[c] = std::exp(std::min(cur.H.col(c).dot(theta), 700.0));
  Eigen::VectorXd grad = y;
  for (Eigen::Index c = 0; c < cur.beta.size(); ++c) grad -= cur.beta[c] * s[c] * cur.H.col(c);
  if (grad.norm() > 1e-8)
    throw NoConvergenceError("dual ascent stalled with |grad|=" + std::to_string(grad.norm()) +
                             " after " + std::to_string(res.iterations) + " iterations");

  res.value = dual_objective(cur, theta, y) + dropped_cost;
  res.theta_star = theta;
  for (std::size_t c = 0; c < cur.idx.size(); ++c)
    res.mu_star[cur.idx[c]] = cur.beta[static_cast<Eigen::Index>(c)] * s[static_cast<Eigen::Index>(c)];
  return res;
}

}  // namespace

LagrangianResult local_lagrangian(const Model& model, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& y) {
  return local_lagrangian_impl(model, z, y, nullptr, true);
}

LagrangianResult local_lagrangian_warm(const Model& model, const Eigen::VectorXd& z,
                                       const Eigen::VectorXd& y, const Eigen::VectorXd* theta0) {
  // Trusts the hint and skips the cone precheck; falls back to the full
  // solve (which classifies infeasible velocities as +inf) on any trouble.
  try {
    return local_lagrangian_impl(model, z, y, theta0, false);
  } catch (const NoConvergenceError&) {
    return local_lagrangian_impl(model, z, y, nullptr, true);
  }
}

Eigen::VectorXd lagrangian_dz(const Model& model, const Eigen::VectorXd& z,
                              const LagrangianResult& lr) {
  if (!lr.theta_star) throw PreconditionError("lagrangian_dz needs a finite result");
  // dL/dz_i = sum_j dbeta_j/dz_i (1 - s_j) with s_j = mu*_j / beta_j; the
  // ratio form also covers transitions dropped at the cone boundary (s_j = 0).
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.d());
  for (int j = 0; j < model.k(); ++j) {
    double beta = model.rate(j, z);
    double s = beta > kTolRate ? lr.mu_star[j] / beta : 0.0;
    g += model.rate_grad(j, z) * (1.0 - s);
  }
  return g;
}

ControlledPath::ControlledPath(const Model& model, Path p, std::vector<Eigen::VectorXd> m)
    : path(std::move(p)), mu(std::move(m)) {
  path.validate(model.d());
  if (mu.size() != static_cast<std::size_t>(path.segments()))
    throw PreconditionError("one control vector per segment required");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i].size() != model.k()) throw PreconditionError("control vector length != k");
    if ((mu[i].array() < 0.0).any()) throw PreconditionError("negative control intensity");
    Eigen::VectorXd slope =
        (path.states[i + 1] - path.states[i]) / (path.times[i + 1] - path.times[i]);
    Eigen::VectorXd reproduced = Eigen::VectorXd::Zero(model.d());
    for (int j = 0; j < model.k(); ++j)
      reproduced += mu[i][j] * model.transition(j).jump.cast<double>();
    if ((reproduced - slope).norm() > 1e-8)
      throw PreconditionError("segment " + std::to_string(i) +
                              ": controls do not reproduce the slope");
  }
}

double mu_action(const Model& model, const ControlledPath& cpath, int quad_order) {
  const QuadRule& rule = gauss_legendre(quad_order);
  double total = 0.0;
  for (int seg = 0; seg < cpath.path.segments(); ++seg) {
    const auto s = static_cast<std::size_t>(seg);
    const double dt = cpath.path.times[s + 1] - cpath.path.times[s];
    const Eigen::VectorXd& mu = cpath.mu[s];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      Eigen::VectorXd zt = (1.0 - rule.nodes[q]) * cpath.path.states[s] +
                           rule.nodes[q] * cpath.path.states[s + 1];
      double node_cost = 0.0;
      for (int j = 0; j < model.k(); ++j) {
        double beta = std::max(0.0, model.rate(j, zt));
        if (mu[j] <= kTolRate) {
          node_cost += beta;  // f(0, beta)
          continue;
        }
        if (beta <= kTolRate) return kInf;
        node_cost += f_cost(mu[j], beta);
      }
      total += rule.weights[q] * node_cost * dt;
    }
  }
  return total;
}

double path_action(const Model& model, const Path& path, int quad_order) {
  path.validate(model.d());
  const QuadRule& rule = gauss_legendre(quad_order);
  double total = 0.0;
  Eigen::VectorXd theta_carry = Eigen::VectorXd::Zero(model.d());
  bool have_carry = false;
  for (int seg = 0; seg < path.segments(); ++seg) {
    const auto s = static_cast<std::size_t>(seg);
    const double dt = path.times[s + 1] - path.times[s];
    const Eigen::VectorXd slope = (path.states[s + 1] - path.states[s]) / dt;

    // a node whose rates cannot produce the slope makes the action infinite
    if (segment_slope_guard(model, path.states[s], slope) == kInf) return kInf;
    if (segment_slope_guard(model, path.states[s + 1], slope) == kInf) return kInf;

    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      Eigen::VectorXd zt =
          (1.0 - rule.nodes[q]) * path.states[s] + rule.nodes[q] * path.states[s + 1];
      LagrangianResult lr;
      try {
        lr = local_lagrangian_warm(model, zt, slope, have_carry ? &theta_carry : nullptr);
      } catch (const NoConvergenceError& e) {
        throw NoConvergenceError("segment " + std::to_string(seg) + ": " + e.what());
      }
      if (!lr.finite()) return kInf;
      theta_carry = *lr.theta_star;
      have_carry = true;
      total += rule.weights[q] * lr.value * dt;
    }
  }
  return total;
}

namespace {

int window_count(double T, double eps) {
  if (!(eps > 0.0)) throw BadEpsilonError("epsilon must be positive");
  double ratio = T / eps;
  double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-12 * std::max(1.0, ratio))
    throw BadEpsilonError("epsilon does not divide T: T/eps=" + std::to_string(ratio));
  return static_cast<int>(rounded);
}

}  // namespace

Path polygonalize(const Path& path, double eps) {
  path.validate();
  const int m = window_count(path.T(), eps);
  Path out;
  out.times.reserve(static_cast<std::size_t>(m) + 1);
  out.states.reserve(static_cast<std::size_t>(m) + 1);
  for (int l = 0; l <= m; ++l) {
    double t = (l == m) ? path.T() : l * eps;
    out.times.push_back(t);
    out.states.push_back(path.state_at(t));
  }
  return out;
}

Path polygonalize(const Model& model, const Trajectory& traj, double eps) {
  const int m = window_count(traj.T, eps);
  TrajectoryWalker walker(traj, model);
  Path out;
  out.times.reserve(static_cast<std::size_t>(m) + 1);
  out.states.reserve(static_cast<std::size_t>(m) + 1);
  for (int l = 0; l <= m; ++l) {
    double t = (l == m) ? traj.T : l * eps;
    walker.advance_to(t);
    out.times.push_back(t);
    out.states.push_back(walker.state());
  }
  return out;
}

Path shrink_path(const Path& path, double a, const InteriorMap& map) {
  Path out = path;
  for (auto& s : out.states) s = interior_shrink(s, a, map);
  return out;
}

}  // namespace jumpldp
