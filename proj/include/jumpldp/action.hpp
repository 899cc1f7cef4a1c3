#ifndef JUMPLDP_ACTION_HPP
#define JUMPLDP_ACTION_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "jumpldp/dynamics.hpp"
#include "jumpldp/model.hpp"
#include "jumpldp/stochastic.hpp"

namespace jumpldp {

// Per-jump cost f(nu, omega) = nu log(nu/omega) - nu + omega, with the
// conventions f(0, w) = w, f(v, 0) = +inf for v > 0, f(0, 0) = 0.
double f_cost(double nu, double omega);

struct LagrangianResult {
  double value = 0.0;                      // L(z, y), may be +inf
  std::optional<Eigen::VectorXd> theta_star;  // absent when value is infinite
  Eigen::VectorXd mu_star;                 // optimal jump intensities, length k
  int iterations = 0;

  bool finite() const { return std::isfinite(value); }
};

// L(z,y) = sup_theta { <theta,y> - sum_j beta_j(z)(e^<theta,h_j> - 1) } by
// damped Newton ascent from theta = 0, with a nonnegative-least-squares
// feasibility precheck and reduction to the active transition set when the
// supremum is only approached at infinity.
LagrangianResult local_lagrangian(const Model& model, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& y);

// Variant for tight evaluation loops: starts the ascent from theta0 (when
// given) and skips the feasibility precheck, falling back to the full solve
// if the hinted ascent fails.
LagrangianResult local_lagrangian_warm(const Model& model, const Eigen::VectorXd& z,
                                       const Eigen::VectorXd& y,
                                       const Eigen::VectorXd* theta0);

// Derivatives of L at the optimum (envelope theorem):
//   dL/dy = theta*,   dL/dz = -sum_j grad beta_j(z) (e^<theta*,h_j> - 1).
Eigen::VectorXd lagrangian_dz(const Model& model, const Eigen::VectorXd& z,
                              const LagrangianResult& lr);

// True iff y lies in the cone spanned by jumps with positive rates at z.
bool velocity_feasible(const Model& model, const Eigen::VectorXd& z, const Eigen::VectorXd& y);

// Path with per-segment constant control intensities; construction checks
// that sum_j mu_j h_j reproduces each segment slope.
struct ControlledPath {
  Path path;
  std::vector<Eigen::VectorXd> mu;  // one length-k vector per segment

  ControlledPath(const Model& model, Path p, std::vector<Eigen::VectorXd> m);
};

// I_T(phi|mu) by per-segment Gauss-Legendre quadrature; +inf when a
// quadrature node has mu_j > 0 with a vanished rate.
double mu_action(const Model& model, const ControlledPath& cpath, int quad_order = kQuadOrder);

// I_T(phi) = integral of L(phi_t, phi'_t); +inf when any node (segment
// endpoint or quadrature point) has an infeasible slope.
double path_action(const Model& model, const Path& path, int quad_order = kQuadOrder);

// Piecewise-linear resampling at node spacing eps (eps must divide T).
Path polygonalize(const Path& path, double eps);
Path polygonalize(const Model& model, const Trajectory& traj, double eps);

// Node-wise interior shrink; the image lies in R^a.
Path shrink_path(const Path& path, double a, const InteriorMap& map);

}  // namespace jumpldp

#endif
