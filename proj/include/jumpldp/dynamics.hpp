#ifndef JUMPLDP_DYNAMICS_HPP
#define JUMPLDP_DYNAMICS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "jumpldp/model.hpp"

namespace jumpldp {

// Piecewise-linear path: strictly increasing node times starting at 0,
// states in A.
struct Path {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  double T() const { return times.empty() ? 0.0 : times.back(); }
  int segments() const { return static_cast<int>(times.size()) - 1; }
  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }

  Eigen::VectorXd state_at(double t) const;  // linear interpolation, clamped to [0,T]
  void validate(int expected_dim = -1) const;

  std::string to_csv(const std::vector<std::string>& compartments) const;
  static Path from_csv(const std::string& text);
};

// b(z) = sum_j beta_j(z) h_j.
Eigen::VectorXd drift(const Model& model, const Eigen::VectorXd& z);

// J_il = sum_j h_j[i] d(beta_j)/dz_l.
Eigen::MatrixXd drift_jacobian(const Model& model, const Eigen::VectorXd& z);

struct OdeDiagnostics {
  long projections = 0;  // nodes that needed clipping back into A
};

// Classical RK4 with fixed step (last step shortened); nodes projected onto A.
Path integrate_ode(const Model& model, const Eigen::VectorXd& z, double T, double dt,
                   OdeDiagnostics* diag = nullptr);

struct Equilibrium {
  Eigen::VectorXd z;
  double jacobian_eigen_max_real = 0.0;
  bool stable = false;
  int iterations = 0;
};

// Damped Newton on b(z) = 0 with the exact Jacobian.
Equilibrium find_equilibrium(const Model& model, const Eigen::VectorXd& guess);

}  // namespace jumpldp

#endif
