#ifndef JUMPLDP_QUASIPOTENTIAL_HPP
#define JUMPLDP_QUASIPOTENTIAL_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "jumpldp/action.hpp"
#include "jumpldp/model.hpp"

namespace jumpldp {

struct MinimizeOptions {
  int quad_order = kQuadOrder;
  int max_iterations = kOptimizerMaxIter;
  double decrease_tol = kOptimizerDecreaseTol;
  int stall_window = kOptimizerStallWindow;
  double a_regularize = kARegularize;
};

struct FixedTResult {
  double action = 0.0;
  Path path;
  bool converged = false;
  int iterations = 0;
};

// inf over piecewise-linear paths with uniform time nodes and fixed
// endpoints of the path action, by gradient descent with backtracking line
// search; node gradients come from the envelope theorem.
FixedTResult minimize_action_fixed_T(const Model& model, const Eigen::VectorXd& z_start,
                                     const Eigen::VectorXd& z_end, double T, int n_segments,
                                     const Path* init = nullptr,
                                     const MinimizeOptions& opts = MinimizeOptions{});

// Objective/gradient of the discretized action in the interior nodes;
// exposed for finite-difference validation.
double path_action_gradient(const Model& model, const std::vector<Eigen::VectorXd>& nodes,
                            double T, std::vector<Eigen::VectorXd>* grad,
                            int quad_order = kQuadOrder);

struct QuasipotentialResult {
  double value = 0.0;
  Path path;
  double T_star = 0.0;
  std::vector<std::pair<double, double>> per_T;  // (T, min action) explored
  bool converged = false;
  Eigen::VectorXd z_end_requested;
  Eigen::VectorXd z_end_used;  // after endpoint regularization, if any
};

std::vector<double> default_t_grid();

// inf over T of the fixed-horizon minimum, warm-starting along a geometric
// grid and refining around the best horizon by golden section. Boundary
// endpoints where rates vanish are replaced by interior_shrink(., a_end).
QuasipotentialResult quasipotential(const Model& model, const Eigen::VectorXd& z_start,
                                    const Eigen::VectorXd& z_end,
                                    std::vector<double> T_grid = {},
                                    int n_segments = kDefaultSegments,
                                    double a_end = kAEndpoint,
                                    const MinimizeOptions& opts = MinimizeOptions{});

struct DomainSpec {
  std::function<bool(const Eigen::VectorXd&)> in_domain;
  std::vector<Eigen::VectorXd> boundary_samples;
};

struct BoundaryQuasipotentialResult {
  QuasipotentialResult best;
  int argmin_sample = -1;
  std::vector<double> sample_values;
};

BoundaryQuasipotentialResult boundary_quasipotential(const Model& model,
                                                     const Eigen::VectorXd& z_star,
                                                     const DomainSpec& spec,
                                                     std::vector<double> T_grid = {},
                                                     int n_segments = kDefaultSegments,
                                                     double a_end = kAEndpoint);

// Classical 1-D birth-death quasipotential: signed integral of
// log(beta_-(x)/beta_+(x)) from x_from to x_to (adaptive Simpson).
// The model must have exactly the jumps +1 and -1.
double bd_quasipotential_1d(const Model& model, double x_from, double x_to);

struct BdMeanExitResult {
  double mean = 0.0;      // +inf when the long double recursion overflowed
  double log_mean = 0.0;  // always finite
  bool overflow = false;
};

// Exact expected absorption time at state 0 for the 1-D birth-death chain on
// {0,...,N}/N via the first-step recursion in extended precision.
BdMeanExitResult bd_exact_mean_exit_time(const Model& model, long long N, long long start_index);

struct ExitTimePrediction {
  double value = 0.0;      // exp(N V); +inf on overflow
  double log_value = 0.0;  // N V, exact
};

ExitTimePrediction exit_time_prediction(double V, long long N);

}  // namespace jumpldp

#endif
