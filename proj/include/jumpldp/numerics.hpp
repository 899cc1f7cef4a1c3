#ifndef JUMPLDP_NUMERICS_HPP
#define JUMPLDP_NUMERICS_HPP

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace jumpldp {

struct QuadRule {
  std::vector<double> nodes;    // on (0,1)
  std::vector<double> weights;  // sum to 1
};

// Gauss-Legendre rule mapped to (0,1); order must be 4, 8 or 16.
const QuadRule& gauss_legendre(int order);

// min |A x - b| over x >= 0 (Lawson-Hanson active set).
// Returns x; *residual gets |A x - b|.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double* residual);

// Adaptive Simpson on [a,b] (signed), absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);

// Largest real part among eigenvalues of a real square matrix.
// d <= 3 uses characteristic-polynomial roots in closed form.
double max_real_eigenvalue(const Eigen::MatrixXd& m);

// Runs fn(i) for i in [0,n) on at most `workers` threads. Exceptions are
// rethrown (lowest index wins). fn must only write to index-i slots.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace jumpldp

#endif
