#include "jumpldp/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

namespace jumpldp {

namespace {

QuadRule make_rule(std::initializer_list<double> half_nodes,
                   std::initializer_list<double> half_weights) {
  // Tables give the positive abscissas on (-1,1); expand and map to (0,1).
  std::vector<double> x(half_nodes), w(half_weights);
  QuadRule r;
  for (std::size_t i = x.size(); i-- > 0;) {
    r.nodes.push_back(0.5 * (1.0 - x[i]));
    r.weights.push_back(0.5 * w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(0.5 * (1.0 + x[i]));
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

const QuadRule kGl4 = make_rule({0.3399810435848563, 0.8611363115940526},
                                {0.6521451548625461, 0.3478548451374538});

const QuadRule kGl8 = make_rule(
    {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363},
    {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763});

const QuadRule kGl16 = make_rule(
    {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
     0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499},
    {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
     0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541});

double simpson_leaf(const std::function<double(double)>& f, double a, double fa, double b,
                    double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double fm, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson_leaf(f, a, fa, m, fm, flm);
  double right = simpson_leaf(f, m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

// Real parts of roots of x^2 + bx + c.
void quadratic_real_parts(double b, double c, double out[2]) {
  double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    double s = std::sqrt(disc);
    out[0] = 0.5 * (-b + s);
    out[1] = 0.5 * (-b - s);
  } else {
    out[0] = out[1] = -0.5 * b;
  }
}

}  // namespace

const QuadRule& gauss_legendre(int order) {
  switch (order) {
    case 4:
      return kGl4;
    case 8:
      return kGl8;
    case 16:
      return kGl16;
    default:
      throw std::invalid_argument("gauss_legendre: order must be 4, 8 or 16");
  }
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double* residual) {
  const Eigen::Index n = A.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0) {
    if (residual) *residual = b.norm();
    return x;
  }
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.lpNorm<Eigen::Infinity>() * b.norm());
  const int max_outer = 3 * static_cast<int>(n) + 10;

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
    z.setZero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = zp[static_cast<Eigen::Index>(c)];
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z(n);
    for (int inner = 0; inner < max_outer; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      bool clipped = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && z[i] <= 0.0) {
          double a = x[i] / (x[i] - z[i]);
          if (a < alpha) alpha = a;
          clipped = true;
        }
      }
      if (!clipped) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (passive[static_cast<std::size_t>(i)] && x[i] <= tol) {
          passive[static_cast<std::size_t>(i)] = false;
          x[i] = 0.0;
        }
      }
    }
  }
  if (residual) *residual = (A * x - b).norm();
  return x;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = simpson_leaf(f, a, fa, b, fb, fm);
  return simpson_rec(f, a, fa, b, fb, fm, whole, tol, 50);
}

double max_real_eigenvalue(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  if (d == 1) return m(0, 0);
  if (d == 2) {
    // x^2 - tr x + det
    double out[2];
    quadratic_real_parts(-m.trace(), m.determinant(), out);
    return std::max(out[0], out[1]);
  }
  if (d == 3) {
    // x^3 + c2 x^2 + c1 x + c0 with c2 = -tr, c1 = sum of principal 2x2 minors, c0 = -det
    double tr = m.trace();
    double c1 = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) -
                m(0, 2) * m(2, 0) + m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    double c2 = -tr;
    double c0 = -m.determinant();
    // depressed cubic t^3 + p t + q, x = t - c2/3
    double shift = c2 / 3.0;
    double p = c1 - c2 * c2 / 3.0;
    double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    double disc = q * q / 4.0 + p * p * p / 27.0;
    double best;
    if (disc > 0.0) {
      // one real root, complex pair with real part -t_real/2
      double s = std::sqrt(disc);
      double u = std::cbrt(-q / 2.0 + s);
      double v = std::cbrt(-q / 2.0 - s);
      double t = u + v;
      best = std::max(t, -0.5 * t);
    } else {
      // three real roots (trigonometric form)
      double r = std::sqrt(std::max(0.0, -p / 3.0));
      if (r == 0.0) {
        best = 0.0;
      } else {
        double arg = std::clamp(3.0 * q / (2.0 * p * r), -1.0, 1.0);
        double phi = std::acos(arg) / 3.0;
        best = 2.0 * r * std::cos(phi);  // cos is maximal at the principal angle
      }
    }
    return best - shift;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = n;

  auto body = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(body);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace jumpldp
