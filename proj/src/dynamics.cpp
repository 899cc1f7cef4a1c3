#include "jumpldp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jumpldp/errors.hpp"
#include "jumpldp/numerics.hpp"

namespace jumpldp {

Eigen::VectorXd Path::state_at(double t) const {
  if (times.empty()) throw PreconditionError("empty path");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double u = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - u) * states[lo] + u * states[hi];
}

void Path::validate(int expected_dim) const {
  if (times.size() != states.size()) throw PreconditionError("path times/states length mismatch");
  if (times.size() < 2) throw PreconditionError("path needs at least one segment");
  if (times.front() != 0.0) throw PreconditionError("path must start at t=0");
  const int d = expected_dim >= 0 ? expected_dim : dim();
  DomainA dom{d};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1]))
      throw PreconditionError("path times not strictly increasing");
    if (states[i].size() != d) throw PreconditionError("path state dimension mismatch");
    if (!dom.contains(states[i]))
      throw OutOfDomainError("path node " + std::to_string(i) + " outside A");
  }
}

std::string Path::to_csv(const std::vector<std::string>& compartments) const {
  std::ostringstream out;
  out.precision(17);
  out << "t";
  for (const auto& c : compartments) out << "," << c;
  out << "\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << times[i];
    for (Eigen::Index j = 0; j < states[i].size(); ++j) out << "," << states[i][j];
    out << "\n";
  }
  return out.str();
}

Path Path::from_csv(const std::string& text) {
  Path p;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.empty()) continue;
    p.times.push_back(row[0]);
    Eigen::VectorXd s(static_cast<Eigen::Index>(row.size()) - 1);
    for (std::size_t i = 1; i < row.size(); ++i) s[static_cast<Eigen::Index>(i - 1)] = row[i];
    p.states.push_back(std::move(s));
  }
  if (p.times.size() < 2) throw PreconditionError("path CSV has fewer than two rows");
  return p;
}

Eigen::VectorXd drift(const Model& model, const Eigen::VectorXd& z) {
  if (!model.domain().contains(z)) throw OutOfDomainError("drift evaluated outside A");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(model.d());
  for (int j = 0; j < model.k(); ++j)
    b += model.rate(j, z) * model.transition(j).jump.cast<double>();
  return b;
}

Eigen::MatrixXd drift_jacobian(const Model& model, const Eigen::VectorXd& z) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(model.d(), model.d());
  for (int j = 0; j < model.k(); ++j)
    J += model.transition(j).jump.cast<double>() * model.rate_grad(j, z).transpose();
  return J;
}

namespace {

// drift without the domain check; RK4 stages may poke slightly outside A.
Eigen::VectorXd drift_unchecked(const Model& model, const Eigen::VectorXd& z) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(model.d());
  for (int j = 0; j < model.k(); ++j)
    b += model.rate(j, z) * model.transition(j).jump.cast<double>();
  return b;
}

}  // namespace

Path integrate_ode(const Model& model, const Eigen::VectorXd& z, double T, double dt,
                   OdeDiagnostics* diag) {
  if (!(T > 0.0)) throw PreconditionError("T must be positive");
  if (!(dt > 0.0 && dt <= T)) throw PreconditionError("dt must satisfy 0 < dt <= T");
  const DomainA dom = model.domain();
  if (!dom.contains(z)) throw OutOfDomainError("initial state outside A");

  Path path;
  Eigen::VectorXd y = dom.project(z);
  path.times.push_back(0.0);
  path.states.push_back(y);
  long projections = 0;

  double t = 0.0;
  while (t < T - 1e-15 * T) {
    double h = std::min(dt, T - t);
    Eigen::VectorXd k1 = drift_unchecked(model, y);
    Eigen::VectorXd k2 = drift_unchecked(model, y + 0.5 * h * k1);
    Eigen::VectorXd k3 = drift_unchecked(model, y + 0.5 * h * k2);
    Eigen::VectorXd k4 = drift_unchecked(model, y + h * k3);
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    bool adjusted = false;
    y = dom.project(y, &adjusted);
    if (adjusted) ++projections;
    t = std::min(t + h, T);
    path.times.push_back(t);
    path.states.push_back(y);
  }
  path.times.back() = T;
  if (diag) diag->projections = projections;
  return path;
}

Equilibrium find_equilibrium(const Model& model, const Eigen::VectorXd& guess) {
  const DomainA dom = model.domain();
  if (!dom.contains(guess)) throw OutOfDomainError("equilibrium guess outside A");

  Eigen::VectorXd z = dom.project(guess);
  Eigen::VectorXd b = drift_unchecked(model, z);
  int iter = 0;
  while (b.norm() > kEquilibriumTol) {
    if (++iter > kEquilibriumMaxIter)
      throw NoConvergenceError("equilibrium Newton exceeded " +
                               std::to_string(kEquilibriumMaxIter) + " iterations, |b|=" +
                               std::to_string(b.norm()));
    Eigen::MatrixXd J = drift_jacobian(model, z);
    // Levenberg-damped step handles singular Jacobians (equilibrium manifolds).
    Eigen::MatrixXd JtJ = J.transpose() * J;
    double damping = kTikhonov * (1.0 + JtJ.diagonal().maxCoeff());
    Eigen::VectorXd step =
        (JtJ + damping * Eigen::MatrixXd::Identity(model.d(), model.d()))
            .ldlt()
            .solve(-J.transpose() * b);

    double alpha = 1.0;
    bool improved = false;
    bool wanted_outside = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::VectorXd cand = z + alpha * step;
      if (!dom.contains(cand)) {
        wanted_outside = true;
        cand = dom.project(cand);
      }
      Eigen::VectorXd bc = drift_unchecked(model, cand);
      if (bc.norm() < b.norm()) {
        z = cand;
        b = bc;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      if (wanted_outside)
        throw LeftDomainError("equilibrium iterates pushed outside A without progress");
      throw NoConvergenceError("equilibrium line search stalled, |b|=" + std::to_string(b.norm()));
    }
  }

  Equilibrium eq;
  eq.z = z;
  eq.iterations = iter;
  eq.jacobian_eigen_max_real = max_real_eigenvalue(drift_jacobian(model, z));
  eq.stable = eq.jacobian_eigen_max_real < 0.0;
  return eq;
}

}  // namespace jumpldp
