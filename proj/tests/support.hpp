#ifndef JUMPLDP_TESTS_SUPPORT_HPP
#define JUMPLDP_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "jumpldp/model.hpp"
#include "jumpldp/rng.hpp"

namespace testsupport {

using jumpldp::Model;
using jumpldp::RateExpr;
using jumpldp::Transition;

inline Eigen::VectorXi jump_vec(std::initializer_list<int> vals) {
  Eigen::VectorXi v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (int x : vals) v[i++] = x;
  return v;
}

inline Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

// SIS: one compartment i, infection +1 at lambda i (1-i), recovery -1 at gamma i.
inline Model make_sis(double lambda = 2.0, double gamma = 1.0) {
  std::vector<std::string> comps{"i"};
  std::vector<std::string> pars{"lambda", "gamma"};
  std::vector<Transition> ts;
  ts.push_back({"infection", jump_vec({1}), RateExpr::parse("lambda * i * (1 - i)", comps, pars)});
  ts.push_back({"recovery", jump_vec({-1}), RateExpr::parse("gamma * i", comps, pars)});
  return Model("sis", comps, {{"lambda", lambda}, {"gamma", gamma}}, std::move(ts));
}

// SIR: compartments (s, i); infection (-1,+1) at lambda s i, recovery (0,-1) at gamma i.
inline Model make_sir(double lambda = 2.0, double gamma = 1.0) {
  std::vector<std::string> comps{"s", "i"};
  std::vector<std::string> pars{"lambda", "gamma"};
  std::vector<Transition> ts;
  ts.push_back({"infection", jump_vec({-1, 1}), RateExpr::parse("lambda * s * i", comps, pars)});
  ts.push_back({"recovery", jump_vec({0, -1}), RateExpr::parse("gamma * i", comps, pars)});
  return Model("sir", comps, {{"lambda", lambda}, {"gamma", gamma}}, std::move(ts));
}

// d=1 with jumps +1 (rate bplus) and -1 (rate bminus), constants.
inline Model make_const_pm(double bplus, double bminus) {
  std::vector<std::string> comps{"x"};
  std::vector<std::string> pars{"a", "b"};
  std::vector<Transition> ts;
  ts.push_back({"up", jump_vec({1}), RateExpr::parse("a", comps, pars)});
  ts.push_back({"down", jump_vec({-1}), RateExpr::parse("b", comps, pars)});
  return Model("const_pm", comps, {{"a", bplus}, {"b", bminus}}, std::move(ts));
}

// single transition +1 at constant rate c.
inline Model make_const_birth(double c) {
  std::vector<std::string> comps{"x"};
  std::vector<std::string> pars{"c"};
  std::vector<Transition> ts;
  ts.push_back({"birth", jump_vec({1}), RateExpr::parse("c", comps, pars)});
  return Model("const_birth", comps, {{"c", c}}, std::move(ts));
}

// d=1, three transitions +1/-1/+1 with distinct state-dependent rates;
// exercises k > d duality cases.
inline Model make_toy3() {
  std::vector<std::string> comps{"x"};
  std::vector<std::string> pars{};
  std::vector<Transition> ts;
  ts.push_back({"up_a", jump_vec({1}), RateExpr::parse("0.5 + x", comps, pars)});
  ts.push_back({"down", jump_vec({-1}), RateExpr::parse("0.3 + 0.5 * x", comps, pars)});
  ts.push_back({"up_b", jump_vec({1}), RateExpr::parse("0.2 + 0.1 * x^2", comps, pars)});
  return Model("toy3", comps, {}, std::move(ts));
}

// uniform double in [lo, hi)
inline double uniform(jumpldp::CounterRng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.next_unit();
}

// random interior point of the simplex (coordinates >= margin, sum <= 1 - margin)
inline Eigen::VectorXd random_interior(jumpldp::CounterRng& rng, int d, double margin = 0.05) {
  for (;;) {
    Eigen::VectorXd z(d);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
      z[i] = uniform(rng, margin, 1.0);
      sum += z[i];
    }
    if (sum <= 1.0 - margin) return z;
  }
}

}  // namespace testsupport

#endif
