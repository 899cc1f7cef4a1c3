// Acceptance suite: one pass/fail line per criterion, exit code = failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "jumpldp/action.hpp"
#include "jumpldp/cli.hpp"
#include "jumpldp/dynamics.hpp"
#include "jumpldp/model.hpp"
#include "jumpldp/quasipotential.hpp"
#include "jumpldp/rareevent.hpp"
#include "jumpldp/stochastic.hpp"
#include "support.hpp"

using namespace jumpldp;
using testsupport::make_sir;
using testsupport::make_sis;
using testsupport::make_toy3;
using testsupport::vec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& msg) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + msg;
    }
  }
  void note(const std::string& msg) {
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
Outcome criterion1() {
  Outcome out;
  CounterRng rng(1001);
  for (int t = 0; t < 10000; ++t) {
    double w = testsupport::uniform(rng, 1e-6, 5.0);
    double v1 = testsupport::uniform(rng, 0.0, 5.0);
    double v2 = testsupport::uniform(rng, 0.0, 5.0);
    if (f_cost(w, w) != 0.0) out.check(false, "f(w,w)=0");
    if (f_cost(0.0, w) != w) out.check(false, "f(0,w)=w");
    if (!(f_cost(v1, w) >= 0.0)) out.check(false, "f >= 0");
    double mid = f_cost(0.5 * (v1 + v2), w);
    if (!(mid <= 0.5 * (f_cost(v1, w) + f_cost(v2, w)) + 1e-12))
      out.check(false, "convexity in nu");
    if (!out.pass) break;
  }
  out.check(f_cost(0.0, 0.0) == 0.0, "f(0,0)=0");
  out.check(f_cost(1.0, 0.0) == kInf, "f(v,0)=inf");
  if (out.pass) out.note("10^4 random triples, exact/1e-12");
  return out;
}

// ---------------------------------------------------------------- criterion 2
Outcome criterion2() {
  Outcome out;
  Model sis = make_sis(2.0, 1.0);
  Path flow_sis = integrate_ode(sis, vec({0.1}), 10.0, 1e-3);
  double a_sis = path_action(sis, flow_sis);
  out.check(a_sis <= 1e-5, "SIS flow action " + fmt(a_sis) + " > 1e-5");

  Model sir = make_sir(2.0, 1.0);
  Path flow_sir = integrate_ode(sir, vec({0.6, 0.3}), 10.0, 1e-3);
  double a_sir = path_action(sir, flow_sir);
  out.check(a_sir <= 1e-5, "SIR flow action " + fmt(a_sir) + " > 1e-5");
  if (out.pass) out.note("SIS " + fmt(a_sis) + ", SIR " + fmt(a_sir));
  return out;
}

// ---------------------------------------------------------------- criterion 3
Outcome criterion3() {
  Outcome out;
  CounterRng rng(3003);
  for (const Model& m : {make_sis(2.0, 1.0), make_sir(2.0, 1.0)}) {
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd z = testsupport::random_interior(rng, m.d());
      Eigen::VectorXd mu(m.k());
      for (int j = 0; j < m.k(); ++j)
        mu[j] = m.rate(j, z) > kTolRate ? testsupport::uniform(rng, 0.0, 2.0) : 0.0;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m.d());
      for (int j = 0; j < m.k(); ++j) y += mu[j] * m.transition(j).jump.cast<double>();
      double fsum = 0.0;
      for (int j = 0; j < m.k(); ++j) fsum += f_cost(mu[j], std::max(0.0, m.rate(j, z)));
      LagrangianResult lr = local_lagrangian(m, z, y);
      if (!(lr.value <= fsum + 1e-8)) {
        out.check(false, m.name() + ": L > sum f at draw " + std::to_string(t));
        break;
      }
      double fstar = 0.0;
      for (int j = 0; j < m.k(); ++j)
        fstar += f_cost(lr.mu_star[j], std::max(0.0, m.rate(j, z)));
      if (!(std::abs(lr.value - fstar) <= 1e-8)) {
        out.check(false, m.name() + ": no equality at mu_star, gap " + fmt(lr.value - fstar));
        break;
      }
    }
  }

  // d=1, k=3 toy versus a dense grid over the feasible control set
  Model toy = make_toy3();
  auto brute = [&](double zv, double yv) {
    Eigen::VectorXd zz = vec({zv});
    double b0 = toy.rate(0, zz), b1 = toy.rate(1, zz), b2 = toy.rate(2, zz);
    auto cost = [&](double m0, double m2) {
      double m1 = m0 + m2 - yv;
      if (m1 < 0.0) return kInf;
      return f_cost(m0, b0) + f_cost(m1, b1) + f_cost(m2, b2);
    };
    double lo0 = 0.0, hi0 = 6.0, lo2 = 0.0, hi2 = 6.0, best = kInf, bm0 = 0, bm2 = 0;
    for (int refine = 0; refine < 6; ++refine) {
      const int n = 60;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          double m0 = lo0 + (hi0 - lo0) * i / n, m2 = lo2 + (hi2 - lo2) * j / n;
          double c = cost(m0, m2);
          if (c < best) {
            best = c;
            bm0 = m0;
            bm2 = m2;
          }
        }
      double w0 = (hi0 - lo0) / n * 2.0, w2 = (hi2 - lo2) / n * 2.0;
      lo0 = std::max(0.0, bm0 - w0);
      hi0 = bm0 + w0;
      lo2 = std::max(0.0, bm2 - w2);
      hi2 = bm2 + w2;
    }
    return best;
  };
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    double zv = testsupport::uniform(rng, 0.05, 0.9);
    double yv = testsupport::uniform(rng, -1.5, 1.5);
    LagrangianResult lr = local_lagrangian(toy, vec({zv}), vec({yv}));
    worst = std::max(worst, std::abs(lr.value - brute(zv, yv)));
  }
  out.check(worst <= 1e-4, "toy brute-force gap " + fmt(worst) + " > 1e-4");
  if (out.pass) out.note("10^3 draws/model; toy grid gap " + fmt(worst));
  return out;
}

// ---------------------------------------------------------------- criterion 4
Outcome criterion4() {
  Outcome out;
  Model sis = make_sis(2.0, 1.0);
  const double T = 10.0;
  Path ode = integrate_ode(sis, vec({0.1}), T, 1e-3);
  auto median_at = [&](long long N) {
    EnsembleStats st = monte_carlo(
        [&](std::uint64_t seed) {
          return lln_distance(sis, simulate(sis, N, vec({0.1}), T, seed), ode);
        },
        100, 4004, 2);
    std::vector<double> v = st.values;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  double low = median_at(100), high = median_at(10000);
  double ratio = low / high;
  out.check(ratio >= 3.0 && ratio <= 30.0, "median ratio " + fmt(ratio) + " outside [3,30]");
  out.note("medians " + fmt(low) + " -> " + fmt(high) + ", ratio " + fmt(ratio));
  return out;
}

// ---------------------------------------------------------------- criterion 5
Outcome criterion5() {
  Outcome out;

  // Girsanov identity: matching constant rates give xi_T = 1 exactly
  Model births = testsupport::make_const_birth(0.05);
  Tilt match(0.25, std::vector<Eigen::VectorXd>(4, vec({0.05})));
  for (int r = 0; r < 100; ++r) {
    Trajectory traj = simulate_tilted(births, match, 400, vec({0.0}), 1.0, derive_stream(50, r));
    LikelihoodResult lr = log_likelihood_ratio(births, match, traj);
    if (lr.log_xi != 0.0) {
      out.check(false, "xi != 1 exactly on trajectory " + std::to_string(r));
      break;
    }
  }

  // unbiasedness on the SIS rare event {i_T <= 0.2}
  Model sis = make_sis(2.0, 1.0);
  const long long N = 50;
  const double T = 1.0;
  auto event = [](const Model& m, const Trajectory& tr) {
    return trajectory_state_at(m, tr, tr.T)[0] <= 0.2;
  };
  EnsembleStats crude = monte_carlo(
      [&](std::uint64_t seed) {
        return event(sis, simulate(sis, N, vec({0.5}), T, seed)) ? 1.0 : 0.0;
      },
      1000000, 5005, 2);

  FixedTResult down = minimize_action_fixed_T(sis, vec({0.5}), vec({0.2}), T, 20);
  Tilt tilt = tilt_from_path(sis, down.path, 0.05);
  ImportanceResult is =
      importance_sampling_estimate(sis, event, tilt, N, vec({0.5}), T, 10000, 5050, 2);

  double combined = std::sqrt(crude.se * crude.se + is.se * is.se);
  out.check(std::abs(is.estimate - crude.mean) <= 3.0 * combined,
            "IS " + fmt(is.estimate) + " vs crude " + fmt(crude.mean) + " beyond 3 x " +
                fmt(combined));
  out.note("crude " + fmt(crude.mean) + " (se " + fmt(crude.se) + "), IS " + fmt(is.estimate) +
           " (se " + fmt(is.se) + ", IS se <= crude se: " +
           (is.se <= crude.se ? "yes" : "no") + ")");
  return out;
}

// ---------------------------------------------------------------- criterion 6
QuasipotentialResult g_qp_result;  // reused by criteria 7 and 8

Outcome criterion6() {
  Outcome out;
  Model sis = make_sis(2.0, 1.0);
  g_qp_result = quasipotential(sis, vec({0.5}), vec({0.0}), {}, 100);
  out.check(g_qp_result.z_end_used[0] == 0.005, "endpoint not regularized to 0.005");

  double oracle = bd_quasipotential_1d(sis, 0.5, 0.005);
  double rel = std::abs(g_qp_result.value - oracle) / oracle;
  out.check(rel <= 0.03, "optimizer V " + fmt(g_qp_result.value) + " vs oracle " + fmt(oracle) +
                             " off by " + fmt(100.0 * rel) + "%");

  // closed-form anchor at the unregularized endpoint
  double full = bd_quasipotential_1d(sis, 0.5, 0.0);
  out.check(std::abs(full - (std::log(2.0) - 0.5)) <= 1e-9,
            "oracle anchor != ln2 - 1/2");
  out.note("V=" + fmt(g_qp_result.value) + ", oracle " + fmt(oracle) + ", rel err " +
           fmt(100.0 * rel) + "%, T*=" + fmt(g_qp_result.T_star));
  return out;
}

// ---------------------------------------------------------------- criterion 7
Outcome criterion7() {
  Outcome out;
  Model sis = make_sis(2.0, 1.0);

  // slope of log E[tau] against N from the exact birth-death oracle
  std::vector<double> Ns{100, 200, 400, 600};
  std::vector<double> logs;
  for (double N : Ns) {
    BdMeanExitResult r =
        bd_exact_mean_exit_time(sis, static_cast<long long>(N), static_cast<long long>(N) / 2);
    logs.push_back(r.log_mean);
  }
  double nbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    nbar += Ns[i];
    ybar += logs[i];
  }
  nbar /= Ns.size();
  ybar /= logs.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    num += (Ns[i] - nbar) * (logs[i] - ybar);
    den += (Ns[i] - nbar) * (Ns[i] - nbar);
  }
  const double slope = num / den;

  // quasipotential to the regularized boundary, extrapolated to 0 with the
  // oracle tail over [0, 0.005]
  const double v_reg = g_qp_result.value;
  const double tail = bd_quasipotential_1d(sis, 0.005, 0.0);
  const double v_extrap = v_reg + tail;
  double rel = std::abs(slope - v_extrap) / v_extrap;
  out.check(rel <= 0.10, "slope " + fmt(slope) + " vs V " + fmt(v_extrap) + " off by " +
                             fmt(100.0 * rel) + "%");
  out.note("slope " + fmt(slope) + ", V_extrap " + fmt(v_extrap) + " (rel " + fmt(100.0 * rel) +
           "%)");

  // Monte Carlo comparison at N = 100: the exact oracle itself shows this
  // sub-criterion cannot run inside the stated budget. E[tau] ~ 1.28e8 time
  // units and the QSD event rate is ~N, so 200 replicates need ~2.6e12
  // events (days of compute). A bounded attempt with the largest horizon
  // that fits the budget censors every replicate.
  BdMeanExitResult oracle100 = bd_exact_mean_exit_time(sis, 100, 50);
  const double t_budget = 1.5e4;  // ~3e8 simulated events across 200 reps
  int exited = 0;
  std::vector<double> taus;
  for (int r = 0; r < 200; ++r) {
    ExitSample s = sample_exit_time(
        sis, 100, vec({0.5}), [](const Eigen::VectorXd& z) { return z[0] > 0.0; }, t_budget,
        derive_stream(7007, r));
    if (s.tau.has_value()) {
      ++exited;
      taus.push_back(*s.tau);
    }
  }
  if (exited == 200) {
    EnsembleStats st = stats_from_values(taus, 7007);
    out.check(std::abs(st.mean - oracle100.mean) <= 3.0 * st.se,
              "MC mean " + fmt(st.mean) + " vs oracle " + fmt(oracle100.mean));
  } else {
    out.check(false, "MC sub-criterion infeasible: oracle mean E[tau]=" + fmt(oracle100.mean) +
                         " time units at N=100 implies ~" + fmt(oracle100.mean * 100.0 * 200.0) +
                         " simulated events for 200 uncensored replicates, far beyond the "
                         "10-minute budget; a bounded attempt (t_max=" +
                         fmt(t_budget) + ") exited " + std::to_string(exited) + "/200");
  }
  return out;
}

// ---------------------------------------------------------------- criterion 8
Outcome criterion8() {
  Outcome out;
  Model sis = make_sis(2.0, 1.0);
  AssumptionReport rep = validate_model(sis, 200);
  const double sigma = rep.sigma;
  const Path& path = g_qp_result.path;
  if (path.times.size() < 3) {
    out.check(false, "no minimizer available from criterion 6");
    return out;
  }
  const double s = g_qp_result.value;
  const int n = path.segments();
  // per-segment optimal intensities along the minimizer
  std::vector<Eigen::VectorXd> mus;
  for (int i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    double dt = path.times[si + 1] - path.times[si];
    Eigen::VectorXd mid = 0.5 * (path.states[si] + path.states[si + 1]);
    Eigen::VectorXd slope = (path.states[si + 1] - path.states[si]) / dt;
    LagrangianResult lr = local_lagrangian(sis, mid, slope);
    if (!lr.finite()) {
      out.check(false, "minimizer has an infeasible segment");
      return out;
    }
    mus.push_back(lr.mu_star);
  }
  // every window of consecutive segments with length < 1/sigma
  long windows = 0;
  for (int a = 0; a < n; ++a) {
    double len = 0.0;
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(sis.k());
    for (int b = a; b < n; ++b) {
      const auto sb = static_cast<std::size_t>(b);
      double dt = path.times[sb + 1] - path.times[sb];
      len += dt;
      if (len >= 1.0 / sigma) break;
      integral += mus[sb] * dt;
      ++windows;
      double bound = (s + 1.0) / (-std::log(sigma * len));
      for (int j = 0; j < sis.k(); ++j) {
        if (!(integral[j] <= bound + 1e-9)) {
          out.check(false, "window [" + std::to_string(a) + "," + std::to_string(b) +
                               "] transition " + std::to_string(j) + ": " + fmt(integral[j]) +
                               " > " + fmt(bound));
          return out;
        }
      }
    }
  }
  out.note(std::to_string(windows) + " windows below 1/sigma checked");
  return out;
}

// ---------------------------------------------------------------- criterion 9
Outcome criterion9() {
  Outcome out;
  // keep the transcript to one line per criterion: the CLI's human
  // summaries go to a scratch buffer
  std::stringstream scratch;
  std::streambuf* saved = std::cout.rdbuf(scratch.rdbuf());
  struct Restore {
    std::streambuf* buf;
    ~Restore() { std::cout.rdbuf(buf); }
  } restore{saved};

  const std::string dir = "/tmp/jumpldp_acceptance_";
  const std::string model = dir + "sis.json";
  {
    std::ofstream f(model);
    f << make_sis(2.0, 1.0).to_json_text();
  }
  const std::string tilt = dir + "tilt.json";
  {
    std::ofstream f(tilt);
    f << R"json({"epsilon": 0.25, "rates": [[0.2, 0.6], [0.2, 0.6], [0.2, 0.6], [0.2, 0.6]]})json";
  }

  auto file_text = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  struct Cmd {
    std::string name;
    std::vector<std::string> args;  // without --out
  };
  std::vector<Cmd> cmds = {
      {"validate", {"validate", model, "--resolution", "50"}},
      {"simulate", {"simulate", model, "--n", "150", "--z", "0.3", "--t", "2", "--seed", "11"}},
      {"lln",
       {"lln", model, "--n", "100", "--z", "0.2", "--t", "1", "--reps", "12", "--seed", "3"}},
      {"ode", {"ode", model, "--z", "0.1", "--t", "2", "--dt", "0.01"}},
      {"lagrangian", {"lagrangian", model, "--z", "0.4", "--y", "-0.1"}},
      {"quasipotential",
       {"quasipotential", model, "--from", "0.5", "--to", "0.3", "--t-grid", "2,4", "--segments",
        "20"}},
      {"exit-time",
       {"exit-time", model, "--n", "30", "--z", "0.2", "--domain", "i>0", "--reps", "10",
        "--t-max", "50", "--seed", "21"}},
      {"importance",
       {"importance", model, "--event", "terminal:i<=0.3", "--tilt", tilt, "--n", "30", "--z",
        "0.5", "--t", "1", "--reps", "200", "--seed", "17"}},
  };
  // the `action` subcommand consumes the ode output; appended afterwards
  for (const auto& cmd : cmds) {
    std::string o1 = dir + cmd.name + "_1.out", o2 = dir + cmd.name + "_2.out";
    std::vector<std::string> a1 = cmd.args, a2 = cmd.args;
    a1.insert(a1.end(), {"--out", o1});
    a2.insert(a2.end(), {"--out", o2});
    std::string path_csv_1, path_csv_2;
    if (cmd.name == "quasipotential") {
      // both runs write the optimizer path to the same name so the JSON
      // payloads are comparable; the CSV is captured between runs
      a1.insert(a1.end(), {"--path-out", dir + "qp_path.csv"});
      a2.insert(a2.end(), {"--path-out", dir + "qp_path.csv"});
    }
    // vary the worker count where the command accepts it
    if (cmd.name == "lln" || cmd.name == "exit-time" || cmd.name == "importance") {
      a1.insert(a1.end(), {"--workers", "1"});
      a2.insert(a2.end(), {"--workers", "3"});
    }
    if (cli_dispatch(a1) != 0) {
      out.check(false, cmd.name + " did not exit 0");
      continue;
    }
    if (cmd.name == "quasipotential") path_csv_1 = file_text(dir + "qp_path.csv");
    if (cli_dispatch(a2) != 0) {
      out.check(false, cmd.name + " rerun did not exit 0");
      continue;
    }
    if (cmd.name == "quasipotential") path_csv_2 = file_text(dir + "qp_path.csv");
    if (file_text(o1) != file_text(o2) || path_csv_1 != path_csv_2)
      out.check(false, cmd.name + " output differs across reruns/workers");
  }

  std::string ode_csv = dir + "ode_1.out";
  std::string act1 = dir + "action_1.out", act2 = dir + "action_2.out";
  if (cli_dispatch({"action", model, "--path", ode_csv, "--out", act1}) != 0 ||
      cli_dispatch({"action", model, "--path", ode_csv, "--out", act2}) != 0 ||
      file_text(act1) != file_text(act2))
    out.check(false, "action output differs across reruns");

  if (out.pass) out.note("9 subcommands bit-identical across reruns and worker counts");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> fn;
  };
  std::vector<Criterion> criteria = {
      {1, "cost-function suite", 1.0, criterion1},
      {2, "zero-cost flow", 30.0, criterion2},
      {3, "Legendre duality", 60.0, criterion3},
      {4, "LLN convergence", 60.0, criterion4},
      {5, "Girsanov identity and unbiasedness", 300.0, criterion5},
      {6, "quasipotential oracle equivalence", 300.0, criterion6},
      {7, "exit-time asymptotics", 600.0, criterion7},
      {8, "window bound along minimizers", 30.0, criterion8},
      {9, "CLI determinism", 60.0, criterion9},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > c.budget_s) {
      out.pass = false;
      out.detail += (out.detail.empty() ? "" : "; ") + std::string("runtime ") + fmt(elapsed) +
                    "s over budget " + fmt(c.budget_s) + "s";
    }
    std::printf("%s  criterion %d (%s): %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", c.id,
                c.title, out.detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
