#include "jumpldp/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jumpldp/action.hpp"
#include "jumpldp/dynamics.hpp"
#include "jumpldp/errors.hpp"
#include "jumpldp/model.hpp"
#include "jumpldp/quasipotential.hpp"
#include "jumpldp/rareevent.hpp"
#include "jumpldp/stochastic.hpp"

namespace jumpldp {

namespace {

using json = nlohmann::json;

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) vals.push_back(std::stod(cell));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> vals;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) vals.push_back(std::stod(cell));
  return vals;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write output file: " + path);
  out << content;
}

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("JUMPLDP_WORKERS")) {
    int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

// State predicate mini-language: "<compartment><op><value>" with op one of
// < <= > >=, e.g. "i>0" or "i>=0.25".
std::function<bool(const Eigen::VectorXd&)> parse_state_predicate(const Model& model,
                                                                  const std::string& text) {
  const std::vector<std::pair<std::string, int>> ops = {
      {"<=", 0}, {">=", 1}, {"<", 2}, {">", 3}};
  for (const auto& [op, code] : ops) {
    auto pos = text.find(op);
    if (pos == std::string::npos) continue;
    std::string comp = text.substr(0, pos);
    comp.erase(std::remove_if(comp.begin(), comp.end(), ::isspace), comp.end());
    const int ci = model.compartment_index(comp);
    if (ci < 0) throw PreconditionError("unknown compartment in predicate: '" + comp + "'");
    const double val = std::stod(text.substr(pos + op.size()));
    const int c = code;
    return [ci, val, c](const Eigen::VectorXd& z) {
      switch (c) {
        case 0: return z[ci] <= val;
        case 1: return z[ci] >= val;
        case 2: return z[ci] < val;
        default: return z[ci] > val;
      }
    };
  }
  throw PreconditionError("cannot parse predicate: '" + text + "'");
}

// Event mini-language: "terminal:<compartment><op><value>" tests the state
// at the trajectory horizon.
TrajectoryPredicate parse_event_predicate(const Model& model, const std::string& text) {
  const std::string prefix = "terminal:";
  if (text.rfind(prefix, 0) != 0)
    throw PreconditionError("event must look like 'terminal:<comp><op><val>'");
  auto pred = parse_state_predicate(model, text.substr(prefix.size()));
  return [pred](const Model& m, const Trajectory& traj) {
    return pred(trajectory_state_at(m, traj, traj.T));
  };
}

Tilt load_tilt(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tilt file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(std::string("invalid tilt JSON: ") + e.what());
  }
  const double eps = doc.at("epsilon").get<double>();
  std::vector<Eigen::VectorXd> rates;
  for (const auto& row : doc.at("rates")) {
    std::vector<double> vals = row.get<std::vector<double>>();
    rates.push_back(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return Tilt(eps, std::move(rates));
}

struct CommonOut {
  std::string out_path;
  std::string format = "json";
};

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"density-dependent jump processes: simulation, action functionals, "
               "quasipotentials and rare-event estimates"};
  app.require_subcommand(1);

  // ---- validate ----
  std::string v_model;
  int v_resolution = kGridResolution;
  std::string v_out = "validate.json";
  auto* sc_validate = app.add_subcommand("validate", "grid bounds and boundary consistency");
  sc_validate->add_option("model", v_model, "model JSON file")->required();
  sc_validate->add_option("--resolution", v_resolution, "grid points per simplex edge")
      ->capture_default_str();
  sc_validate->add_option("--out", v_out, "output JSON path")->capture_default_str();

  // ---- simulate ----
  std::string s_model, s_z, s_out = "trajectory.csv", s_format = "csv";
  long long s_n = 100;
  double s_t = 1.0;
  std::uint64_t s_seed = 1;
  auto* sc_sim = app.add_subcommand("simulate", "exact jump-hold simulation of Z^N");
  sc_sim->add_option("model", s_model)->required();
  sc_sim->add_option("--n", s_n, "population scale N")->capture_default_str();
  sc_sim->add_option("--z", s_z, "initial state, comma separated")->required();
  sc_sim->add_option("--t", s_t, "horizon T")->capture_default_str();
  sc_sim->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
  sc_sim->add_option("--out", s_out, "output path")->capture_default_str();
  sc_sim->add_option("--format", s_format, "csv|json")->capture_default_str();

  // ---- lln ----
  std::string l_model, l_z, l_out = "lln.json";
  long long l_n = 1000;
  double l_t = 10.0, l_dt = 0.0;
  int l_reps = 100, l_workers = 0;
  std::uint64_t l_seed = 1;
  auto* sc_lln = app.add_subcommand("lln", "sup distance of Z^N to the fluid limit");
  sc_lln->add_option("model", l_model)->required();
  sc_lln->add_option("--n", l_n)->capture_default_str();
  sc_lln->add_option("--z", l_z)->required();
  sc_lln->add_option("--t", l_t)->capture_default_str();
  sc_lln->add_option("--dt", l_dt, "ODE step (default T/10^4)")->capture_default_str();
  sc_lln->add_option("--reps", l_reps)->capture_default_str();
  sc_lln->add_option("--seed", l_seed)->capture_default_str();
  sc_lln->add_option("--workers", l_workers, "0 = use JUMPLDP_WORKERS or 1")
      ->capture_default_str();
  sc_lln->add_option("--out", l_out)->capture_default_str();

  // ---- ode ----
  std::string o_model, o_z, o_out = "ode.csv";
  double o_t = 10.0, o_dt = 0.0;
  auto* sc_ode = app.add_subcommand("ode", "integrate the fluid limit (RK4)");
  sc_ode->add_option("model", o_model)->required();
  sc_ode->add_option("--z", o_z)->required();
  sc_ode->add_option("--t", o_t)->capture_default_str();
  sc_ode->add_option("--dt", o_dt, "step (default T/10^4)")->capture_default_str();
  sc_ode->add_option("--out", o_out)->capture_default_str();

  // ---- action ----
  std::string a_model, a_path, a_out = "action.json";
  int a_quad = kQuadOrder;
  auto* sc_action = app.add_subcommand("action", "path action of a CSV path");
  sc_action->add_option("model", a_model)->required();
  sc_action->add_option("--path", a_path, "path CSV (t,<compartments>)")->required();
  sc_action->add_option("--quad-order", a_quad, "4|8|16")->capture_default_str();
  sc_action->add_option("--out", a_out)->capture_default_str();

  // ---- lagrangian ----
  std::string g_model, g_z, g_y, g_out = "lagrangian.json";
  auto* sc_lagr = app.add_subcommand("lagrangian", "local cost L(z,y) and optimal tilts");
  sc_lagr->add_option("model", g_model)->required();
  sc_lagr->add_option("--z", g_z)->required();
  sc_lagr->add_option("--y", g_y)->required();
  sc_lagr->add_option("--out", g_out)->capture_default_str();

  // ---- quasipotential ----
  std::string q_model, q_from, q_to, q_tgrid, q_out = "quasipotential.json",
              q_path_out = "quasipotential_path.csv";
  int q_segments = kDefaultSegments;
  double q_aend = kAEndpoint;
  auto* sc_qp = app.add_subcommand("quasipotential", "min action over paths and horizons");
  sc_qp->add_option("model", q_model)->required();
  sc_qp->add_option("--from", q_from)->required();
  sc_qp->add_option("--to", q_to)->required();
  sc_qp->add_option("--t-grid", q_tgrid, "comma list of horizons (default geometric 1..200)");
  sc_qp->add_option("--segments", q_segments)->capture_default_str();
  sc_qp->add_option("--a-end", q_aend, "endpoint regularization factor")->capture_default_str();
  sc_qp->add_option("--out", q_out)->capture_default_str();
  sc_qp->add_option("--path-out", q_path_out)->capture_default_str();

  // ---- exit-time ----
  std::string x_model, x_z, x_domain, x_out = "exit_time.json";
  long long x_n = 100;
  double x_tmax = 1e6;
  int x_reps = 100, x_workers = 0;
  std::uint64_t x_seed = 1;
  auto* sc_exit = app.add_subcommand("exit-time", "sample the exit time from a domain");
  sc_exit->add_option("model", x_model)->required();
  sc_exit->add_option("--n", x_n)->capture_default_str();
  sc_exit->add_option("--z", x_z)->required();
  sc_exit->add_option("--domain", x_domain, "predicate, e.g. 'i>0'")->required();
  sc_exit->add_option("--reps", x_reps)->capture_default_str();
  sc_exit->add_option("--t-max", x_tmax)->capture_default_str();
  sc_exit->add_option("--seed", x_seed)->capture_default_str();
  sc_exit->add_option("--workers", x_workers)->capture_default_str();
  sc_exit->add_option("--out", x_out)->capture_default_str();

  // ---- importance ----
  std::string i_model, i_z, i_event, i_tilt, i_out = "importance.json";
  long long i_n = 50;
  double i_t = 1.0;
  int i_reps = 10000, i_workers = 0;
  std::uint64_t i_seed = 1;
  auto* sc_imp = app.add_subcommand("importance", "Girsanov-tilted rare-event estimate");
  sc_imp->add_option("model", i_model)->required();
  sc_imp->add_option("--event", i_event, "e.g. 'terminal:i<=0.2'")->required();
  sc_imp->add_option("--tilt", i_tilt, "tilt JSON {epsilon, rates[[...]]}")->required();
  sc_imp->add_option("--n", i_n)->capture_default_str();
  sc_imp->add_option("--z", i_z)->required();
  sc_imp->add_option("--t", i_t)->capture_default_str();
  sc_imp->add_option("--reps", i_reps)->capture_default_str();
  sc_imp->add_option("--seed", i_seed)->capture_default_str();
  sc_imp->add_option("--workers", i_workers)->capture_default_str();
  sc_imp->add_option("--out", i_out)->capture_default_str();

  std::vector<std::string> argv_copy(args);
  try {
    std::vector<const char*> argv;
    argv.push_back("jumpldp");
    for (const auto& a : argv_copy) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    for (const auto* sc : app.get_subcommands())
      if (sc->parsed()) {
        std::cout << sc->help();
        return 0;
      }
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sc_validate->parsed()) {
      Model model = Model::load_file(v_model);
      AssumptionReport rep = validate_model(model, v_resolution);
      json doc;
      doc["sigma"] = rep.sigma;
      doc["lipschitz_C"] = rep.lipschitz_C;
      doc["boundary_consistent"] = rep.boundary_consistent;
      doc["violations"] = rep.violations;
      doc["grid_resolution"] = rep.grid_resolution;
      json ca = json::object();
      for (const auto& [a, c] : rep.C_a_samples) ca[std::to_string(a)] = c;
      doc["C_a_samples"] = ca;
      write_file(v_out, doc.dump(2) + "\n");
      std::cout << "validate: sigma=" << rep.sigma << " lipschitz_C=" << rep.lipschitz_C
                << " boundary_consistent=" << (rep.boundary_consistent ? "true" : "false")
                << " violations=" << rep.violations.size() << " -> " << v_out << "\n";
      return 0;
    }

    if (sc_sim->parsed()) {
      Model model = Model::load_file(s_model);
      Trajectory traj = simulate(model, s_n, parse_vector(s_z), s_t, s_seed);
      if (s_format == "csv") {
        std::ostringstream head;
        head << "# seed=" << s_seed << " rng=" << kRngName << " N=" << s_n << " T=" << s_t
             << "\n";
        write_file(s_out, head.str() + trajectory_to_csv(model, traj));
      } else {
        json doc;
        doc["N"] = traj.N;
        doc["T"] = traj.T;
        doc["seed"] = s_seed;
        doc["rng"] = kRngName;
        doc["z_init"] = vec_to_json(traj.z_init);
        json ev = json::array();
        for (const auto& [t, j] : traj.events) ev.push_back({t, j});
        doc["events"] = ev;
        doc["final_state"] = vec_to_json(trajectory_state_at(model, traj, traj.T));
        write_file(s_out, doc.dump(2) + "\n");
      }
      std::cout << "simulate: events=" << traj.events.size() << " seed=" << s_seed << " -> "
                << s_out << "\n";
      return 0;
    }

    if (sc_lln->parsed()) {
      Model model = Model::load_file(l_model);
      Eigen::VectorXd z = parse_vector(l_z);
      double dt = l_dt > 0.0 ? l_dt : l_t / 1e4;
      Path ode = integrate_ode(model, z, l_t, dt);
      int workers = resolve_workers(l_workers);
      EnsembleStats st = monte_carlo(
          [&](std::uint64_t seed) {
            return lln_distance(model, simulate(model, l_n, z, l_t, seed), ode);
          },
          l_reps, l_seed, workers);
      std::vector<double> sorted = st.values;
      std::sort(sorted.begin(), sorted.end());
      double median = sorted[sorted.size() / 2];
      json doc;
      doc["mean"] = st.mean;
      doc["se"] = st.se;
      doc["median"] = median;
      doc["reps"] = st.reps;
      doc["base_seed"] = st.base_seed;
      doc["rng"] = kRngName;
      doc["values"] = st.values;
      write_file(l_out, doc.dump(2) + "\n");
      std::cout << "lln: median=" << median << " mean=" << st.mean << " se=" << st.se << " -> "
                << l_out << "\n";
      return 0;
    }

    if (sc_ode->parsed()) {
      Model model = Model::load_file(o_model);
      double dt = o_dt > 0.0 ? o_dt : o_t / 1e4;
      OdeDiagnostics diag;
      Path path = integrate_ode(model, parse_vector(o_z), o_t, dt, &diag);
      write_file(o_out, path.to_csv(model.compartments()));
      std::ostringstream term;
      const Eigen::VectorXd& zf = path.states.back();
      for (Eigen::Index i = 0; i < zf.size(); ++i) term << (i ? "," : "") << zf[i];
      std::cout << "ode: terminal=(" << term.str() << ") projections=" << diag.projections
                << " -> " << o_out << "\n";
      return 0;
    }

    if (sc_action->parsed()) {
      Model model = Model::load_file(a_model);
      std::ifstream in(a_path);
      if (!in) throw Error("cannot open path CSV: " + a_path);
      std::stringstream buf;
      buf << in.rdbuf();
      Path path = Path::from_csv(buf.str());
      double value = path_action(model, path, a_quad);
      json doc;
      doc["action"] = std::isfinite(value) ? json(value) : json("inf");
      doc["finite"] = std::isfinite(value);
      write_file(a_out, doc.dump(2) + "\n");
      std::cout << "action: " << value << " -> " << a_out << "\n";
      return 0;
    }

    if (sc_lagr->parsed()) {
      Model model = Model::load_file(g_model);
      LagrangianResult lr = local_lagrangian(model, parse_vector(g_z), parse_vector(g_y));
      json doc;
      doc["L"] = lr.finite() ? json(lr.value) : json("inf");
      doc["theta"] = lr.theta_star ? vec_to_json(*lr.theta_star) : json(nullptr);
      doc["mu"] = vec_to_json(lr.mu_star);
      doc["iterations"] = lr.iterations;
      write_file(g_out, doc.dump(2) + "\n");
      std::cout << "lagrangian: L=" << lr.value << " iterations=" << lr.iterations << " -> "
                << g_out << "\n";
      return 0;
    }

    if (sc_qp->parsed()) {
      Model model = Model::load_file(q_model);
      std::vector<double> tgrid;
      if (!q_tgrid.empty()) tgrid = parse_list(q_tgrid);
      QuasipotentialResult qp = quasipotential(model, parse_vector(q_from), parse_vector(q_to),
                                               tgrid, q_segments, q_aend);
      write_file(q_path_out, qp.path.to_csv(model.compartments()));
      json doc;
      doc["value"] = qp.value;
      doc["T_star"] = qp.T_star;
      doc["converged"] = qp.converged;
      doc["z_end_requested"] = vec_to_json(qp.z_end_requested);
      doc["z_end_used"] = vec_to_json(qp.z_end_used);
      json per = json::array();
      for (const auto& [T, v] : qp.per_T) per.push_back({T, v});
      doc["per_T"] = per;
      doc["path_csv"] = q_path_out;
      write_file(q_out, doc.dump(2) + "\n");
      std::cout << "quasipotential: V=" << qp.value << " T*=" << qp.T_star << " -> " << q_out
                << "\n";
      for (const auto& [T, v] : qp.per_T)
        std::cout << "  T=" << T << " action=" << v << "\n";
      return 0;
    }

    if (sc_exit->parsed()) {
      Model model = Model::load_file(x_model);
      Eigen::VectorXd z = parse_vector(x_z);
      auto in_domain = parse_state_predicate(model, x_domain);
      int workers = resolve_workers(x_workers);
      struct Rep {
        double tau = 0.0;
        bool exited = false;
      };
      std::function<Rep(std::uint64_t, int)> one = [&](std::uint64_t seed, int) -> Rep {
        ExitSample s = sample_exit_time(model, x_n, z, in_domain, x_tmax, seed);
        Rep r;
        r.exited = s.tau.has_value();
        r.tau = r.exited ? *s.tau : x_tmax;
        return r;
      };
      std::vector<Rep> reps = run_replicates<Rep>(x_reps, x_seed, workers, one);
      int exited = 0;
      std::vector<double> taus;
      for (const Rep& r : reps)
        if (r.exited) {
          ++exited;
          taus.push_back(r.tau);
        }
      EnsembleStats st = stats_from_values(taus, x_seed);
      json doc;
      doc["reps"] = x_reps;
      doc["exited"] = exited;
      doc["censored"] = x_reps - exited;
      doc["t_max"] = x_tmax;
      doc["mean_tau"] = exited > 0 ? json(st.mean) : json(nullptr);
      doc["se"] = exited > 0 ? json(st.se) : json(nullptr);
      doc["base_seed"] = x_seed;
      doc["rng"] = kRngName;
      doc["values"] = st.values;
      write_file(x_out, doc.dump(2) + "\n");
      std::cout << "exit-time: exited=" << exited << "/" << x_reps
                << " mean_tau=" << (exited ? std::to_string(st.mean) : std::string("n/a"))
                << " -> " << x_out << "\n";
      return 0;
    }

    if (sc_imp->parsed()) {
      Model model = Model::load_file(i_model);
      Tilt tilt = load_tilt(i_tilt);
      TrajectoryPredicate event = parse_event_predicate(model, i_event);
      int workers = resolve_workers(i_workers);
      ImportanceResult r = importance_sampling_estimate(model, event, tilt, i_n,
                                                        parse_vector(i_z), i_t, i_reps, i_seed,
                                                        workers);
      json doc;
      doc["estimate"] = r.estimate;
      doc["log_estimate"] = std::isfinite(r.log_estimate) ? json(r.log_estimate) : json("-inf");
      doc["se"] = r.se;
      doc["support_violations"] = r.support_violations;
      doc["hit_fraction"] = r.hit_fraction;
      doc["reps"] = r.reps;
      doc["base_seed"] = r.base_seed;
      doc["rng"] = kRngName;
      write_file(i_out, doc.dump(2) + "\n");
      std::cout << "importance: estimate=" << r.estimate << " se=" << r.se
                << " hits=" << r.hit_fraction << " violations=" << r.support_violations
                << " -> " << i_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "usage error: no subcommand\n";
  return 2;
}

}  // namespace jumpldp
