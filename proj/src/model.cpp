#include "jumpldp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jumpldp/errors.hpp"

namespace jumpldp {

using json = nlohmann::json;

bool DomainA::contains(const Eigen::VectorXd& z, double tol) const {
  if (z.size() != d) return false;
  for (int i = 0; i < d; ++i)
    if (z[i] < -tol) return false;
  return z.sum() <= 1.0 + tol;
}

double DomainA::boundary_distance(const Eigen::VectorXd& z) const {
  double dist = (1.0 - z.sum()) / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) dist = std::min(dist, z[i]);
  return dist;
}

Eigen::VectorXd DomainA::project(const Eigen::VectorXd& z, bool* adjusted) const {
  Eigen::VectorXd p = z;
  bool moved = false;
  for (int i = 0; i < d; ++i) {
    if (p[i] < 0.0) {
      p[i] = 0.0;
      moved = true;
    }
  }
  double s = p.sum();
  if (s > 1.0) {
    p /= s;
    moved = true;
  }
  if (adjusted) *adjusted = moved;
  return p;
}

namespace {

// Faces of A: {z_i = 0} for each i, plus {sum z = 1}. Returns the distance
// from an interior point to each face's affine hull.
std::vector<double> face_distances(const Eigen::VectorXd& z0) {
  const int d = static_cast<int>(z0.size());
  std::vector<double> dist;
  for (int i = 0; i < d; ++i) dist.push_back(z0[i]);
  dist.push_back((1.0 - z0.sum()) / std::sqrt(static_cast<double>(d)));
  return dist;
}

// Vertices of A: the origin and the unit vectors.
std::vector<Eigen::VectorXd> simplex_vertices(int d) {
  std::vector<Eigen::VectorXd> v;
  v.push_back(Eigen::VectorXd::Zero(d));
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[i] = 1.0;
    v.push_back(e);
  }
  return v;
}

}  // namespace

InteriorMap InteriorMap::for_anchor(const Eigen::VectorXd& z0) {
  const int d = static_cast<int>(z0.size());
  if (d < 1) throw PreconditionError("interior map needs d >= 1");
  for (int i = 0; i < d; ++i)
    if (z0[i] <= 0.0) throw PreconditionError("anchor not strictly interior (coordinate <= 0)");
  if (z0.sum() >= 1.0) throw PreconditionError("anchor not strictly interior (sum >= 1)");

  const auto vertices = simplex_vertices(d);
  double c1 = 0.0;
  for (const auto& v : vertices) c1 = std::max(c1, (v - z0).norm());

  // sin(theta(z)) |z - z0| = dist(z0, aff(face)) for z on that face, so the
  // per-face minimum of sin(theta) is at the farthest vertex of the face.
  const auto fdist = face_distances(z0);
  double min_face_dist = *std::min_element(fdist.begin(), fdist.end());
  double sin_theta0 = 1.0;
  for (int f = 0; f < d + 1; ++f) {
    double far_vertex = 0.0;
    for (int vi = 0; vi < static_cast<int>(vertices.size()); ++vi) {
      // vertex belongs to face f when it lies on that face's hyperplane
      bool on_face = (f < d) ? vertices[static_cast<std::size_t>(vi)][f] == 0.0
                             : vertices[static_cast<std::size_t>(vi)].sum() == 1.0;
      if (on_face)
        far_vertex = std::max(far_vertex, (vertices[static_cast<std::size_t>(vi)] - z0).norm());
    }
    if (far_vertex > 0.0) sin_theta0 = std::min(sin_theta0, fdist[static_cast<std::size_t>(f)] / far_vertex);
  }

  InteriorMap m;
  m.z0 = z0;
  m.c1 = c1;
  m.c2 = sin_theta0 * min_face_dist;
  if (!(m.c2 > 0.0 && m.c2 <= m.c1)) throw PreconditionError("degenerate interior map constants");
  return m;
}

InteriorMap InteriorMap::centroid_default(int d) {
  Eigen::VectorXd z0 = Eigen::VectorXd::Constant(d, 1.0 / (d + 1));
  return for_anchor(z0);
}

Eigen::VectorXd interior_shrink(const Eigen::VectorXd& z, double a, const InteriorMap& map) {
  if (!(a > 0.0 && a < 1.0)) throw PreconditionError("shrink factor must lie in (0,1)");
  DomainA dom{static_cast<int>(z.size())};
  if (!dom.contains(z)) throw OutOfDomainError("interior_shrink input outside A");
  return z + a * (map.z0 - z);
}

Model::Model(std::string name, std::vector<std::string> compartments,
             std::map<std::string, double> params, std::vector<Transition> transitions)
    : name_(std::move(name)),
      compartments_(std::move(compartments)),
      params_(std::move(params)),
      transitions_(std::move(transitions)) {
  if (compartments_.empty()) throw ModelFormatError("model needs d >= 1 compartments");
  if (transitions_.empty()) throw ModelFormatError("model needs k >= 1 transitions");
  const int dd = d();
  for (const auto& t : transitions_) {
    if (t.jump.size() != dd)
      throw ModelFormatError("transition '" + t.name + "': jump length != d");
    if (t.jump.isZero())
      throw ModelFormatError("transition '" + t.name + "': zero jump vector");
    for (int i = 0; i < dd; ++i)
      if (std::abs(t.jump[i]) > 1)
        throw ModelFormatError("transition '" + t.name + "': |jump component| > 1");
  }
  bound_.reserve(transitions_.size());
  for (const auto& t : transitions_) bound_.push_back(t.rate.bind(params_));
}

double Model::rate(int j, const Eigen::VectorXd& z) const {
  return bound_[static_cast<std::size_t>(j)].eval(z);
}

void Model::rates(const Eigen::VectorXd& z, Eigen::VectorXd& out) const {
  out.resize(k());
  for (int j = 0; j < k(); ++j) out[j] = bound_[static_cast<std::size_t>(j)].eval(z);
}

Eigen::VectorXd Model::rate_grad(int j, const Eigen::VectorXd& z) const {
  return bound_[static_cast<std::size_t>(j)].grad(z);
}

Model Model::with_params(std::map<std::string, double> params) const {
  return Model(name_, compartments_, std::move(params), transitions_);
}

int Model::compartment_index(const std::string& name) const {
  auto it = std::find(compartments_.begin(), compartments_.end(), name);
  return it == compartments_.end() ? -1 : static_cast<int>(it - compartments_.begin());
}

Model Model::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("invalid JSON: ") + e.what());
  }
  try {
    std::string name = doc.value("name", "unnamed");
    std::vector<std::string> comps = doc.at("compartments").get<std::vector<std::string>>();
    std::map<std::string, double> params;
    if (doc.contains("params")) params = doc.at("params").get<std::map<std::string, double>>();
    std::vector<std::string> param_names;
    for (const auto& [k, v] : params) param_names.push_back(k);

    std::vector<Transition> transitions;
    for (const auto& jt : doc.at("transitions")) {
      Transition t;
      t.name = jt.value("name", "t" + std::to_string(transitions.size()));
      std::vector<int> jump = jt.at("jump").get<std::vector<int>>();
      t.jump = Eigen::Map<Eigen::VectorXi>(jump.data(), static_cast<Eigen::Index>(jump.size()));
      t.rate = RateExpr::parse(jt.at("rate").get<std::string>(), comps, param_names);
      transitions.push_back(std::move(t));
    }
    return Model(std::move(name), std::move(comps), std::move(params), std::move(transitions));
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("missing or mistyped field: ") + e.what());
  }
}

Model Model::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string Model::to_json_text() const {
  json doc;
  doc["name"] = name_;
  doc["compartments"] = compartments_;
  doc["params"] = params_;
  json ts = json::array();
  for (const auto& t : transitions_) {
    json jt;
    jt["name"] = t.name;
    jt["jump"] = std::vector<int>(t.jump.data(), t.jump.data() + t.jump.size());
    jt["rate"] = t.rate.source();
    ts.push_back(jt);
  }
  doc["transitions"] = ts;
  return doc.dump(2);
}

void simplex_grid(int d, int resolution, const std::function<void(const Eigen::VectorXd&)>& fn) {
  Eigen::VectorXd z(d);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> rec = [&](int level, int remaining) {
    if (level == d) {
      for (int i = 0; i < d; ++i)
        z[i] = static_cast<double>(idx[static_cast<std::size_t>(i)]) / resolution;
      fn(z);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      idx[static_cast<std::size_t>(level)] = v;
      rec(level + 1, remaining - v);
    }
  };
  rec(0, resolution);
}

AssumptionReport validate_model(const Model& model, int resolution) {
  if (resolution < 1) throw PreconditionError("grid resolution must be >= 1");
  AssumptionReport rep;
  rep.grid_resolution = resolution;
  const int d = model.d();
  const int k = model.k();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const DomainA dom{d};

  bool negative_seen = false;
  double worst_negative = 0.0;
  std::string negative_where;

  simplex_grid(d, resolution, [&](const Eigen::VectorXd& z) {
    for (int j = 0; j < k; ++j) {
      const double b = model.rate(j, z);
      if (b < -kTolRate && b < worst_negative) {
        negative_seen = true;
        worst_negative = b;
        std::ostringstream os;
        os << "NegativeRate: transition '" << model.transition(j).name << "' = " << b << " at z=(";
        for (int i = 0; i < d; ++i) os << (i ? "," : "") << z[i];
        os << ")";
        negative_where = os.str();
      }
      rep.sigma = std::max(rep.sigma, b);
      rep.lipschitz_C = std::max(rep.lipschitz_C, model.rate_grad(j, z).norm() * sqrt_d);

      // rates must vanish wherever a jump of size 1/N_ref would exit A
      Eigen::VectorXd stepped = z + model.transition(j).jump.cast<double>() / kNRefBoundary;
      if (!dom.contains(stepped) && b > kTolRate) {
        if (rep.boundary_consistent) {
          std::ostringstream os;
          os << "BoundaryInconsistent: transition '" << model.transition(j).name << "' has rate "
             << b << " at z=(";
          for (int i = 0; i < d; ++i) os << (i ? "," : "") << z[i];
          os << ") where the jump exits A";
          rep.violations.push_back(os.str());
        }
        rep.boundary_consistent = false;
      }
    }
  });
  if (negative_seen) rep.violations.push_back(negative_where);

  const InteriorMap map = InteriorMap::centroid_default(d);
  for (double a : {0.5, 0.1, 0.01}) {
    rep.C_a_samples[a] = min_rate_on_Ba(model, a, map, resolution).value;
  }
  return rep;
}

MinRateResult min_rate_on_Ba(const Model& model, double a, const InteriorMap& map, int resolution) {
  if (!(a > 0.0)) throw PreconditionError("a must be positive");
  const DomainA dom{model.d()};
  const double threshold = map.c2 * a;
  MinRateResult res;
  res.value = std::numeric_limits<double>::infinity();
  bool any = false;
  simplex_grid(model.d(), resolution, [&](const Eigen::VectorXd& z) {
    if (dom.boundary_distance(z) < threshold) return;
    any = true;
    for (int j = 0; j < model.k(); ++j) res.value = std::min(res.value, model.rate(j, z));
  });
  if (!any) {
    res.value = 0.0;
    res.degenerate = true;
  }
  return res;
}

}  // namespace jumpldp
