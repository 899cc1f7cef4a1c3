#ifndef JUMPLDP_MODEL_HPP
#define JUMPLDP_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "jumpldp/constants.hpp"
#include "jumpldp/rates.hpp"

namespace jumpldp {

// Simplex domain A = {z in R_+^d : sum z_i <= 1}.
struct DomainA {
  int d = 0;

  bool contains(const Eigen::VectorXd& z, double tol = kTolA) const;
  // min(z_1, ..., z_d, (1 - sum z)/sqrt(d)); negative outside A.
  double boundary_distance(const Eigen::VectorXd& z) const;
  // Clip negative coordinates to 0, rescale if the sum exceeds 1.
  // *adjusted is set when the point moved.
  Eigen::VectorXd project(const Eigen::VectorXd& z, bool* adjusted = nullptr) const;
};

// Phi_a(z) = z + a (z0 - z) with |z - z^a| <= c1 a and dist(z^a, dA) >= c2 a.
struct InteriorMap {
  Eigen::VectorXd z0;
  double c1 = 0.0;
  double c2 = 0.0;

  // z0 at the simplex centroid; c1, c2 from the vertex/face geometry.
  static InteriorMap centroid_default(int d);
  // Validates z0 strictly interior and computes c1, c2 for it.
  static InteriorMap for_anchor(const Eigen::VectorXd& z0);
};

Eigen::VectorXd interior_shrink(const Eigen::VectorXd& z, double a, const InteriorMap& map);

struct Transition {
  std::string name;
  Eigen::VectorXi jump;  // entries in {-1, 0, +1}
  RateExpr rate;
};

// Compartmental model; immutable after construction and safe to share.
class Model {
 public:
  Model(std::string name, std::vector<std::string> compartments,
        std::map<std::string, double> params, std::vector<Transition> transitions);

  const std::string& name() const { return name_; }
  int d() const { return static_cast<int>(compartments_.size()); }
  int k() const { return static_cast<int>(transitions_.size()); }
  const std::vector<std::string>& compartments() const { return compartments_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(int j) const { return transitions_[static_cast<std::size_t>(j)]; }
  DomainA domain() const { return DomainA{d()}; }

  double rate(int j, const Eigen::VectorXd& z) const;
  void rates(const Eigen::VectorXd& z, Eigen::VectorXd& out) const;
  Eigen::VectorXd rate_grad(int j, const Eigen::VectorXd& z) const;

  Model with_params(std::map<std::string, double> params) const;

  int compartment_index(const std::string& name) const;  // -1 when absent

  static Model from_json_text(const std::string& text);
  static Model load_file(const std::string& path);
  std::string to_json_text() const;

 private:
  std::string name_;
  std::vector<std::string> compartments_;
  std::map<std::string, double> params_;
  std::vector<Transition> transitions_;
  std::vector<BoundRate> bound_;  // parameters substituted, for fast evaluation
};

struct AssumptionReport {
  double sigma = 0.0;        // sup of all rates on the grid
  double lipschitz_C = 0.0;  // grid max of |grad beta_j| * sqrt(d)
  std::map<double, double> C_a_samples;
  bool boundary_consistent = true;
  std::vector<std::string> violations;
  int grid_resolution = 0;
};

// Grid-based bounds for the rate functions plus the boundary-consistency
// check (rates must vanish where a jump of size 1/N_ref would exit A).
AssumptionReport validate_model(const Model& model, int resolution = kGridResolution);

struct MinRateResult {
  double value = 0.0;
  bool degenerate = false;  // B^a was empty
};

// C_a = inf over B^a = {z : dist(z, dA) >= c2 a} of the smallest rate.
MinRateResult min_rate_on_Ba(const Model& model, double a, const InteriorMap& map,
                             int resolution = kGridResolution);

// Visits every lattice point of A with the given points-per-edge resolution.
void simplex_grid(int d, int resolution, const std::function<void(const Eigen::VectorXd&)>& fn);

}  // namespace jumpldp

#endif
