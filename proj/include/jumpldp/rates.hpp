#ifndef JUMPLDP_RATES_HPP
#define JUMPLDP_RATES_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace jumpldp {

// One monomial: coef * prod z_i^var_exp[i] * prod p_j^par_exp[j].
struct RateTerm {
  double coef = 0.0;
  std::vector<int> var_exp;
  std::vector<int> par_exp;
};

// Rate polynomial with parameters bound to numbers; the fast evaluation path.
class BoundRate {
 public:
  BoundRate() = default;
  BoundRate(int dim, std::vector<std::pair<double, std::vector<int>>> terms);

  double eval(const Eigen::VectorXd& z) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& z) const;
  int dim() const { return dim_; }

 private:
  int dim_ = 0;
  std::vector<std::pair<double, std::vector<int>>> terms_;
};

// Polynomial rate expression over compartment variables and named parameters,
// kept canonical (sorted unique exponent vectors, zero coefficients dropped).
// Parameters stay symbolic until evaluation or bind().
class RateExpr {
 public:
  // Grammar:
  //   expr   := ['+'|'-'] term (('+'|'-') term)*
  //   term   := factor ('*' factor)*
  //   factor := number | ident | ident '^' posint | '(' expr ')'
  // Identifiers resolve to a compartment variable or a parameter name.
  static RateExpr parse(const std::string& text, const std::vector<std::string>& compartments,
                        const std::vector<std::string>& params, int max_degree = 6);

  double eval(const Eigen::VectorXd& z, const std::map<std::string, double>& params) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& z, const std::map<std::string, double>& params) const;

  BoundRate bind(const std::map<std::string, double>& params) const;

  // Canonical text; parse(unparse()) reproduces the same canonical form.
  std::string unparse() const;

  const std::string& source() const { return source_; }
  const std::vector<RateTerm>& terms() const { return terms_; }
  const std::vector<std::string>& compartments() const { return compartments_; }
  const std::vector<std::string>& param_names() const { return param_names_; }
  int dim() const { return static_cast<int>(compartments_.size()); }
  int degree() const;  // total degree in compartment variables
  bool is_zero() const { return terms_.empty(); }

 private:
  std::string source_;
  std::vector<std::string> compartments_;
  std::vector<std::string> param_names_;
  std::vector<RateTerm> terms_;

  std::vector<double> bind_param_values(const std::map<std::string, double>& params) const;
};

// Spec-shaped free functions.
RateExpr parse_rate(const std::string& text, const std::vector<std::string>& compartments,
                    const std::vector<std::string>& params);
double eval_rate(const RateExpr& expr, const Eigen::VectorXd& z,
                 const std::map<std::string, double>& params);
Eigen::VectorXd grad_rate(const RateExpr& expr, const Eigen::VectorXd& z,
                          const std::map<std::string, double>& params);

}  // namespace jumpldp

#endif
