#include "jumpldp/rates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "jumpldp/constants.hpp"
#include "jumpldp/errors.hpp"

namespace jumpldp {

namespace {

// Polynomial in combined (variable, parameter) exponents, used while parsing.
struct Poly {
  std::vector<RateTerm> terms;
};

RateTerm make_const(double c, std::size_t nv, std::size_t np) {
  RateTerm t;
  t.coef = c;
  t.var_exp.assign(nv, 0);
  t.par_exp.assign(np, 0);
  return t;
}

void canonicalize(std::vector<RateTerm>& terms) {
  std::sort(terms.begin(), terms.end(), [](const RateTerm& a, const RateTerm& b) {
    if (a.var_exp != b.var_exp) return a.var_exp < b.var_exp;
    return a.par_exp < b.par_exp;
  });
  std::vector<RateTerm> merged;
  for (auto& t : terms) {
    if (!merged.empty() && merged.back().var_exp == t.var_exp && merged.back().par_exp == t.par_exp) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(std::move(t));
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const RateTerm& t) { return t.coef == 0.0; }),
               merged.end());
  terms = std::move(merged);
}

Poly poly_add(Poly a, const Poly& b, double sign) {
  for (auto t : b.terms) {
    t.coef *= sign;
    a.terms.push_back(std::move(t));
  }
  canonicalize(a.terms);
  return a;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& ta : a.terms) {
    for (const auto& tb : b.terms) {
      RateTerm t;
      t.coef = ta.coef * tb.coef;
      t.var_exp.resize(ta.var_exp.size());
      t.par_exp.resize(ta.par_exp.size());
      for (std::size_t i = 0; i < t.var_exp.size(); ++i) t.var_exp[i] = ta.var_exp[i] + tb.var_exp[i];
      for (std::size_t i = 0; i < t.par_exp.size(); ++i) t.par_exp[i] = ta.par_exp[i] + tb.par_exp[i];
      r.terms.push_back(std::move(t));
    }
  }
  canonicalize(r.terms);
  return r;
}

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& compartments,
         const std::vector<std::string>& params, int max_degree)
      : text_(text), comps_(compartments), pars_(params), max_degree_(max_degree) {}

  Poly run() {
    skip_ws();
    if (at_end()) throw RateSyntaxError("empty expression", pos_);
    Poly p = expr();
    skip_ws();
    if (!at_end()) throw RateSyntaxError("unexpected trailing input", pos_);
    return p;
  }

 private:
  const std::string& text_;
  const std::vector<std::string>& comps_;
  const std::vector<std::string>& pars_;
  int max_degree_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Poly expr() {
    skip_ws();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      if (peek() == '-') sign = -1.0;
      ++pos_;
    }
    Poly acc = term();
    if (sign < 0) {
      Poly zero;
      acc = poly_add(zero, acc, -1.0);
    }
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos_;
        acc = poly_add(acc, term(), c == '+' ? 1.0 : -1.0);
      } else {
        return acc;
      }
    }
  }

  Poly term() {
    Poly acc = factor();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '*') {
        ++pos_;
        acc = poly_mul(acc, factor());
      } else if (c == '/') {
        throw DivisionUnsupportedError(pos_);
      } else {
        return acc;
      }
    }
  }

  Poly factor() {
    skip_ws();
    if (at_end()) throw RateSyntaxError("expected factor", pos_);
    char c = peek();
    if (c == '(') {
      ++pos_;
      Poly inner = expr();
      skip_ws();
      if (peek() != ')') throw RateSyntaxError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (c == '/') throw DivisionUnsupportedError(pos_);
    throw RateSyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  Poly number() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (peek() == '.') {
      ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t mark = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek()))) {
        pos_ = mark;  // 'e' belongs to an identifier-looking token; reject below
        throw RateSyntaxError("malformed exponent", pos_);
      }
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    const std::string tok = text_.substr(start, pos_ - start);
    if (tok == ".") throw RateSyntaxError("malformed number", start);
    Poly p;
    p.terms.push_back(make_const(std::stod(tok), comps_.size(), pars_.size()));
    return p;
  }

  Poly identifier() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    int power = 1;
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      skip_ws();
      std::size_t pstart = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == pstart) throw RateSyntaxError("expected positive integer exponent", pos_);
      power = std::stoi(text_.substr(pstart, pos_ - pstart));
      if (power < 1) throw RateSyntaxError("exponent must be >= 1", pstart);
    }
    if (power > max_degree_)
      throw RateSyntaxError("exponent exceeds maximum degree " + std::to_string(max_degree_), start);

    RateTerm t = make_const(1.0, comps_.size(), pars_.size());
    auto vi = std::find(comps_.begin(), comps_.end(), name);
    if (vi != comps_.end()) {
      t.var_exp[static_cast<std::size_t>(vi - comps_.begin())] = power;
    } else {
      auto pi = std::find(pars_.begin(), pars_.end(), name);
      if (pi == pars_.end()) throw UnknownIdentifierError(name);
      t.par_exp[static_cast<std::size_t>(pi - pars_.begin())] = power;
    }
    Poly p;
    p.terms.push_back(std::move(t));
    return p;
  }
};

double pow_int(double x, int n) {
  double r = 1.0;
  while (n-- > 0) r *= x;
  return r;
}

}  // namespace

BoundRate::BoundRate(int dim, std::vector<std::pair<double, std::vector<int>>> terms)
    : dim_(dim), terms_(std::move(terms)) {}

double BoundRate::eval(const Eigen::VectorXd& z) const {
  double acc = 0.0;
  for (const auto& [c, e] : terms_) {
    double m = c;
    for (int i = 0; i < dim_; ++i)
      if (e[static_cast<std::size_t>(i)] > 0) m *= pow_int(z[i], e[static_cast<std::size_t>(i)]);
    acc += m;
  }
  return acc;
}

Eigen::VectorXd BoundRate::grad(const Eigen::VectorXd& z) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
  for (const auto& [c, e] : terms_) {
    for (int i = 0; i < dim_; ++i) {
      int ei = e[static_cast<std::size_t>(i)];
      if (ei == 0) continue;
      double m = c * ei * pow_int(z[i], ei - 1);
      for (int l = 0; l < dim_; ++l) {
        if (l == i) continue;
        int el = e[static_cast<std::size_t>(l)];
        if (el > 0) m *= pow_int(z[l], el);
      }
      g[i] += m;
    }
  }
  return g;
}

RateExpr RateExpr::parse(const std::string& text, const std::vector<std::string>& compartments,
                         const std::vector<std::string>& params, int max_degree) {
  if (text.empty()) throw RateSyntaxError("empty expression", 0);
  Parser parser(text, compartments, params, max_degree);
  Poly p = parser.run();
  RateExpr e;
  e.source_ = text;
  e.compartments_ = compartments;
  e.param_names_ = params;
  e.terms_ = std::move(p.terms);
  if (e.degree() > max_degree)
    throw RateSyntaxError("polynomial degree " + std::to_string(e.degree()) +
                              " exceeds maximum " + std::to_string(max_degree),
                          0);
  return e;
}

std::vector<double> RateExpr::bind_param_values(const std::map<std::string, double>& params) const {
  std::vector<double> vals(param_names_.size(), 0.0);
  std::vector<bool> needed(param_names_.size(), false);
  for (const auto& t : terms_)
    for (std::size_t i = 0; i < t.par_exp.size(); ++i)
      if (t.par_exp[i] > 0) needed[i] = true;
  for (std::size_t i = 0; i < param_names_.size(); ++i) {
    auto it = params.find(param_names_[i]);
    if (it == params.end()) {
      if (needed[i]) throw UnboundParameterError(param_names_[i]);
      continue;
    }
    vals[i] = it->second;
  }
  return vals;
}

BoundRate RateExpr::bind(const std::map<std::string, double>& params) const {
  const std::vector<double> vals = bind_param_values(params);
  std::vector<std::pair<double, std::vector<int>>> bound;
  for (const auto& t : terms_) {
    double c = t.coef;
    for (std::size_t i = 0; i < t.par_exp.size(); ++i)
      if (t.par_exp[i] > 0) c *= pow_int(vals[i], t.par_exp[i]);
    bound.emplace_back(c, t.var_exp);
  }
  // merge terms that collapsed to the same variable exponents
  std::sort(bound.begin(), bound.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  std::vector<std::pair<double, std::vector<int>>> merged;
  for (auto& t : bound) {
    if (!merged.empty() && merged.back().second == t.second)
      merged.back().first += t.first;
    else
      merged.push_back(std::move(t));
  }
  return BoundRate(dim(), std::move(merged));
}

double RateExpr::eval(const Eigen::VectorXd& z, const std::map<std::string, double>& params) const {
  return bind(params).eval(z);
}

Eigen::VectorXd RateExpr::grad(const Eigen::VectorXd& z,
                               const std::map<std::string, double>& params) const {
  return bind(params).grad(z);
}

int RateExpr::degree() const {
  int deg = 0;
  for (const auto& t : terms_) {
    int d = 0;
    for (int e : t.var_exp) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

std::string RateExpr::unparse() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& t : terms_) {
    double c = t.coef;
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    out << std::abs(c);
    for (std::size_t i = 0; i < t.par_exp.size(); ++i) {
      if (t.par_exp[i] == 0) continue;
      out << "*" << param_names_[i];
      if (t.par_exp[i] > 1) out << "^" << t.par_exp[i];
    }
    for (std::size_t i = 0; i < t.var_exp.size(); ++i) {
      if (t.var_exp[i] == 0) continue;
      out << "*" << compartments_[i];
      if (t.var_exp[i] > 1) out << "^" << t.var_exp[i];
    }
  }
  return out.str();
}

RateExpr parse_rate(const std::string& text, const std::vector<std::string>& compartments,
                    const std::vector<std::string>& params) {
  return RateExpr::parse(text, compartments, params, kMaxPolyDegree);
}

double eval_rate(const RateExpr& expr, const Eigen::VectorXd& z,
                 const std::map<std::string, double>& params) {
  return expr.eval(z, params);
}

Eigen::VectorXd grad_rate(const RateExpr& expr, const Eigen::VectorXd& z,
                          const std::map<std::string, double>& params) {
  return expr.grad(z, params);
}

}  // namespace jumpldp
