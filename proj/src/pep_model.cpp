#include "dcpep/pep_model.hpp"

#include <cmath>
#include <sstream>

namespace dcpep {

namespace {

[[noreturn]] void fail_parameter(const std::string& what) {
  throw ParameterError(what);
}

std::string num(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

CurvatureClass::CurvatureClass(double mu_, double L_) : mu(mu_), L(L_) {
  if (!std::isfinite(mu) || !std::isfinite(L) || mu < 0.0 || !(mu < L)) {
    fail_parameter("curvature class requires 0 <= mu < L < inf, got mu=" +
                   num(mu) + ", L=" + num(L));
  }
}

MethodConfig::MethodConfig(int N_, double alpha_) : N(N_), alpha(alpha_) {
  if (N < 1) fail_parameter("method requires N >= 1, got N=" + std::to_string(N));
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0) {
    fail_parameter("method requires alpha in [0,1], got alpha=" + num(alpha));
  }
}

std::string PointLabel::name() const {
  return (kind == Kind::X ? "x" : "y") + std::to_string(index);
}

std::vector<PointLabel> point_set(int N) {
  if (N < 1) fail_parameter("point set requires N >= 1");
  std::vector<PointLabel> points;
  points.reserve(2 * N + 1);
  for (int k = 1; k <= N + 1; ++k) points.push_back(PointLabel::x(k));
  for (int k = 1; k <= N; ++k) points.push_back(PointLabel::y(k));
  return points;
}

ConstraintLabel ConstraintLabel::interp(int func, PointLabel u, PointLabel v) {
  if (func != 1 && func != 2) fail_parameter("interp label requires func in {1,2}");
  if (u == v) fail_parameter("interp label requires u != v");
  return {Kind::Interp, func, u, v, 0};
}

ConstraintLabel ConstraintLabel::grad_link(int k) {
  if (k < 1) fail_parameter("grad link requires k >= 1");
  return {Kind::GradLink, 0, {}, {}, k};
}

ConstraintLabel ConstraintLabel::step_link(int k) {
  if (k < 1) fail_parameter("step link requires k >= 1");
  return {Kind::StepLink, 0, {}, {}, k};
}

ConstraintLabel ConstraintLabel::descent_lb(PointLabel u) {
  return {Kind::DescentLB, 0, u, {}, 0};
}

ConstraintLabel ConstraintLabel::init_gap() { return {Kind::InitGap, 0, {}, {}, 0}; }

ConstraintLabel ConstraintLabel::pl(PointLabel u) { return {Kind::PL, 0, u, {}, 0}; }

ConstraintLabel ConstraintLabel::obj_epi(int k) {
  if (k < 1) fail_parameter("epigraph label requires k >= 1");
  return {Kind::ObjEpi, 0, {}, {}, k};
}

std::string ConstraintLabel::name() const {
  switch (kind) {
    case Kind::Interp:
      return "interp" + std::to_string(func) + "[" + u.name() + "," + v.name() + "]";
    case Kind::GradLink:
      return "gradlink[" + std::to_string(k) + "]";
    case Kind::StepLink:
      return "steplink[" + std::to_string(k) + "]";
    case Kind::DescentLB:
      return "descent[" + u.name() + "]";
    case Kind::InitGap:
      return "initgap";
    case Kind::PL:
      return "pl[" + u.name() + "]";
    case Kind::ObjEpi:
      return "objepi[" + std::to_string(k) + "]";
  }
  throw InternalError("unreachable constraint kind");
}

PointLabel parse_point_label(const std::string& text) {
  if (text.size() < 2 || (text[0] != 'x' && text[0] != 'y')) {
    throw IoError("malformed point label: '" + text + "'");
  }
  int index = 0;
  try {
    size_t used = 0;
    index = std::stoi(text.substr(1), &used);
    if (used + 1 != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw IoError("malformed point label: '" + text + "'");
  }
  if (index < 1) throw IoError("point label index must be >= 1: '" + text + "'");
  return text[0] == 'x' ? PointLabel::x(index) : PointLabel::y(index);
}

namespace {

// Splits "name[arg1,arg2]" into name and args; args empty when no bracket.
bool split_bracket(const std::string& text, std::string& head,
                   std::vector<std::string>& args) {
  args.clear();
  auto open = text.find('[');
  if (open == std::string::npos) {
    head = text;
    return true;
  }
  if (text.back() != ']') return false;
  head = text.substr(0, open);
  std::string inner = text.substr(open + 1, text.size() - open - 2);
  size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    if (comma == std::string::npos) {
      args.push_back(inner.substr(start));
      break;
    }
    args.push_back(inner.substr(start, comma - start));
    start = comma + 1;
  }
  return true;
}

int parse_index(const std::string& text) {
  try {
    size_t used = 0;
    int value = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw IoError("malformed constraint index: '" + text + "'");
  }
}

}  // namespace

ConstraintLabel parse_constraint_label(const std::string& text) {
  std::string head;
  std::vector<std::string> args;
  if (!split_bracket(text, head, args)) {
    throw IoError("malformed constraint label: '" + text + "'");
  }
  if (head == "interp1" || head == "interp2") {
    if (args.size() != 2) throw IoError("interp label needs two points: '" + text + "'");
    return ConstraintLabel::interp(head == "interp1" ? 1 : 2,
                                   parse_point_label(args[0]),
                                   parse_point_label(args[1]));
  }
  if (head == "gradlink" && args.size() == 1)
    return ConstraintLabel::grad_link(parse_index(args[0]));
  if (head == "steplink" && args.size() == 1)
    return ConstraintLabel::step_link(parse_index(args[0]));
  if (head == "descent" && args.size() == 1)
    return ConstraintLabel::descent_lb(parse_point_label(args[0]));
  if (head == "initgap" && args.empty()) return ConstraintLabel::init_gap();
  if (head == "pl" && args.size() == 1)
    return ConstraintLabel::pl(parse_point_label(args[0]));
  if (head == "objepi" && args.size() == 1)
    return ConstraintLabel::obj_epi(parse_index(args[0]));
  throw IoError("unknown constraint label: '" + text + "'");
}

PEPProblem build_pep(const CurvatureClass& class1, const CurvatureClass& class2,
                     const MethodConfig& method, double delta,
                     std::optional<double> pl_modulus) {
  CurvatureClass c1(class1.mu, class1.L);
  CurvatureClass c2(class2.mu, class2.L);
  MethodConfig m(method.N, method.alpha);
  if (!std::isfinite(delta) || delta <= 0.0) {
    fail_parameter("build_pep requires delta > 0, got " + num(delta));
  }
  if (!(c1.L > c2.mu)) {
    fail_parameter("build_pep requires L1 > mu2 (descent-lemma denominator), got L1=" +
                   num(c1.L) + ", mu2=" + num(c2.mu));
  }
  if (pl_modulus && (!std::isfinite(*pl_modulus) || *pl_modulus <= 0.0)) {
    fail_parameter("build_pep requires pl_modulus > 0, got " + num(*pl_modulus));
  }

  PEPProblem problem;
  problem.class1 = c1;
  problem.class2 = c2;
  problem.method = m;
  problem.delta = delta;
  problem.pl_modulus = pl_modulus;
  problem.points = point_set(m.N);

  auto& rows = problem.constraints;
  for (int func = 1; func <= 2; ++func) {
    for (const auto& u : problem.points) {
      for (const auto& v : problem.points) {
        if (u == v) continue;
        rows.push_back(ConstraintLabel::interp(func, u, v));
      }
    }
  }
  for (int k = 1; k <= m.N; ++k) rows.push_back(ConstraintLabel::grad_link(k));
  for (int k = 1; k <= m.N; ++k) rows.push_back(ConstraintLabel::step_link(k));
  for (const auto& u : problem.points) rows.push_back(ConstraintLabel::descent_lb(u));
  rows.push_back(ConstraintLabel::init_gap());
  if (pl_modulus) {
    for (const auto& u : problem.points) rows.push_back(ConstraintLabel::pl(u));
  }
  for (int k = 1; k <= m.N + 1; ++k) rows.push_back(ConstraintLabel::obj_epi(k));
  return problem;
}

double interpolation_residual(const DiscreteTriple& i, const DiscreteTriple& j,
                              const CurvatureClass& cls) {
  CurvatureClass checked(cls.mu, cls.L);
  if (i.point.size() != i.grad.size() || j.point.size() != j.grad.size() ||
      i.point.size() != j.point.size()) {
    throw DimensionMismatch("interpolation residual requires matching dimensions");
  }
  const double kap = checked.kappa();
  const Vector dg = i.grad - j.grad;
  const Vector dx = i.point - j.point;
  const double quad = (1.0 / (2.0 * (1.0 - kap))) *
                      (dg.squaredNorm() / checked.L + checked.mu * dx.squaredNorm() -
                       (2.0 * checked.mu / checked.L) * dg.dot(dx));
  return quad - i.value + j.value + j.grad.dot(dx);
}

double descent_upper_bound(double f_value, double grad_diff_norm_sq, double L1,
                           double mu2) {
  if (!(L1 > mu2)) {
    fail_parameter("descent bound requires L1 > mu2, got L1=" + num(L1) +
                   ", mu2=" + num(mu2));
  }
  return f_value - grad_diff_norm_sq / (2.0 * (L1 - mu2));
}

double pl_residual(double f_value, double grad_diff_norm_sq, double eta) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    fail_parameter("pl residual requires eta > 0, got " + num(eta));
  }
  return f_value - grad_diff_norm_sq / (2.0 * eta);
}

}  // namespace dcpep
