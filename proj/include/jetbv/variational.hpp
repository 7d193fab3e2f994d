#pragma once

#include "jetbv/jet.hpp"

#include <map>
#include <utility>
#include <vector>

namespace jetbv {

/// A lagrangian variational problem: independent variables with a constant
/// diagonal metric, a generator set and an even, ghost-free density.
class Theory {
public:
  /// Validates: metric length equals the variable count, entries nonzero,
  /// lagrangian graded (even, gh 0, afn 0) or zero.
  Theory(SignaturePtr signature, std::vector<Rational> metric, Expression lagrangian);

  const SignaturePtr& signature() const { return signature_; }
  const std::vector<Rational>& metric() const { return metric_; }
  const Expression& lagrangian() const { return lagrangian_; }

  /// Components of all generators with the given role, declaration order.
  std::vector<FieldComponent> components(Role role) const;
  std::vector<FieldComponent> field_components() const { return components(Role::field); }

private:
  SignaturePtr signature_;
  std::vector<Rational> metric_;
  Expression lagrangian_;
};

/// A density regarded modulo total divergences; equality is ibp_equal.
struct LocalFunctional {
  Density density;

  explicit LocalFunctional(Expression e) : density(std::move(e)) {}
  const Expression& expr() const { return density.expr; }
  friend bool operator==(const LocalFunctional& a, const LocalFunctional& b) {
    return ibp_equal(a.density, b.density);
  }
};

/// Linear differential operator: per field component, multi-index ->
/// coefficient. Applied to the EL system as sum N^{a,alpha} D_alpha(EL_a).
struct NoetherOperator {
  std::map<FieldComponent, std::map<MultiIndex, Expression>> coefficients;

  void add(const FieldComponent& fc, const MultiIndex& alpha, const Expression& c);
  bool empty() const;
};

/// Polynomial values (in independent variables and parameters) for field
/// components, plus numeric parameter values. Missing components are zero.
struct Section {
  std::map<FieldComponent, Expression> values;
  std::map<GenId, Rational> parameters;
};

/// Closed integration interval per independent variable position.
using Box = std::vector<std::pair<Rational, Rational>>;

using ELSystem = std::map<FieldComponent, Expression>;

ELSystem euler_lagrange_system(const Theory& t);

bool is_symmetry(const Theory& t, const EvolutionaryVF& x);

Expression noether_residual(const Theory& t, const NoetherOperator& n);
bool is_noether_identity(const Theory& t, const NoetherOperator& n);

struct OnShellOptions {
  int max_order = 2;
  std::size_t rewrite_budget = 100000;
};

/// Rewrites e modulo the prolonged EL equations up to the given order,
/// orienting each EL_a towards its highest-ranked jet coordinate.
Expression on_shell_reduce(const Expression& e, const Theory& t, const OnShellOptions& options);
inline Expression on_shell_reduce(const Expression& e, const Theory& t, int max_order) {
  return on_shell_reduce(e, t, OnShellOptions{max_order});
}

/// Exact value of the functional on the section over the box.
Rational integrate_on_box(const LocalFunctional& f, const Section& s, const Box& box);

/// Exact integral of a polynomial in the independent variables over the box.
Rational integrate_polynomial(const Expression& p, const Box& box);

/// The expression obtained by evaluating every jet coordinate of e on the
/// section (a polynomial in independent variables and parameters).
Expression evaluate_on_section(const Expression& e, const Section& s);

} // namespace jetbv
