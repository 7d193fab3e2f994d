#pragma once

#include "jetbv/expression.hpp"

#include <map>
#include <optional>
#include <vector>

namespace jetbv {

/// A density: a top-degree horizontal form written in the coordinates of a
/// signature. Its class modulo total divergences is a local functional.
struct Density {
  Expression expr;

  explicit Density(Expression e);
  const SignaturePtr& signature() const { return expr.signature(); }
};

/// (generator, component) address of a field, ghost or antifield.
struct FieldComponent {
  GenId gen = 0;
  Component component;

  Symbol symbol(const MultiIndex& alpha = {}) const { return {gen, component, alpha}; }
  friend bool operator==(const FieldComponent&, const FieldComponent&) = default;
  friend auto operator<=>(const FieldComponent&, const FieldComponent&) = default;
};

/// Evolutionary vector field: one characteristic per field component.
struct EvolutionaryVF {
  std::map<FieldComponent, Expression> characteristics;
};

/// D_i e: derivative along the independent variable at `position`.
Expression total_derivative(const Expression& e, std::size_t position);
/// D_i e for a variable given by generator id; throws UnknownVariableError.
Expression total_derivative_by_id(const Expression& e, GenId variable);
/// D_alpha e.
Expression total_derivative(const Expression& e, const MultiIndex& alpha);

/// sum_alpha (-1)^|alpha| D_alpha (d e / d u_alpha), graded partials on `side`.
Expression variational_derivative(const Density& d, const FieldComponent& target, Side side = Side::left);

/// All field/ghost/antifield components occurring in e.
std::vector<FieldComponent> occurring_components(const Expression& e);

/// True iff every variational derivative of d vanishes.
bool is_total_divergence(const Density& d);

/// F with D_t F = d in one independent variable (keyed by the variable's
/// generator id). Throws NotADivergenceError / UnsupportedDimensionError.
std::map<GenId, Expression> divergence_witness(const Density& d);

bool ibp_equal(const Density& a, const Density& b);

/// pr X(e) = sum_{a,alpha} D_alpha(Q^a) * d_left e / d u^a_alpha.
/// Characteristics of field-role components occurring in e are mandatory;
/// other components without a characteristic are left invariant.
Expression prolong_apply(const EvolutionaryVF& x, const Expression& e);

/// The uniform grading shift of X's characteristics relative to their
/// fields (nullopt when X has only zero characteristics). Throws
/// GradingError when the shift is not uniform.
std::optional<Grading> characteristic_shift(const SignaturePtr& sig, const EvolutionaryVF& x);

} // namespace jetbv
