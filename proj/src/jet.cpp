#include "jetbv/jet.hpp"

#include "jetbv/error.hpp"

#include <set>

namespace jetbv {

Density::Density(Expression e) : expr(std::move(e)) {
  if (!expr.signature()) throw GeneratorMismatchError("a density needs a signature");
}

Expression total_derivative(const Expression& e, std::size_t position) {
  const auto& sig = e.signature();
  if (!sig) return Expression(Rational(0));
  if (position >= sig->variable_count())
    throw UnknownVariableError("no independent variable at position " + std::to_string(position));
  return apply_derivation(e, false, [&](const Symbol& s) -> Expression {
    const auto& spec = sig->spec(s.gen);
    switch (spec.role) {
    case Role::independent_variable:
      return Expression(Rational(sig->variable_position(s.gen) == static_cast<int>(position) ? 1 : 0), sig);
    case Role::parameter:
      return Expression(Rational(0), sig);
    default:
      return Expression::symbol(sig, {s.gen, s.component, s.derivatives.plus(position)});
    }
  });
}

Expression total_derivative_by_id(const Expression& e, GenId variable) {
  const auto& sig = e.signature();
  if (!sig || variable >= sig->size() || sig->variable_position(variable) < 0)
    throw UnknownVariableError("not an independent variable");
  return total_derivative(e, static_cast<std::size_t>(sig->variable_position(variable)));
}

Expression total_derivative(const Expression& e, const MultiIndex& alpha) {
  Expression r = e;
  for (std::size_t v = 0; v < kMaxVariables; ++v)
    for (int k = 0; k < alpha[v] && !r.is_zero(); ++k) r = total_derivative(r, v);
  return r;
}

Expression variational_derivative(const Density& d, const FieldComponent& target, Side side) {
  const auto& sig = d.signature();
  if (target.gen >= sig->size() || !sig->is_jet(target.gen))
    throw UnknownGeneratorError("variational derivative with respect to a non-field generator");
  if (!sig->valid_component(target.gen, target.component))
    throw UnknownGeneratorError("component out of range for '" + sig->spec(target.gen).name + "'");
  Expression el(Rational(0), sig);
  for (const auto& s : d.expr.symbols()) {
    if (s.gen != target.gen || s.component != target.component) continue;
    Expression p = total_derivative(partial_derivative(d.expr, s, side), s.derivatives);
    if (s.derivatives.order() % 2 == 1)
      el -= p;
    else
      el += p;
  }
  return el;
}

std::vector<FieldComponent> occurring_components(const Expression& e) {
  std::set<FieldComponent> out;
  const auto& sig = e.signature();
  for (const auto& s : e.symbols())
    if (sig->is_jet(s.gen)) out.insert({s.gen, s.component});
  return {out.begin(), out.end()};
}

bool is_total_divergence(const Density& d) {
  if (d.signature()->variable_count() == 0)
    throw ZeroVariablesError("divergence test needs at least one independent variable");
  for (const auto& fc : occurring_components(d.expr))
    if (!variational_derivative(d, fc).is_zero()) return false;
  return true;
}

namespace {

int jet_degree(const SignaturePtr& sig, const Monomial& m) {
  int deg = static_cast<int>(m.odd.size());
  for (const auto& f : m.even)
    if (sig->is_jet(f.symbol.gen)) deg += f.exponent;
  return deg;
}

// Antiderivative in the single variable of a polynomial in that variable and
// the parameters.
Expression base_antiderivative(const SignaturePtr& sig, const std::vector<Monomial>& terms) {
  const GenId t = sig->variable(0);
  std::vector<Monomial> out;
  for (Monomial m : terms) {
    auto it = std::find_if(m.even.begin(), m.even.end(), [&](const Factor& f) { return f.symbol.gen == t; });
    if (it == m.even.end()) {
      m.even.push_back({Symbol{t, {}, {}}, 1});
      std::sort(m.even.begin(), m.even.end(), [](const Factor& a, const Factor& b) { return a.symbol < b.symbol; });
    } else {
      it->exponent += 1;
      m.coefficient /= it->exponent;
    }
    out.push_back(std::move(m));
  }
  return Expression::from_monomials(sig, std::move(out));
}

} // namespace

std::map<GenId, Expression> divergence_witness(const Density& d) {
  const auto& sig = d.signature();
  if (sig->variable_count() == 0)
    throw ZeroVariablesError("divergence witness needs an independent variable");
  if (sig->variable_count() != 1)
    throw UnsupportedDimensionError("divergence witnesses are only constructed in one independent variable");
  if (!is_total_divergence(d)) throw NotADivergenceError("density is not a total divergence");

  // Split by degree in the jet coordinates.
  std::map<int, std::vector<Monomial>> by_degree;
  for (const auto& m : d.expr.terms()) by_degree[jet_degree(sig, m)].push_back(m);

  Expression witness(Rational(0), sig);
  for (auto& [deg, terms] : by_degree) {
    if (deg == 0) {
      witness += base_antiderivative(sig, terms);
      continue;
    }
    // Homotopy formula: F_k = (1/k) sum_a sum_{m>=1} sum_{j<m} u^a_j (-D)^{m-1-j} dL_k/du^a_m.
    const Expression lk = Expression::from_monomials(sig, terms);
    Expression part(Rational(0), sig);
    for (const auto& s : lk.symbols()) {
      if (!sig->is_jet(s.gen)) continue;
      const int m = s.derivatives[0];
      if (m == 0) continue;
      Expression p = partial_derivative(lk, s, Side::left);
      // q runs through (-D)^{m-1-j} p for j = m-1 down to 0.
      Expression q = p;
      for (int j = m - 1; j >= 0; --j) {
        Symbol uj{s.gen, s.component, MultiIndex{}.plus(0, j)};
        part += Expression::symbol(sig, uj) * q;
        if (j > 0) q = -total_derivative(q, 0);
      }
    }
    witness += Rational(1, deg) * part;
  }
  return {{sig->variable(0), witness}};
}

bool ibp_equal(const Density& a, const Density& b) { return is_total_divergence(Density(a.expr - b.expr)); }

std::optional<Grading> characteristic_shift(const SignaturePtr& sig, const EvolutionaryVF& x) {
  std::optional<Grading> shift;
  for (const auto& [fc, q] : x.characteristics) {
    if (fc.gen >= sig->size() || !sig->is_jet(fc.gen))
      throw UnknownGeneratorError("characteristic for a non-field generator");
    if (q.is_zero()) continue;
    const Grading gq = grading_of(q);
    const Grading gf = sig->grading(fc.gen);
    Grading s{gq.odd != gf.odd, gq.ghost_number - gf.ghost_number, gq.antifield_number - gf.antifield_number};
    if (shift && *shift != s)
      throw GradingError("characteristics are not uniformly graded: shift " + to_string(s) + " vs " +
                         to_string(*shift));
    shift = s;
  }
  return shift;
}

Expression prolong_apply(const EvolutionaryVF& x, const Expression& e) {
  auto sig = e.signature();
  for (const auto& [fc, q] : x.characteristics) sig = common_signature(sig, q.signature());
  if (!sig) return Expression(Rational(0));
  characteristic_shift(sig, x);
  Expression result(Rational(0), sig);
  for (const auto& s : e.symbols()) {
    if (!sig->is_jet(s.gen)) continue;
    auto it = x.characteristics.find({s.gen, s.component});
    if (it == x.characteristics.end()) {
      if (sig->spec(s.gen).role == Role::field)
        throw MissingCharacteristicError("no characteristic for " + sig->symbol_name({s.gen, s.component, {}}));
      continue;
    }
    if (it->second.is_zero()) continue;
    result += total_derivative(it->second.rebased(sig), s.derivatives) *
              partial_derivative(e.rebased(sig), s, Side::left);
  }
  return result;
}

} // namespace jetbv
