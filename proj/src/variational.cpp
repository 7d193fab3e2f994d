#include "jetbv/variational.hpp"

#include "jetbv/error.hpp"

#include <algorithm>

namespace jetbv {

Theory::Theory(SignaturePtr signature, std::vector<Rational> metric, Expression lagrangian)
    : signature_(std::move(signature)), metric_(std::move(metric)), lagrangian_(std::move(lagrangian)) {
  if (!signature_) throw Error("theory without a signature");
  if (metric_.size() != signature_->variable_count())
    throw DomainError("metric dimension " + std::to_string(metric_.size()) + " does not match " +
                      std::to_string(signature_->variable_count()) + " independent variables");
  for (const auto& g : metric_)
    if (g == 0) throw DomainError("metric entries must be nonzero");
  lagrangian_ = lagrangian_.rebased(signature_);
  if (!lagrangian_.is_zero() && grading_of(lagrangian_) != Grading{})
    throw GradingError("lagrangian must be even with ghost number 0 and antifield number 0, got " +
                       to_string(grading_of(lagrangian_)));
}

std::vector<FieldComponent> Theory::components(Role role) const {
  std::vector<FieldComponent> out;
  for (std::size_t g = 0; g < signature_->size(); ++g) {
    if (signature_->spec(static_cast<GenId>(g)).role != role) continue;
    for (const auto& c : signature_->components(static_cast<GenId>(g))) out.push_back({static_cast<GenId>(g), c});
  }
  return out;
}

void NoetherOperator::add(const FieldComponent& fc, const MultiIndex& alpha, const Expression& c) {
  auto& slot = coefficients[fc][alpha];
  slot += c;
  if (slot.is_zero()) {
    coefficients[fc].erase(alpha);
    if (coefficients[fc].empty()) coefficients.erase(fc);
  }
}

bool NoetherOperator::empty() const {
  for (const auto& [fc, m] : coefficients)
    for (const auto& [alpha, c] : m)
      if (!c.is_zero()) return false;
  return true;
}

ELSystem euler_lagrange_system(const Theory& t) {
  ELSystem el;
  const Density l(t.lagrangian().rebased(t.signature()));
  for (const auto& fc : t.field_components()) el[fc] = variational_derivative(l, fc);
  return el;
}

bool is_symmetry(const Theory& t, const EvolutionaryVF& x) {
  Expression variation = prolong_apply(x, t.lagrangian().rebased(t.signature()));
  if (variation.is_zero()) return true;
  return is_total_divergence(Density(variation));
}

Expression noether_residual(const Theory& t, const NoetherOperator& n) {
  const auto el = euler_lagrange_system(t);
  Expression r(Rational(0), t.signature());
  for (const auto& [fc, ops] : n.coefficients) {
    auto it = el.find(fc);
    if (it == el.end()) throw UnknownGeneratorError("Noether operator refers to a non-field component");
    for (const auto& [alpha, coeff] : ops) r += coeff * total_derivative(it->second, alpha);
  }
  return r;
}

bool is_noether_identity(const Theory& t, const NoetherOperator& n) { return noether_residual(t, n).is_zero(); }

namespace {

// Orderly ranking: total order first, then the canonical order.
bool rank_less(const Symbol& a, const Symbol& b) {
  if (a.derivatives.order() != b.derivatives.order()) return a.derivatives.order() < b.derivatives.order();
  return a < b;
}

struct RewriteRule {
  Symbol lead;
  Expression inverse_coefficient;
  Expression rest;
};

std::vector<RewriteRule> solve_for_leaders(const Theory& t) {
  const auto& sig = t.signature();
  std::vector<RewriteRule> rules;
  for (const auto& [fc, el] : euler_lagrange_system(t)) {
    if (el.is_zero()) continue;
    std::optional<Symbol> lead;
    for (const auto& s : el.symbols())
      if (sig->is_jet(s.gen) && (!lead || rank_less(*lead, s))) lead = s;
    const std::string name = sig->symbol_name(fc.symbol());
    if (!lead) throw NotSolvableError("EL[" + name + "] contains no jet coordinate");
    Expression c = partial_derivative(el, *lead);
    auto inv = inverse(c);
    if (!inv || !partial_derivative(c, *lead).is_zero())
      throw NotSolvableError("EL[" + name + "] is not solvable for its leading coordinate " +
                             sig->symbol_name(*lead));
    rules.push_back({*lead, *inv, el - c * Expression::symbol(sig, *lead)});
  }
  return rules;
}

} // namespace

Expression on_shell_reduce(const Expression& e, const Theory& t, const OnShellOptions& options) {
  const auto& sig = t.signature();
  const auto rules = solve_for_leaders(t);
  std::map<Symbol, Expression> rhs_cache;
  auto rhs_for = [&](const Symbol& s) -> const Expression* {
    if (s.derivatives.order() > options.max_order) return nullptr;
    if (auto it = rhs_cache.find(s); it != rhs_cache.end()) return &it->second;
    for (const auto& r : rules) {
      if (r.lead.gen != s.gen || r.lead.component != s.component) continue;
      if (!s.derivatives.contains(r.lead.derivatives)) continue;
      const MultiIndex alpha = s.derivatives.minus(r.lead.derivatives);
      Expression value = -(r.inverse_coefficient * total_derivative(r.rest, alpha));
      return &rhs_cache.emplace(s, std::move(value)).first->second;
    }
    return nullptr;
  };

  Expression current = e.rebased(common_signature(e.signature(), sig));
  std::size_t budget = options.rewrite_budget;
  while (true) {
    std::map<Symbol, Expression> bindings;
    for (const auto& s : current.symbols())
      if (const Expression* r = rhs_for(s)) bindings.emplace(s, *r);
    if (bindings.empty()) return current;
    if (bindings.size() > budget)
      throw RewriteBudgetError("on-shell reduction exceeded its rewrite budget");
    budget -= bindings.size();
    current = substitute(current, bindings);
  }
}

Expression evaluate_on_section(const Expression& e, const Section& s) {
  const auto& sig = e.signature();
  if (!sig) return e;
  std::map<Symbol, Expression> bindings;
  for (const auto& sym : e.symbols()) {
    if (!sig->is_jet(sym.gen)) continue;
    auto it = s.values.find({sym.gen, sym.component});
    Expression value(Rational(0), sig);
    if (it != s.values.end() && !it->second.is_zero()) {
      if (sig->is_odd(sym.gen))
        throw GradingError("odd field " + sig->spec(sym.gen).name + " admits only the zero section");
      value = it->second.rebased(common_signature(sig, it->second.signature()));
      for (const auto& v : value.symbols())
        if (value.signature()->is_jet(v.gen))
          throw DomainError("section values must not contain jet coordinates");
      value = total_derivative(value, sym.derivatives);
    }
    bindings.emplace(sym, value);
  }
  Expression out = substitute(e, bindings);
  std::map<Symbol, Expression> params;
  for (const auto& [gen, value] : s.parameters) params.emplace(Symbol{gen, {}, {}}, Expression(value, sig));
  return substitute(out, params);
}

Rational integrate_polynomial(const Expression& p, const Box& box) {
  const auto& sig = p.signature();
  Rational total(0);
  for (const auto& m : p.terms()) {
    if (!m.odd.empty()) throw GradingError("cannot integrate an odd integrand");
    Rational value = m.coefficient;
    std::vector<int> exps(box.size(), 0);
    for (const auto& f : m.even) {
      const int pos = sig->variable_position(f.symbol.gen);
      if (pos < 0) throw DomainError("integrand still depends on '" + sig->spec(f.symbol.gen).name + "'");
      if (f.exponent < 0) throw DomainError("negative power of an independent variable");
      exps[pos] = f.exponent;
    }
    for (std::size_t v = 0; v < box.size(); ++v) {
      const auto& [a, b] = box[v];
      Rational pa(1), pb(1);
      for (int k = 0; k <= exps[v]; ++k) {
        pa *= a;
        pb *= b;
      }
      value *= (pb - pa) / (exps[v] + 1);
    }
    total += value;
  }
  return total;
}

Rational integrate_on_box(const LocalFunctional& f, const Section& s, const Box& box) {
  const auto& e = f.expr();
  const auto& sig = e.signature();
  if (box.size() != sig->variable_count())
    throw DomainError("box has " + std::to_string(box.size()) + " intervals for " +
                      std::to_string(sig->variable_count()) + " independent variables");
  if (e.is_zero()) return Rational(0);
  for (const auto& [g, part] : e.homogeneous_components()) {
    if (g.odd) throw GradingError("cannot integrate an odd density");
    if (g.ghost_number != 0) throw GradingError("density has nonzero ghost number " + std::to_string(g.ghost_number));
  }
  return integrate_polynomial(evaluate_on_section(e, s), box);
}

} // namespace jetbv
