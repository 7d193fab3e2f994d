#include "jetbv/bv.hpp"

#include "jetbv/error.hpp"

#include <set>

namespace jetbv {

namespace {

// (parity, ghost number) of an expression; antifield number may vary.
std::pair<bool, int> bv_degree(const Expression& e) {
  std::optional<std::pair<bool, int>> deg;
  for (const auto& m : e.terms()) {
    const Grading g = grading_of(e.signature(), m);
    std::pair<bool, int> d{g.odd, g.ghost_number};
    if (deg && *deg != d)
      throw InhomogeneousError("expression mixes parity/ghost-number degrees");
    deg = d;
  }
  return deg.value_or(std::pair<bool, int>{false, 0});
}

} // namespace

std::vector<GeneratorSpec> antifield_specs(const Signature& sig) {
  std::vector<GeneratorSpec> out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const auto& g = sig.spec(static_cast<GenId>(i));
    if (g.role != Role::field && g.role != Role::ghost) continue;
    if (sig.antifield(static_cast<GenId>(i))) continue;
    GeneratorSpec a;
    a.name = g.name + "*";
    a.role = Role::antifield;
    a.index_ranges = g.index_ranges;
    a.grading = {!g.grading.odd, -g.grading.ghost_number - 1, g.grading.ghost_number + 1};
    a.antifield_of = static_cast<GenId>(i);
    out.push_back(std::move(a));
  }
  return out;
}

FieldComponent BVExtension::antifield(const FieldComponent& fc) const {
  auto a = signature_->antifield(fc.gen);
  if (!a) throw UnknownGeneratorError("'" + signature_->spec(fc.gen).name + "' has no antifield");
  return {*a, fc.component};
}

std::vector<FieldComponent> BVExtension::generators() const {
  std::vector<FieldComponent> out;
  for (std::size_t g = 0; g < signature_->size(); ++g) {
    if (!signature_->is_jet(static_cast<GenId>(g))) continue;
    for (const auto& c : signature_->components(static_cast<GenId>(g))) out.push_back({static_cast<GenId>(g), c});
  }
  return out;
}

BVExtension BVExtension::with_master_action(Expression s) const {
  s = s.rebased(common_signature(signature_, s.signature()));
  if (!s.is_zero()) {
    auto [odd, gh] = bv_degree(s);
    if (odd || gh != 0) throw GradingError("master action must be even with ghost number 0");
  }
  std::vector<Monomial> antifield_free;
  for (const auto& m : s.terms())
    if (grading_of(s.signature(), m).antifield_number == 0) antifield_free.push_back(m);
  Expression s0 = Expression::from_monomials(signature_, std::move(antifield_free));
  if (!ibp_equal(Density(s0), Density(base_.lagrangian().rebased(signature_))))
    throw GradingError("antifield-number-0 part of the master action differs from the lagrangian");
  BVExtension b = *this;
  b.master_ = std::move(s);
  return b;
}

std::map<FieldComponent, Expression> gauge_characteristics(const SignaturePtr& sig, const GaugeGenerator& g) {
  std::map<FieldComponent, Expression> r;
  for (const auto& [comp, op] : g.identities) {
    const Expression ghost = Expression::symbol(sig, {g.ghost, comp, {}});
    for (const auto& [fc, terms] : op.coefficients) {
      for (const auto& [alpha, coeff] : terms) {
        Expression t = total_derivative(coeff.rebased(sig) * ghost, alpha);
        auto [it, fresh] = r.try_emplace(fc, Expression(Rational(0), sig));
        if (alpha.order() % 2 == 0)
          it->second -= t;
        else
          it->second += t;
      }
    }
  }
  return r;
}

BVExtension extend_to_bv(const Theory& t, std::vector<GaugeGenerator> gauge, std::optional<int> on_shell_order) {
  const auto& base_sig = t.signature();
  std::set<GenId> seen;
  for (const auto& g : gauge) {
    if (g.ghost >= base_sig->size() || base_sig->spec(g.ghost).role != Role::ghost)
      throw UnknownGeneratorError("gauge generator does not name a declared ghost");
    if (!seen.insert(g.ghost).second)
      throw DuplicateGhostError("ghost '" + base_sig->spec(g.ghost).name + "' used by two gauge generators");
    for (const auto& [comp, op] : g.identities) {
      if (!base_sig->valid_component(g.ghost, comp))
        throw UnknownGeneratorError("ghost component out of range for '" + base_sig->spec(g.ghost).name + "'");
      Expression residual = noether_residual(t, op);
      if (!residual.is_zero() && on_shell_order)
        residual = on_shell_reduce(residual, t, *on_shell_order);
      if (!residual.is_zero())
        throw NotAnIdentityError("gauge generator for '" + base_sig->symbol_name({g.ghost, comp, {}}) +
                                 "' is not a Noether identity: residual has " +
                                 std::to_string(residual.terms().size()) + " terms");
    }
  }
  auto sig = base_sig->extended(antifield_specs(*base_sig));
  BVExtension b(t, sig);
  b.gauge_ = std::move(gauge);
  Expression s = t.lagrangian().rebased(sig);
  for (const auto& g : b.gauge_)
    for (const auto& [fc, r] : gauge_characteristics(sig, g))
      s += Expression::symbol(sig, b.antifield(fc).symbol()) * r;
  b.master_ = s;
  return b;
}

Expression antibracket(const Expression& f, const Expression& g) {
  auto sig = common_signature(f.signature(), g.signature());
  if (!sig || f.is_zero() || g.is_zero()) return Expression(Rational(0), sig);
  bv_degree(f);
  bv_degree(g);
  const Density df(f.rebased(sig)), dg(g.rebased(sig));
  const auto in_f = occurring_components(df.expr);
  const auto in_g = occurring_components(dg.expr);
  auto occurs = [](const std::vector<FieldComponent>& v, const FieldComponent& fc) {
    return std::binary_search(v.begin(), v.end(), fc);
  };
  Expression result(Rational(0), sig);
  for (std::size_t id = 0; id < sig->size(); ++id) {
    const Role role = sig->spec(static_cast<GenId>(id)).role;
    if (role != Role::field && role != Role::ghost) continue;
    auto star = sig->antifield(static_cast<GenId>(id));
    if (!star) continue;
    for (const auto& c : sig->components(static_cast<GenId>(id))) {
      const FieldComponent phi{static_cast<GenId>(id), c}, phis{*star, c};
      if (occurs(in_f, phi) && occurs(in_g, phis))
        result += variational_derivative(df, phi, Side::right) * variational_derivative(dg, phis, Side::left);
      if (occurs(in_f, phis) && occurs(in_g, phi))
        result -= variational_derivative(df, phis, Side::right) * variational_derivative(dg, phi, Side::left);
    }
  }
  return result;
}

LocalFunctional antibracket(const LocalFunctional& f, const LocalFunctional& g) {
  return LocalFunctional(antibracket(f.expr(), g.expr()));
}

Expression koszul_tate_apply(const BVExtension& b, const Expression& e) {
  const auto& sig = b.signature();
  const Expression x = e.rebased(common_signature(sig, e.signature()));
  const auto el = euler_lagrange_system(b.base());
  std::map<FieldComponent, Expression> base_images;
  for (const auto& [fc, value] : el) base_images[b.antifield(fc)] = value.rebased(sig);
  for (const auto& g : b.gauge()) {
    for (const auto& [comp, op] : g.identities) {
      Expression img(Rational(0), sig);
      for (const auto& [fc, terms] : op.coefficients) {
        const Expression star = Expression::symbol(sig, b.antifield(fc).symbol());
        for (const auto& [alpha, coeff] : terms) img -= coeff.rebased(sig) * total_derivative(star, alpha);
      }
      base_images[b.antifield({g.ghost, comp})] = img;
    }
  }
  return apply_derivation(x, true, [&](const Symbol& s) -> Expression {
    auto it = base_images.find({s.gen, s.component});
    if (it == base_images.end()) return Expression(Rational(0), sig);
    return total_derivative(it->second, s.derivatives);
  });
}

MasterReport check_master_equation(const BVExtension& b) {
  const Expression& s = b.master_action();
  if (!s.is_zero()) {
    auto [odd, gh] = bv_degree(s);
    if (odd || gh != 0) throw GradingError("master action must be even with ghost number 0");
  }
  MasterReport report;
  report.residual = antibracket(s, s);
  report.holds = report.residual.is_zero() || is_total_divergence(Density(report.residual));
  return report;
}

Expression brst_apply(const BVExtension& b, const Expression& e) { return antibracket(b.master_action(), e); }

} // namespace jetbv
