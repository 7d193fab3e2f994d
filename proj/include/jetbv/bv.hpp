#pragma once

#include "jetbv/variational.hpp"

#include <map>
#include <optional>
#include <vector>

namespace jetbv {

/// A ghost together with the Noether identities it parameterizes, one
/// NoetherOperator per ghost component.
struct GaugeGenerator {
  GenId ghost = 0;
  std::map<Component, NoetherOperator> identities;
};

/// Field-antifield extension of a theory with a candidate master action.
/// Antifield of a generator of grading (p, g, 0) has (p+1, -g-1, g+1).
class BVExtension {
public:
  const Theory& base() const { return base_; }
  const SignaturePtr& signature() const { return signature_; }
  const std::vector<GaugeGenerator>& gauge() const { return gauge_; }
  const Expression& master_action() const { return master_; }

  /// Antifield component dual to a field or ghost component.
  FieldComponent antifield(const FieldComponent& fc) const;
  /// Every field, ghost and antifield component of the extension.
  std::vector<FieldComponent> generators() const;

  /// Replaces the candidate master action. Throws GradingError unless it is
  /// (even, gh 0) with antifield-number-0 part equal to the lagrangian in h.
  BVExtension with_master_action(Expression s) const;

private:
  friend BVExtension extend_to_bv(const Theory&, std::vector<GaugeGenerator>, std::optional<int>);
  BVExtension(Theory base, SignaturePtr sig) : base_(std::move(base)), signature_(std::move(sig)) {}

  Theory base_;
  SignaturePtr signature_;
  std::vector<GaugeGenerator> gauge_;
  Expression master_;
};

/// Antifield generator specs for every field and ghost of a signature.
std::vector<GeneratorSpec> antifield_specs(const Signature& sig);

/// Builds the extension. Each identity must have zero residual, or, when
/// `on_shell_order` is set, reduce to zero on-shell at that order. The
/// proposed master action is L + sum_a u*_a R^a(C) with the gauge
/// characteristic R^a = sum_alpha (-1)^(|alpha|+1) D_alpha(N^{a,alpha} C).
BVExtension extend_to_bv(const Theory& t, std::vector<GaugeGenerator> gauge,
                         std::optional<int> on_shell_order = std::nullopt);

/// Gauge characteristics R^a(C) of one gauge generator.
std::map<FieldComponent, Expression> gauge_characteristics(const SignaturePtr& sig, const GaugeGenerator& g);

/// Density of (F, G) = sum_Phi dR F/dPhi dL G/dPhi* - dR F/dPhi* dL G/dPhi.
Expression antibracket(const Expression& f, const Expression& g);
LocalFunctional antibracket(const LocalFunctional& f, const LocalFunctional& g);

/// Odd derivation: fields and ghosts -> 0, u*_a -> EL_a,
/// C*_c -> -sum N_c^{a,alpha} D_alpha(u*_a); commutes with total derivatives.
Expression koszul_tate_apply(const BVExtension& b, const Expression& e);

struct MasterReport {
  bool holds = false;
  Expression residual;
};

MasterReport check_master_equation(const BVExtension& b);

/// {S_cm, e} with e treated as a density.
Expression brst_apply(const BVExtension& b, const Expression& e);

} // namespace jetbv
