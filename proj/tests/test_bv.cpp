#include "support.hpp"

#include <doctest.h>

using namespace testing;

namespace {

int bracket_sign(const Expression& f, const Expression& g) {
  return ((parity(f) + 1) * (parity(g) + 1)) % 2 == 0 ? 1 : -1;
}

bool vanishes_in_h(const Expression& e) { return e.is_zero() || is_total_divergence(Density(e)); }

} // namespace

TEST_CASE("extension of Maxwell theory") {
  const auto mx = builtin("maxwell");
  const auto& ctx = *mx.model.context;
  const BVExtension proposed = extend_to_bv(mx.model.theory, mx.model.bv->gauge());
  const auto& sig = *proposed.signature();
  CHECK(sig.grading(*sig.find("A*")) == Grading{true, -1, 1});
  CHECK(sig.grading(*sig.find("C*")) == Grading{false, -2, 2});
  CHECK(proposed.generators().size() == 6);
  CHECK(proposed.master_action() ==
        parse_expression("-1/4*F[mu,nu]*F[mu,nu] + A*[mu]*d(C;mu)", ctx).rebased(proposed.signature()));
  CHECK(proposed.master_action() == mx.model.bv->master_action());
}

TEST_CASE("extension without gauge symmetry") {
  const auto fp = builtin("free_particle");
  const BVExtension b = fp.model.extension();
  CHECK(b.gauge().empty());
  CHECK(b.generators().size() == 6);
  CHECK(b.master_action() == fp.model.theory.lagrangian().rebased(b.signature()));
  CHECK(check_master_equation(b).holds);
}

TEST_CASE("su(2) proposal uses the covariant derivative of the ghost") {
  const auto ym = builtin("yang_mills_su2");
  const auto& ctx = *ym.model.context;
  const BVExtension proposed = extend_to_bv(ym.model.theory, ym.model.bv->gauge());
  CHECK(proposed.master_action() ==
        parse_expression("-1/4*F[a,mu,nu]*F[a,mu,nu] + A*[a,mu]*DC[a,mu]", ctx).rebased(proposed.signature()));
  CHECK_FALSE(check_master_equation(proposed).holds);
  CHECK(check_master_equation(*ym.model.bv).holds);
}

TEST_CASE("extension errors") {
  const auto mx = builtin("maxwell");
  auto gauge = mx.model.bv->gauge();
  CHECK_THROWS_AS(extend_to_bv(mx.model.theory, {gauge[0], gauge[0]}), DuplicateGhostError);

  GaugeGenerator wrong;
  wrong.ghost = gauge[0].ghost;
  wrong.identities[{}] = parse_noether_operator("d(EL(A[0]);t)", *mx.model.context);
  CHECK_THROWS_AS(extend_to_bv(mx.model.theory, {wrong}), NotAnIdentityError);

  GaugeGenerator not_ghost = gauge[0];
  not_ghost.ghost = *mx.model.theory.signature()->find("A");
  CHECK_THROWS_AS(extend_to_bv(mx.model.theory, {not_ghost}), UnknownGeneratorError);

  CHECK_THROWS_AS(mx.model.bv->with_master_action(parse_expression("A*[0]*C", *mx.model.context)), GradingError);
  CHECK_THROWS_AS(mx.model.bv->with_master_action(parse_expression("A*[0]*d(C;t)", *mx.model.context)), GradingError);
  CHECK_THROWS_AS(parse_model("vars t\nfield u\nghost C\nlagrangian d(u;t)^2\ngauge C = d(EL(u);t)\n"),
                  NotAnIdentityError);
}

TEST_CASE("antibracket examples") {
  const auto mx = builtin("maxwell");
  const auto& ctx = *mx.model.context;
  const Expression s0 = mx.model.theory.lagrangian();
  CHECK(antibracket(s0, s0).is_zero());
  CHECK(antibracket(parse_expression("d(A[0];x)*A[1]", ctx), parse_expression("d(C;t)*C", ctx)).is_zero());
  const Expression gauge = parse_expression("A*[mu]*d(C;mu)", ctx);
  CHECK(antibracket(gauge, gauge).is_zero());
  CHECK(antibracket(parse_expression("A*[0]", ctx), parse_expression("A[0]^2", ctx)) == parse_expression("-2*A[0]", ctx));
  CHECK(antibracket(parse_expression("A[0]^2", ctx), parse_expression("A*[0]", ctx)) == parse_expression("2*A[0]", ctx));
  CHECK(antibracket(LocalFunctional(gauge), LocalFunctional(gauge)) == LocalFunctional(Expression(Rational(0), gauge.signature())));
  CHECK_THROWS_AS(antibracket(parse_expression("A[0] + C", ctx), gauge), InhomogeneousError);
  const auto fp = builtin("free_particle");
  CHECK_THROWS_AS(antibracket(fp.model.theory.lagrangian(), s0), GeneratorMismatchError);
}

TEST_CASE("Koszul-Tate differential") {
  const auto mx = builtin("maxwell");
  const auto& ctx = *mx.model.context;
  const BVExtension& b = *mx.model.bv;
  const auto el = euler_lagrange_system(mx.model.theory);
  for (const auto& [fc, e] : el)
    CHECK(koszul_tate_apply(b, Expression::symbol(b.signature(), b.antifield(fc).symbol())) == e.rebased(b.signature()));
  const Expression cstar = parse_expression("C*", ctx);
  CHECK(koszul_tate_apply(b, cstar) == parse_expression("-d(A*[mu];mu)", ctx));
  CHECK(koszul_tate_apply(b, koszul_tate_apply(b, cstar)).is_zero());
  CHECK(koszul_tate_apply(b, parse_expression("A[0]*d(C;t)", ctx)).is_zero());

  const auto fp = builtin("free_particle");
  const auto& fctx = *fp.model.context;
  CHECK(koszul_tate_apply(fp.model.extension(), parse_expression("u[1]*u[1]*", fctx)) ==
        parse_expression("-m*u[1]*d(d(u[1];t);t)", fctx));
  CHECK(koszul_tate_apply(fp.model.extension(), parse_expression("u[1]**u[2]*", fctx)) ==
        parse_expression("-m*d(d(u[1];t);t)*u[2]* + m*u[1]**d(d(u[2];t);t)", fctx));
}

TEST_CASE("Koszul-Tate differential is a graded derivation") {
  const auto ym = builtin("yang_mills_su2");
  const BVExtension& b = *ym.model.bv;
  RandomExpressions gen(b.signature(), 31);
  gen.max_order = 1;
  gen.max_terms = 2;
  gen.max_factors = 2;
  for (int i = 0; i < 40; ++i) {
    const Expression x = gen.homogeneous(), y = gen.homogeneous();
    const Expression lhs = koszul_tate_apply(b, x * y);
    const Expression rhs = koszul_tate_apply(b, x) * y + Rational(parity(x) ? -1 : 1) * (x * koszul_tate_apply(b, y));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("master equation and BRST differential") {
  const auto mx = builtin("maxwell");
  const auto& ctx = *mx.model.context;
  const BVExtension& b = *mx.model.bv;
  CHECK(check_master_equation(b).holds);
  CHECK(brst_apply(b, parse_expression("A[0]", ctx)) == parse_expression("d(C;t)", ctx));
  CHECK(brst_apply(b, parse_expression("A[1]", ctx)) == parse_expression("d(C;x)", ctx));
  CHECK(brst_apply(b, parse_expression("C", ctx)).is_zero());

  const auto ym = builtin("yang_mills_su2");
  const auto& yctx = *ym.model.context;
  CHECK(brst_apply(*ym.model.bv, parse_expression("C[1]", yctx)) == parse_expression("-C[2]*C[3]", yctx));

  for (const BVExtension* ext : {&b, &*ym.model.bv}) {
    REQUIRE(check_master_equation(*ext).holds);
    for (const auto& fc : ext->generators()) {
      const Expression g = Expression::symbol(ext->signature(), fc.symbol());
      const Expression once = brst_apply(*ext, g);
      CHECK(vanishes_in_h(brst_apply(*ext, once)));
    }
  }
}

TEST_CASE("ghost-number bookkeeping and bracket laws on random functionals") {
  const auto mx = builtin("maxwell");
  const BVExtension& b = *mx.model.bv;
  RandomExpressions gen(b.signature(), 77);
  gen.max_order = 1;
  gen.max_terms = 3;
  gen.use_variables = false;
  for (int i = 0; i < 40; ++i) {
    const Expression f = gen.homogeneous(), g = gen.homogeneous(), h = gen.homogeneous();
    const int gf = grading_of(f.signature(), f.terms().front()).ghost_number;
    const int gg = grading_of(g.signature(), g.terms().front()).ghost_number;
    const Expression fg = antibracket(f, g);
    if (!fg.is_zero())
      for (const auto& m : fg.terms()) CHECK(grading_of(fg.signature(), m).ghost_number == gf + gg + 1);
    const Expression sf = brst_apply(b, f);
    if (!sf.is_zero())
      for (const auto& m : sf.terms()) CHECK(grading_of(sf.signature(), m).ghost_number == gf + 1);

    CHECK(ibp_equal(Density(fg), Density(Rational(-bracket_sign(f, g)) * antibracket(g, f))));
    if (i < 15) {
      const Expression lhs = antibracket(f, antibracket(g, h));
      const Expression rhs = antibracket(fg, h) + Rational(bracket_sign(f, g)) * antibracket(g, antibracket(f, h));
      CHECK(ibp_equal(Density(lhs), Density(rhs)));
    }
  }
}
