#include "support.hpp"

#include <doctest.h>

using namespace testing;

namespace {

struct JetFixture {
  ParsedModel model = parse_model(
      "vars t x\n"
      "params m\n"
      "field u\n"
      "ghost C\n"
      "lagrangian 1/2*d(u;t)^2\n");
  ParsedModel line = parse_model(
      "vars t\n"
      "params m\n"
      "field u\n"
      "lagrangian 1/2*m*d(u;t)^2\n");

  Expression e(const char* text) const { return parse_expression(text, *model.context); }
  Expression l(const char* text) const { return parse_expression(text, *line.context); }
  FieldComponent u() const { return {*model.theory.signature()->find("u"), {}}; }
  FieldComponent lu() const { return {*line.theory.signature()->find("u"), {}}; }
};

} // namespace

TEST_CASE_FIXTURE(JetFixture, "total derivatives") {
  CHECK(total_derivative(e("u*d(u;t)"), 0) == e("d(u;t)^2 + u*d(d(u;t);t)"));
  CHECK(total_derivative(e("x"), 0).is_zero());
  CHECK(total_derivative(e("t"), 0) == e("1"));
  CHECK(total_derivative(e("m*t^3"), 0) == e("3*m*t^2"));
  CHECK(total_derivative(e("d(u;t)"), 1) == e("d(d(u;x);t)"));
  CHECK(total_derivative(total_derivative(e("u"), 0), 1) == total_derivative(total_derivative(e("u"), 1), 0));
  CHECK(total_derivative(e("C*d(C;x)"), 0) == e("d(C;t)*d(C;x) + C*d(d(C;x);t)"));
  const auto t = *model.theory.signature()->find("t");
  CHECK(total_derivative_by_id(e("t^2"), t) == e("2*t"));
  CHECK_THROWS_AS(total_derivative_by_id(e("u"), *model.theory.signature()->find("m")), UnknownVariableError);
}

TEST_CASE_FIXTURE(JetFixture, "variational derivatives") {
  CHECK(variational_derivative(Density(l("1/2*m*d(u;t)^2 - 1/3*u^3")), lu()) == l("-m*d(d(u;t);t) - u^2"));
  CHECK(variational_derivative(Density(total_derivative(e("u*d(u;t)"), 0)), u()).is_zero());
  CHECK(variational_derivative(Density(e("u*d(d(u;t);t)")), u()) == e("2*d(d(u;t);t)"));
  CHECK(variational_derivative(Density(e("d(d(u;t);x)^2")), u()) == e("2*d(d(d(d(u;t);t);x);x)"));
}

TEST_CASE_FIXTURE(JetFixture, "prolongation") {
  EvolutionaryVF shift;
  shift.characteristics[lu()] = l("m");
  CHECK(prolong_apply(shift, l("1/2*d(u;t)^2")).is_zero());

  EvolutionaryVF time;
  time.characteristics[lu()] = l("d(u;t)");
  CHECK(prolong_apply(time, l("1/2*m*d(u;t)^2")) == l("m*d(u;t)*d(d(u;t);t)"));

  EvolutionaryVF none;
  CHECK_THROWS_AS(prolong_apply(none, l("u")), MissingCharacteristicError);
  CHECK(prolong_apply(none, l("t*m")).is_zero());

  EvolutionaryVF ghosty;
  ghosty.characteristics[u()] = e("d(C;t)");
  CHECK(characteristic_shift(model.context->bv_signature(), ghosty) == Grading{true, 1, 0});
  EvolutionaryVF mixed;
  mixed.characteristics[u()] = e("d(C;t) + u");
  CHECK_THROWS_AS(characteristic_shift(model.context->bv_signature(), mixed), GradingError);
}

TEST_CASE_FIXTURE(JetFixture, "divergence test and witness") {
  CHECK(is_total_divergence(Density(l("d(u;t)*d(d(u;t);t)"))));
  CHECK_FALSE(is_total_divergence(Density(l("u*d(d(u;t);t)"))));
  CHECK(is_total_divergence(Density(l("t^2"))));

  auto w = divergence_witness(Density(l("d(u;t)*d(d(u;t);t)")));
  const auto t = *line.theory.signature()->find("t");
  CHECK(w.at(t) == l("1/2*d(u;t)^2"));

  w = divergence_witness(Density(l("m*d(u;t)*d(d(u;t);t) + d(u;t)*(u^2 - 2*u)")));
  CHECK(w.at(t) == l("1/2*m*d(u;t)^2 + 1/3*u^3 - u^2"));

  w = divergence_witness(Density(l("t^2 + m*t*d(u;t) + m*u")));
  CHECK(w.at(t) == l("1/3*t^3 + m*t*u"));

  CHECK_THROWS_AS(divergence_witness(Density(e("u*d(u;x)"))), UnsupportedDimensionError);
  CHECK_THROWS_AS(divergence_witness(Density(l("u*d(d(u;t);t)"))), NotADivergenceError);

  const auto bare = Signature::make({{"u", Role::field, {}, {}, std::nullopt}});
  CHECK_THROWS_AS(is_total_divergence(Density(Expression::symbol(bare, {0, {}, {}}))), ZeroVariablesError);
}

TEST_CASE_FIXTURE(JetFixture, "integration by parts equality") {
  CHECK(ibp_equal(Density(l("u*d(d(u;t);t)")), Density(l("-d(u;t)^2"))));
  CHECK_FALSE(ibp_equal(Density(l("1/2*d(u;t)^2")), Density(l("d(u;t)^2"))));
  CHECK(ibp_equal(Density(l("m*u^3")), Density(l("m*u^3"))));
}

TEST_CASE("jet-calculus laws on random expressions") {
  auto model = parse_model(kMixedModel);
  const auto sig = model.context->bv_signature();
  RandomExpressions gen(sig, 99);
  gen.max_order = 3;

  SUBCASE("total derivatives commute") {
    for (int i = 0; i < 200; ++i) {
      const Expression x = gen.expression();
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = a + 1; b < 3; ++b)
          CHECK(total_derivative(total_derivative(x, a), b) == total_derivative(total_derivative(x, b), a));
    }
  }
  SUBCASE("EL annihilates divergences and ibp is an equivalence") {
    for (int i = 0; i < 60; ++i) {
      const Expression d = gen.homogeneous();
      const Expression g = gen.homogeneous();
      const std::size_t v = static_cast<std::size_t>(gen.uniform(0, 2));
      const Density div(total_derivative(g, v));
      CHECK(is_total_divergence(div));
      for (const auto& fc : occurring_components(div.expr)) CHECK(variational_derivative(div, fc).is_zero());
      const Density a(d), b(d + total_derivative(g, v)), c(d + total_derivative(gen.expression(), 0));
      CHECK(ibp_equal(a, a));
      CHECK(ibp_equal(a, b) == ibp_equal(b, a));
      if (ibp_equal(a, b) && ibp_equal(b, c)) CHECK(ibp_equal(a, c));
    }
  }
}

TEST_CASE("witness soundness on random one-dimensional divergences") {
  auto model = parse_model("vars t\nparams m\nfield u\nfield w\nlagrangian 0\n");
  const auto sig = model.theory.signature();
  RandomExpressions gen(sig, 7);
  gen.max_order = 2;
  const auto t = *sig->find("t");
  for (int i = 0; i < 100; ++i) {
    const Expression f = gen.expression();
    const Expression d = total_derivative(f, 0) + (i % 3 == 0 ? gen.expression() : Expression(Rational(0), sig));
    if (!is_total_divergence(Density(d))) {
      CHECK_THROWS_AS(divergence_witness(Density(d)), NotADivergenceError);
      continue;
    }
    const auto w = divergence_witness(Density(d));
    CHECK(total_derivative(w.at(t), 0) == d);
  }
}
