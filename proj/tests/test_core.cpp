#include "support.hpp"

#include <doctest.h>

using namespace testing;

namespace {

const char* kCore =
    "vars t x\n"
    "params m\n"
    "index j = 1..2\n"
    "field u\n"
    "field th[j] odd\n"
    "ghost C\n"
    "lagrangian 0\n";

struct CoreFixture {
  ParsedModel model = parse_model(kCore);
  const ModelContext& ctx = *model.context;
  SignaturePtr sig = ctx.bv_signature();

  Expression e(const char* text) const { return parse_expression(text, ctx); }
  Symbol sym(const char* text) const { return e(text).symbols().front(); }
};

} // namespace

TEST_CASE_FIXTURE(CoreFixture, "add merges like terms and cancels odd swaps") {
  CHECK(e("u") + Expression(Rational(0), sig) == e("u"));
  CHECK(e("2/3*d(u;t)") + e("1/3*d(u;t)") == e("d(u;t)"));

  const Symbol t1 = sym("th[1]"), t2 = sym("th[2]");
  const Expression t12 = Expression::product(sig, Rational(1), {{t1, 1}, {t2, 1}});
  const Expression t21 = Expression::product(sig, Rational(1), {{t2, 1}, {t1, 1}});
  // One transposition of odd factors.
  CHECK(t21 == -t12);
  CHECK((t12 + t21).is_zero());
}

TEST_CASE_FIXTURE(CoreFixture, "mul follows the Koszul rule") {
  CHECK(e("th[1]") * e("th[2]") == e("th[1]*th[2]"));
  CHECK(e("th[2]") * e("th[1]") == -e("th[1]*th[2]"));
  CHECK((e("th[1]") * e("th[1]")).is_zero());
  CHECK((e("u") + e("d(u;t)")) * e("u") == e("u^2 + u*d(u;t)"));
  CHECK((e("C*d(C;t)") * e("u")) == e("u*C*d(C;t)"));
}

TEST_CASE_FIXTURE(CoreFixture, "partial derivatives") {
  CHECK(partial_derivative(e("u*d(u;t)"), sym("d(u;t)")) == e("u"));
  CHECK(partial_derivative(e("th[1]*th[2]"), sym("th[2]"), Side::left) == -e("th[1]"));
  CHECK(partial_derivative(e("th[1]*th[2]"), sym("th[2]"), Side::right) == e("th[1]"));
  CHECK(partial_derivative(e("th[1]*th[2]"), sym("th[1]"), Side::left) == e("th[2]"));
  CHECK(partial_derivative(e("u^2"), sym("d(u;t)")).is_zero());
  CHECK(partial_derivative(e("u^3*m"), sym("u")) == e("3*m*u^2"));
}

TEST_CASE_FIXTURE(CoreFixture, "gradings") {
  CHECK(grading_of(e("C*d(C;t)")) == Grading{false, 2, 0});
  CHECK(grading_of(e("u*")) == Grading{true, -1, 1});
  CHECK(grading_of(e("C*")) == Grading{false, -2, 2});
  CHECK(grading_of(e("th[1]*")) == Grading{false, -1, 1});
  CHECK_THROWS_AS(grading_of(e("u + C")), InhomogeneousError);
  CHECK_THROWS_AS(grading_of(e("0")), ZeroExpressionError);
  CHECK(grading_of(e("m^-2*u")) == Grading{});
}

TEST_CASE_FIXTURE(CoreFixture, "substitute") {
  CHECK(substitute(e("d(u;t)^2"), {{sym("d(u;t)"), e("1")}}) == e("1"));
  CHECK(substitute(e("u*d(u;t)"), {{sym("u"), e("d(u;t)")}}) == e("d(u;t)^2"));
  CHECK(substitute(e("th[1]*th[2]"), {{sym("th[1]"), e("th[2]")}}).is_zero());
  CHECK_THROWS_AS(substitute(e("u"), {{sym("u"), e("C")}}), GradingError);
}

TEST_CASE_FIXTURE(CoreFixture, "inverse and powers of parameters") {
  CHECK(*inverse(e("2*m")) == e("1/2*m^-1"));
  CHECK(!inverse(e("u")));
  CHECK(!inverse(e("m + 1")));
  CHECK(power(e("m"), -2) * e("m^2") == e("1"));
  CHECK(power(e("u + 1"), 2) == e("u^2 + 2*u + 1"));
}

TEST_CASE("expressions from different theories do not mix") {
  auto a = parse_model("vars t\nfield u\nlagrangian d(u;t)^2\n");
  auto b = parse_model("vars t\nfield w\nlagrangian d(w;t)^2\n");
  CHECK_THROWS_AS(a.theory.lagrangian() + b.theory.lagrangian(), GeneratorMismatchError);
  CHECK_THROWS_AS(a.theory.lagrangian() * b.theory.lagrangian(), GeneratorMismatchError);
  // Constants combine with anything.
  CHECK(a.theory.lagrangian() + Expression(Rational(0)) == a.theory.lagrangian());
}

TEST_CASE("normal-form and ring laws on random expressions") {
  auto model = parse_model(kMixedModel);
  const auto sig = model.context->bv_signature();
  RandomExpressions gen(sig, 1234);

  SUBCASE("idempotence") {
    for (int i = 0; i < 300; ++i) {
      const Expression x = gen.expression();
      CHECK(Expression::from_monomials(sig, x.terms()) == x);
    }
  }
  SUBCASE("graded commutativity") {
    for (int i = 0; i < 500; ++i) {
      const Expression a = gen.homogeneous(), b = gen.homogeneous();
      const bool sign = parity(a) * parity(b) == 1;
      CHECK(a * b == (sign ? -(b * a) : b * a));
    }
  }
  SUBCASE("associativity and distributivity") {
    for (int i = 0; i < 200; ++i) {
      const Expression a = gen.expression(), b = gen.expression(), c = gen.expression();
      CHECK((a * b) * c == a * (b * c));
      CHECK((a + b) + c == a + (b + c));
      CHECK(a * (b + c) == a * b + a * c);
      CHECK((a + b) * c == a * c + b * c);
    }
  }
  SUBCASE("grading additivity") {
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      const Expression a = gen.homogeneous(), b = gen.homogeneous();
      const Expression p = a * b;
      if (p.is_zero()) continue;
      if (a.homogeneous_components().size() != 1 || b.homogeneous_components().size() != 1) continue;
      CHECK(grading_of(p) == grading_of(a) + grading_of(b));
      ++checked;
    }
    CHECK(checked > 50);
  }
  SUBCASE("repeated odd factors vanish") {
    for (int i = 0; i < 200; ++i) {
      auto fs = std::vector<std::pair<Symbol, int>>{gen.factor(), gen.factor()};
      const Symbol odd = gen.jet_symbol(*sig->find("C"));
      fs.insert(fs.begin() + gen.uniform(0, 2), {odd, 1});
      fs.insert(fs.begin() + gen.uniform(0, 3), {odd, 1});
      CHECK(Expression::product(sig, Rational(3), fs).is_zero());
    }
  }
}
