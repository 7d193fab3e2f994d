#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace testing;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_table(const ModelDescriptor& d) {
  REQUIRE_FALSE(d.expected.empty());
  for (const auto& r : verify_expected(d)) {
    INFO(d.name << " (dim " << d.options.dim << "): " << r.description << " " << r.detail);
    CHECK(r.passed);
  }
}

} // namespace

TEST_CASE("model catalogue") {
  const auto names = list_models();
  for (const char* n : {"free_particle", "scalar_phi4", "maxwell", "yang_mills_su2"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  CHECK_THROWS_AS(builtin("gravity"), UnknownModelError);
  CHECK_THROWS_AS(builtin("maxwell", {5}), UnsupportedDimensionError);
  CHECK_THROWS_AS(builtin("maxwell", {1}), UnsupportedDimensionError);
}

TEST_CASE("builtin shapes") {
  const auto fp = builtin("free_particle");
  CHECK(fp.model.theory.signature()->variable_count() == 1);
  CHECK(fp.model.theory.field_components().size() == 3);
  CHECK_FALSE(fp.model.bv);

  for (int n = 2; n <= 4; ++n) {
    const auto mx = builtin("maxwell", {n});
    CHECK(mx.model.theory.signature()->variable_count() == static_cast<std::size_t>(n));
    CHECK(mx.model.theory.field_components().size() == static_cast<std::size_t>(n));
    std::vector<Rational> metric(static_cast<std::size_t>(n), Rational(-1));
    metric[0] = 1;
    CHECK(mx.model.theory.metric() == metric);
  }
  const auto ym = builtin("yang_mills_su2");
  CHECK(ym.model.theory.field_components().size() == 6);
  CHECK(ym.model.bv->gauge().front().identities.size() == 3);
}

TEST_CASE("expected outcome tables") {
  for (const auto& name : list_models()) {
    const int max_dim = name == "yang_mills_su2" ? 3 : 4;
    for (int n = 2; n <= max_dim; ++n) check_table(builtin(name, {n}));
  }
}

TEST_CASE("free particle with a potential") {
  const auto fp = builtin("free_particle", {2, "u[1]^2*u[2] + 1/4*m*u[3]^4"});
  check_table(fp);
  const auto& ctx = *fp.model.context;
  const auto el = euler_lagrange_system(fp.model.theory);
  const auto u = *fp.model.theory.signature()->find("u");
  CHECK(el.at({u, Component{1}}) == parse_expression("-m*d(d(u[1];t);t) - 2*u[1]*u[2]", ctx));
  CHECK(el.at({u, Component{2}}) == parse_expression("-m*d(d(u[2];t);t) - u[1]^2", ctx));
  CHECK(el.at({u, Component{3}}) == parse_expression("-m*d(d(u[3];t);t) - m*u[3]^3", ctx));
  CHECK_THROWS_AS(builtin("free_particle", {2, "C"}), ParseError);
}

TEST_CASE("shipped model files match the builtin sources") {
  for (const auto& name : list_models()) {
    const std::string path = std::string(JETBV_SOURCE_DIR) + "/models/" + name + ".jv";
    const std::string text = read_file(path);
    INFO(path);
    CHECK(text == model_source(name));
    const ParsedModel parsed = parse_model(text);
    CHECK(parsed.theory.lagrangian() == builtin(name).model.theory.lagrangian());
  }
}
