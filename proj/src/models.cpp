#include "jetbv/models.hpp"

#include <sstream>

namespace jetbv {

namespace {

const char* const kVariables[] = {"t", "x", "y", "z"};

void check_dim(int dim) {
  if (dim < 2 || dim > 4)
    throw UnsupportedDimensionError("base dimension must be 2, 3 or 4, got " + std::to_string(dim));
}

std::string vars_block(int dim) {
  std::string vars = "vars", metric = "metric diag(";
  for (int i = 0; i < dim; ++i) {
    vars += std::string(" ") + kVariables[i];
    metric += i == 0 ? "1" : ", -1";
  }
  return vars + "\n" + metric + ")\n";
}

std::string free_particle_source(const ModelOptions& o) {
  return "# Point particle in three dimensions with potential V.\n"
         "vars t\n"
         "params m\n"
         "index i = 1..3\n"
         "field u[i]\n"
         "def V = " + o.potential + "\n"
         "lagrangian 1/2*m*d(u[i];t)*d(u[i];t) - V\n";
}

std::string scalar_phi4_source(const ModelOptions& o) {
  return "# Real scalar field with quartic self-interaction.\n" + vars_block(o.dim) +
         "params m lam\n"
         "index mu = vars\n"
         "field phi\n"
         "lagrangian 1/2*d(phi;mu)*d(phi;mu) - 1/2*m^2*phi^2 - 1/24*lam*phi^4\n";
}

std::string maxwell_source(const ModelOptions& o) {
  return "# Free electromagnetism with its abelian gauge symmetry.\n" + vars_block(o.dim) +
         "index mu nu = vars\n"
         "field A[mu]\n"
         "ghost C\n"
         "def F[mu,nu] = d(A[nu];mu) - d(A[mu];nu)\n"
         "lagrangian -1/4*F[mu,nu]*F[mu,nu]\n"
         "gauge C = d(EL(A[mu]);mu)\n"
         "master -1/4*F[mu,nu]*F[mu,nu] + A*[mu]*d(C;mu)\n";
}

std::string yang_mills_su2_source(const ModelOptions& o) {
  return "# Pure su(2) Yang-Mills theory, structure constants eps[a,b,c].\n" + vars_block(o.dim) +
         "index mu nu = vars\n"
         "index a b c = 1..3\n"
         "field A[a,mu]\n"
         "ghost C[a]\n"
         "def F[a,mu,nu] = d(A[a,nu];mu) - d(A[a,mu];nu) + eps[a,b,c]*A[b,mu]*A[c,nu]\n"
         "def DC[a,mu] = d(C[a];mu) + eps[a,b,c]*A[b,mu]*C[c]\n"
         "lagrangian -1/4*F[a,mu,nu]*F[a,mu,nu]\n"
         "gauge C[a] = d(EL(A[a,mu]);mu) + eps[a,b,c]*A[b,mu]*EL(A[c,mu])\n"
         "master -1/4*F[a,mu,nu]*F[a,mu,nu] + A*[a,mu]*DC[a,mu]\n"
         "  + 1/2*eps[a,b,c]*C*[a]*C[b]*C[c]\n";
}

std::string d2(const std::string& f, const char* v, const char* w) {
  return "d(d(" + f + ";" + v + ");" + w + ")";
}

void free_particle_table(ModelDescriptor& d) {
  const auto& ctx = *d.model.context;
  const Expression v = parse_expression("V", ctx);
  const auto& sig = ctx.bv_signature();
  for (int k = 1; k <= 3; ++k) {
    const std::string u = "u[" + std::to_string(k) + "]";
    Expression el = parse_expression("-m*" + d2(u, "t", "t"), ctx) -
                    partial_derivative(v.rebased(sig), Symbol{*sig->find("u"), Component{k}, {}});
    d.expected.push_back({CheckKind::euler_lagrange, {u}, format_expression(el), true, "EL[" + u + "] is Newton's law"});
  }
  d.expected.push_back({CheckKind::symmetry, {"u[i] = d(u[i];t)"}, {}, true, "time translation is a symmetry"});
  d.expected.push_back({CheckKind::noether_identity, {"d(EL(u[1]);t)"}, {}, false, "D_t EL is not an identity"});
  d.expected.push_back({CheckKind::divergence, {"d(u[1];t)*d(d(u[1];t);t)"}, {}, true, "u_t u_tt is a divergence"});
  if (d.options.potential == "0")
    d.expected.push_back({CheckKind::symmetry, {"u[1] = u[2]", "u[2] = -u[1]", "u[3] = 0"}, {}, true,
                          "rotation in the (1,2) plane is a symmetry"});
}

void scalar_phi4_table(ModelDescriptor& d) {
  std::string el = "-" + d2("phi", "t", "t");
  for (int i = 1; i < d.options.dim; ++i) el += " + " + d2("phi", kVariables[i], kVariables[i]);
  el += " - m^2*phi - 1/6*lam*phi^3";
  const auto& ctx = *d.model.context;
  d.expected.push_back({CheckKind::euler_lagrange, {"phi"}, format_expression(parse_expression(el, ctx)), true,
                        "EL[phi] is the Klein-Gordon equation with cubic term"});
  d.expected.push_back({CheckKind::symmetry, {"phi = d(phi;t)"}, {}, true, "time translation is a symmetry"});
  d.expected.push_back({CheckKind::symmetry, {"phi = 1"}, {}, false, "constant shift is not a symmetry"});
  d.expected.push_back({CheckKind::noether_identity, {"d(EL(phi);t)"}, {}, false, "no gauge identity"});
}

void maxwell_table(ModelDescriptor& d) {
  if (d.options.dim == 2) {
    const auto& ctx = *d.model.context;
    d.expected.push_back({CheckKind::euler_lagrange, {"A[0]"},
                          format_expression(parse_expression("d(d(A[1];t);x) - d(d(A[0];x);x)", ctx)), true,
                          "EL[A[0]] is Gauss's law"});
    d.expected.push_back({CheckKind::euler_lagrange, {"A[1]"},
                          format_expression(parse_expression("-d(d(A[1];t);t) + d(d(A[0];t);x)", ctx)), true,
                          "EL[A[1]] is the Ampere law"});
  }
  d.expected.push_back({CheckKind::symmetry, {"A[mu] = d(C;mu)"}, {}, true, "gauge transformation is a symmetry"});
  d.expected.push_back({CheckKind::noether_identity, {"d(EL(A[mu]);mu)"}, {}, true, "divergence of EL vanishes"});
  d.expected.push_back({CheckKind::master_equation, {}, {}, true, "master equation holds"});
  d.expected.push_back({CheckKind::kt_nilpotent, {}, {}, true, "Koszul-Tate differential squares to zero"});
}

void yang_mills_table(ModelDescriptor& d) {
  d.expected.push_back({CheckKind::symmetry, {"A[a,mu] = DC[a,mu]"}, {}, true, "gauge transformation is a symmetry"});
  d.expected.push_back({CheckKind::noether_identity, {"d(EL(A[1,mu]);mu) + eps[1,b,c]*A[b,mu]*EL(A[c,mu])"}, {}, true,
                        "covariant divergence of EL vanishes"});
  d.expected.push_back({CheckKind::noether_identity, {"d(EL(A[1,mu]);mu)"}, {}, false,
                        "plain divergence of EL is not an identity"});
  d.expected.push_back({CheckKind::master_equation, {}, {}, true, "master equation holds"});
  d.expected.push_back({CheckKind::kt_nilpotent, {}, {}, true, "Koszul-Tate differential squares to zero"});
}

} // namespace

std::vector<std::string> list_models() { return {"free_particle", "scalar_phi4", "maxwell", "yang_mills_su2"}; }

std::string model_source(std::string_view name, const ModelOptions& options) {
  if (name == "free_particle") return free_particle_source(options);
  check_dim(options.dim);
  if (name == "scalar_phi4") return scalar_phi4_source(options);
  if (name == "maxwell") return maxwell_source(options);
  if (name == "yang_mills_su2") return yang_mills_su2_source(options);
  throw UnknownModelError("unknown model '" + std::string(name) + "'");
}

ModelDescriptor builtin(std::string_view name, const ModelOptions& options) {
  std::string source = model_source(name, options);
  ModelDescriptor d{std::string(name), options, source, parse_model(source), {}};
  if (name == "free_particle")
    free_particle_table(d);
  else if (name == "scalar_phi4")
    scalar_phi4_table(d);
  else if (name == "maxwell")
    maxwell_table(d);
  else
    yang_mills_table(d);
  return d;
}

std::vector<FieldComponent> kt_square_failures(const BVExtension& b) {
  std::vector<FieldComponent> out;
  for (const auto& fc : b.generators()) {
    const Expression g = Expression::symbol(b.signature(), fc.symbol());
    if (!koszul_tate_apply(b, koszul_tate_apply(b, g)).is_zero()) out.push_back(fc);
  }
  return out;
}

std::vector<OutcomeResult> verify_expected(const ModelDescriptor& d) {
  const auto& ctx = *d.model.context;
  const Theory& theory = d.model.theory;
  std::vector<OutcomeResult> results;
  for (const auto& row : d.expected) {
    OutcomeResult r{row.description, false, {}};
    switch (row.kind) {
    case CheckKind::euler_lagrange: {
      const Expression target = parse_expression(row.inputs.at(0), ctx);
      const Symbol s = target.terms().at(0).even.at(0).symbol;
      const Expression got = euler_lagrange_system(theory).at({s.gen, s.component});
      const Expression want = parse_expression(row.expected_text, ctx);
      r.passed = (got - want).is_zero();
      r.detail = format_expression(got);
      break;
    }
    case CheckKind::symmetry:
      r.passed = is_symmetry(theory, parse_characteristics(row.inputs, ctx)) == row.expected;
      break;
    case CheckKind::noether_identity: {
      const Expression res = noether_residual(theory, parse_noether_operator(row.inputs.at(0), ctx));
      r.passed = res.is_zero() == row.expected;
      r.detail = format_expression(res);
      break;
    }
    case CheckKind::divergence:
      r.passed = is_total_divergence(Density(parse_expression(row.inputs.at(0), ctx))) == row.expected;
      break;
    case CheckKind::master_equation: {
      const MasterReport m = check_master_equation(d.model.extension());
      r.passed = m.holds == row.expected;
      r.detail = format_expression(m.residual);
      break;
    }
    case CheckKind::kt_nilpotent:
      r.passed = kt_square_failures(d.model.extension()).empty() == row.expected;
      break;
    }
    results.push_back(std::move(r));
  }
  return results;
}

} // namespace jetbv
