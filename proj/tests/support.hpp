#pragma once

#include "jetbv/bv.hpp"
#include "jetbv/frontend.hpp"
#include "jetbv/models.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace testing {

using namespace jetbv;

/// Random normal-form expressions over chosen generators of a signature.
class RandomExpressions {
public:
  RandomExpressions(SignaturePtr sig, std::uint32_t seed) : sig_(std::move(sig)), rng_(seed) {
    for (std::size_t g = 0; g < sig_->size(); ++g) {
      const auto role = sig_->spec(static_cast<GenId>(g)).role;
      if (role == Role::parameter) params_.push_back(static_cast<GenId>(g));
      if (role == Role::independent_variable) vars_.push_back(static_cast<GenId>(g));
      if (sig_->is_jet(static_cast<GenId>(g))) jets_.push_back(static_cast<GenId>(g));
    }
  }

  int max_order = 2;
  int max_terms = 4;
  int max_factors = 3;
  int max_exponent = 2;
  bool use_variables = true;
  bool use_parameters = true;
  bool negative_parameter_powers = false;

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Rational coefficient() {
    int p = 0;
    while (p == 0) p = uniform(-6, 6);
    return make_rational(p, uniform(1, 4));
  }

  Symbol jet_symbol(GenId g) {
    const auto comps = sig_->components(g);
    Symbol s{g, comps[static_cast<std::size_t>(uniform(0, static_cast<int>(comps.size()) - 1))], {}};
    const int order = uniform(0, max_order);
    for (int k = 0; k < order; ++k)
      s.derivatives = s.derivatives.plus(static_cast<std::size_t>(uniform(0, static_cast<int>(sig_->variable_count()) - 1)));
    return s;
  }

  std::pair<Symbol, int> factor() {
    const int kind = uniform(0, 9);
    if (kind == 0 && use_variables && !vars_.empty())
      return {{vars_[static_cast<std::size_t>(uniform(0, static_cast<int>(vars_.size()) - 1))], {}, {}},
              uniform(1, max_exponent)};
    if (kind == 1 && use_parameters && !params_.empty()) {
      int e = uniform(1, max_exponent);
      if (negative_parameter_powers && uniform(0, 1)) e = -e;
      return {{params_[static_cast<std::size_t>(uniform(0, static_cast<int>(params_.size()) - 1))], {}, {}}, e};
    }
    const GenId g = jets_[static_cast<std::size_t>(uniform(0, static_cast<int>(jets_.size()) - 1))];
    return {jet_symbol(g), sig_->is_odd(g) ? 1 : uniform(1, max_exponent)};
  }

  Expression monomial() {
    std::vector<std::pair<Symbol, int>> fs;
    const int n = uniform(1, max_factors);
    for (int i = 0; i < n; ++i) fs.push_back(factor());
    return Expression::product(sig_, coefficient(), fs);
  }

  Expression expression() {
    Expression e(Rational(0), sig_);
    const int n = uniform(1, max_terms);
    for (int i = 0; i < n; ++i) e += monomial();
    return e;
  }

  /// Nonzero expression homogeneous in (parity, ghost number).
  Expression homogeneous() {
    while (true) {
      Expression e = expression();
      if (e.is_zero()) continue;
      const Grading g0 = grading_of(sig_, e.terms().front());
      std::vector<Monomial> keep;
      for (const auto& m : e.terms()) {
        const Grading g = grading_of(sig_, m);
        if (g.odd == g0.odd && g.ghost_number == g0.ghost_number) keep.push_back(m);
      }
      return Expression::from_monomials(sig_, std::move(keep));
    }
  }

  std::mt19937& rng() { return rng_; }

private:
  SignaturePtr sig_;
  std::mt19937 rng_;
  std::vector<GenId> params_, vars_, jets_;
};

inline int parity(const Expression& e) { return grading_of(e.signature(), e.terms().front()).odd ? 1 : 0; }

/// A model with variables t, x, y, a parameter, even fields (one indexed),
/// an odd field and a ghost, all with antifields.
inline const char* kMixedModel =
    "vars t x y\n"
    "params m\n"
    "index i = 1..2\n"
    "field u\n"
    "field v[i]\n"
    "field psi odd\n"
    "ghost C\n"
    "lagrangian 1/2*d(u;t)^2\n";

/// Univariate polynomial with rational coefficients, index = degree.
struct Poly {
  std::vector<Rational> c;

  static Poly constant(const Rational& q) { return Poly{{q}}; }
  static Poly t() { return Poly{{Rational(0), Rational(1)}}; }

  void trim() {
    while (!c.empty() && c.back() == 0) c.pop_back();
  }
  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.c.resize(std::max(a.c.size(), b.c.size()));
    for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] += b.c[i];
    r.trim();
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    if (a.c.empty() || b.c.empty()) return r;
    r.c.assign(a.c.size() + b.c.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    r.trim();
    return r;
  }
  Poly derivative() const {
    Poly r;
    for (std::size_t i = 1; i < c.size(); ++i) r.c.push_back(c[i] * static_cast<long>(i));
    r.trim();
    return r;
  }
  Rational integral(const Rational& a, const Rational& b) const {
    Rational total(0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      Rational pa(1), pb(1);
      for (std::size_t k = 0; k <= i; ++k) {
        pa *= a;
        pb *= b;
      }
      total += c[i] * (pb - pa) / static_cast<long>(i + 1);
    }
    return total;
  }
};

/// Dual number a + eps*b over polynomials (eps^2 = 0).
struct Dual {
  Poly a, b;
  friend Dual operator+(const Dual& x, const Dual& y) { return {x.a + y.a, x.b + y.b}; }
  friend Dual operator*(const Dual& x, const Dual& y) { return {x.a * y.a, x.a * y.b + x.b * y.a}; }
};

/// A random first-variation problem on an interval: lagrangian in
/// (t, u, u_t, u_tt), polynomial section, perturbation vanishing with its
/// first derivative at both ends.
struct GateauxCase {
  struct Term {
    Rational c;
    std::array<int, 4> e; // powers of t, u, u_t, u_tt
  };
  std::vector<Term> terms;
  Poly section;
  Poly perturbation;
  Rational a, b;
};

inline GateauxCase random_gateaux(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  GateauxCase g;
  const int n = pick(1, 4);
  for (int i = 0; i < n; ++i) {
    GateauxCase::Term term{make_rational(pick(-5, 5) | 1, pick(1, 3)), {pick(0, 1), pick(0, 2), pick(0, 2), pick(0, 1)}};
    g.terms.push_back(term);
  }
  for (int i = 0; i <= pick(0, 3); ++i) g.section.c.push_back(make_rational(pick(-3, 3), pick(1, 2)));
  g.section.trim();
  const Rational starts[] = {make_rational(-1), make_rational(-1, 2), make_rational(0)};
  const Rational lengths[] = {make_rational(1), make_rational(3, 2), make_rational(2)};
  g.a = starts[pick(0, 2)];
  g.b = g.a + lengths[pick(0, 2)];
  const Poly ta = Poly{{-g.a, Rational(1)}}, tb = Poly{{-g.b, Rational(1)}};
  Poly q;
  for (int i = 0; i <= pick(0, 1); ++i) q.c.push_back(make_rational(pick(1, 4), pick(1, 2)));
  g.perturbation = ta * ta * tb * tb * q;
  return g;
}

/// d/d eps at 0 of the integral of L(s + eps*h), by dual-number arithmetic.
inline Rational gateaux_oracle(const GateauxCase& g) {
  const Dual t{Poly::t(), Poly{}};
  const Dual u{g.section, g.perturbation};
  const Dual ut{g.section.derivative(), g.perturbation.derivative()};
  const Dual utt{g.section.derivative().derivative(), g.perturbation.derivative().derivative()};
  Dual total{Poly{}, Poly{}};
  for (const auto& term : g.terms) {
    Dual m{Poly::constant(term.c), Poly{}};
    const Dual* base[] = {&t, &u, &ut, &utt};
    for (int k = 0; k < 4; ++k)
      for (int p = 0; p < term.e[k]; ++p) m = m * *base[k];
    total = total + m;
  }
  return total.b.integral(g.a, g.b);
}

/// The lagrangian of a case over a signature declaring t and u.
inline Expression gateaux_lagrangian(const GateauxCase& g, const SignaturePtr& sig) {
  const GenId t = *sig->find("t"), u = *sig->find("u");
  Expression l(Rational(0), sig);
  for (const auto& term : g.terms) {
    std::vector<std::pair<Symbol, int>> fs;
    if (term.e[0]) fs.push_back({{t, {}, {}}, term.e[0]});
    for (int k = 1; k < 4; ++k)
      if (term.e[k]) fs.push_back({{u, {}, MultiIndex{}.plus(0, k - 1)}, term.e[k]});
    l += Expression::product(sig, term.c, fs);
  }
  return l;
}

inline Expression poly_expression(const Poly& p, const SignaturePtr& sig) {
  Expression e(Rational(0), sig);
  const GenId t = *sig->find("t");
  for (std::size_t i = 0; i < p.c.size(); ++i)
    e += p.c[i] * (i == 0 ? Expression(Rational(1), sig) : Expression::symbol(sig, {t, {}, {}}, static_cast<int>(i)));
  return e;
}

/// The pairing of EL(s) with h over the interval, via the library.
inline Rational gateaux_library(const GateauxCase& g, const SignaturePtr& sig) {
  const GenId u = *sig->find("u");
  const Expression el = variational_derivative(Density(gateaux_lagrangian(g, sig)), {u, {}});
  Section s;
  s.values[{u, {}}] = poly_expression(g.section, sig);
  const Expression integrand = evaluate_on_section(el, s) * poly_expression(g.perturbation, sig);
  return integrate_polynomial(integrand, {{g.a, g.b}});
}

} // namespace testing
