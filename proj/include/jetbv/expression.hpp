#pragma once

#include "jetbv/rational.hpp"
#include "jetbv/signature.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace jetbv {

/// Even factor with its exponent. Only parameters may carry negative
/// exponents (they are invertible constants).
struct Factor {
  Symbol symbol;
  int exponent = 1;
  friend bool operator==(const Factor&, const Factor&) = default;
};

/// coefficient * (even factors) * odd_1 * ... * odd_k, with the odd factors
/// sorted in canonical order and the sorting sign absorbed in the coefficient.
struct Monomial {
  Rational coefficient{1};
  std::vector<Factor> even;
  std::vector<Symbol> odd;

  bool is_odd() const { return odd.size() % 2 == 1; }
  bool is_constant() const { return even.empty() && odd.empty(); }
  /// Comparison of the factor parts only.
  friend std::strong_ordering compare_key(const Monomial& a, const Monomial& b);
  friend bool same_key(const Monomial& a, const Monomial& b) { return a.even == b.even && a.odd == b.odd; }
};

std::strong_ordering compare_key(const Monomial& a, const Monomial& b);

enum class Side { left, right };

/// Graded differential polynomial in canonical normal form. Immutable value:
/// every operation returns a new normalized expression.
class Expression {
public:
  Expression() = default;
  explicit Expression(Rational constant, SignaturePtr sig = nullptr);
  Expression(long constant) : Expression(Rational(constant)) {} // NOLINT(google-explicit-constructor)

  static Expression symbol(SignaturePtr sig, const Symbol& s, int exponent = 1);
  /// Builds a single monomial from factors given in the stated left-to-right
  /// order; odd factors are reordered with their Koszul sign.
  static Expression product(SignaturePtr sig, Rational coefficient,
                            const std::vector<std::pair<Symbol, int>>& ordered_factors);
  /// Normalizes an arbitrary list of monomials (odd lists must already be
  /// sorted; use `product` otherwise).
  static Expression from_monomials(SignaturePtr sig, std::vector<Monomial> terms);

  const SignaturePtr& signature() const { return sig_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Value of a constant expression (0 for zero).
  std::optional<Rational> constant_value() const;

  /// Reinterprets the expression over a compatible (extending or extended)
  /// signature. Throws GeneratorMismatchError when symbols would not exist.
  Expression rebased(SignaturePtr sig) const;

  Expression operator-() const;
  Expression& operator+=(const Expression& other);
  Expression& operator-=(const Expression& other);
  Expression& operator*=(const Expression& other);
  friend Expression operator+(Expression a, const Expression& b) { return a += b; }
  friend Expression operator-(Expression a, const Expression& b) { return a -= b; }
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator*(const Rational& c, const Expression& e);

  /// Identical normal forms.
  friend bool operator==(const Expression& a, const Expression& b) { return a.terms_ == b.terms_; }

  /// Every distinct symbol occurring, in canonical order.
  std::vector<Symbol> symbols() const;
  /// Homogeneous components keyed by grading (empty for zero).
  std::vector<std::pair<Grading, Expression>> homogeneous_components() const;

private:
  void normalize();

  SignaturePtr sig_;
  std::vector<Monomial> terms_;
};

bool operator==(const Monomial& a, const Monomial& b);

Expression add(const Expression& a, const Expression& b);
Expression mul(const Expression& a, const Expression& b);

/// Graded partial derivative with respect to a symbol. For odd symbols the
/// left derivative picks up (-1)^(odd factors to the left of it), the right
/// derivative (-1)^(odd factors to its right).
Expression partial_derivative(const Expression& e, const Symbol& s, Side side = Side::left);

/// Common grading of a nonzero homogeneous expression.
Grading grading_of(const Expression& e);
Grading grading_of(const SignaturePtr& sig, const Monomial& m);

/// Simultaneous substitution of symbols followed by normalization.
Expression substitute(const Expression& e, const std::map<Symbol, Expression>& bindings);

/// Applies the derivation of the given parity that maps every symbol x to
/// image(x) (Leibniz rule with Koszul signs; derivation acts from the left).
Expression apply_derivation(const Expression& e, bool odd,
                            const std::function<Expression(const Symbol&)>& image);

/// Multiplicative inverse of a single-term expression made of a nonzero
/// rational and parameters only. Returns nullopt if not invertible.
std::optional<Expression> inverse(const Expression& e);

/// e^k for k >= 0; negative k requires an invertible e.
Expression power(const Expression& e, int k);

} // namespace jetbv
