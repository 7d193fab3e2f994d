#include "jetbv/expression.hpp"

#include "jetbv/error.hpp"

#include <algorithm>
#include <set>

namespace jetbv {

std::strong_ordering compare_key(const Monomial& a, const Monomial& b) {
  const std::size_t n = std::min(a.even.size(), b.even.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a.even[i].symbol <=> b.even[i].symbol; c != 0) return c;
    if (auto c = a.even[i].exponent <=> b.even[i].exponent; c != 0) return c;
  }
  if (auto c = a.even.size() <=> b.even.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.odd.begin(), a.odd.end(), b.odd.begin(), b.odd.end());
}

bool operator==(const Monomial& a, const Monomial& b) {
  return a.coefficient == b.coefficient && same_key(a, b);
}

namespace {

// Multiplies factor parts; returns false when the product vanishes (repeated
// odd factor). The Koszul sign of merging the odd lists is applied to out.
bool multiply(const Monomial& a, const Monomial& b, Monomial& out) {
  out.coefficient = a.coefficient * b.coefficient;
  out.even.clear();
  out.odd.clear();
  out.even.reserve(a.even.size() + b.even.size());
  auto ia = a.even.begin(), ib = b.even.begin();
  while (ia != a.even.end() || ib != b.even.end()) {
    if (ib == b.even.end() || (ia != a.even.end() && ia->symbol < ib->symbol)) {
      out.even.push_back(*ia++);
    } else if (ia == a.even.end() || ib->symbol < ia->symbol) {
      out.even.push_back(*ib++);
    } else {
      int e = ia->exponent + ib->exponent;
      if (e != 0) out.even.push_back({ia->symbol, e});
      ++ia;
      ++ib;
    }
  }
  out.odd.reserve(a.odd.size() + b.odd.size());
  std::size_t i = 0, j = 0;
  bool negative = false;
  while (i < a.odd.size() || j < b.odd.size()) {
    if (j == b.odd.size() || (i < a.odd.size() && a.odd[i] < b.odd[j])) {
      out.odd.push_back(a.odd[i++]);
    } else if (i == a.odd.size() || b.odd[j] < a.odd[i]) {
      // b.odd[j] jumps over the remaining factors of a.
      if ((a.odd.size() - i) % 2 == 1) negative = !negative;
      out.odd.push_back(b.odd[j++]);
    } else {
      return false;
    }
  }
  if (negative) out.coefficient = -out.coefficient;
  return true;
}

// Sorts an odd list in place, returning the permutation sign, or 0 when a
// factor repeats.
int sort_odd(std::vector<Symbol>& odd) {
  int sign = 1;
  for (std::size_t i = 1; i < odd.size(); ++i) {
    for (std::size_t k = i; k > 0; --k) {
      if (odd[k] == odd[k - 1]) return 0;
      if (odd[k] < odd[k - 1]) {
        std::swap(odd[k], odd[k - 1]);
        sign = -sign;
      } else {
        break;
      }
    }
  }
  for (std::size_t i = 1; i < odd.size(); ++i)
    if (odd[i] == odd[i - 1]) return 0;
  return sign;
}

Expression make(SignaturePtr sig, std::vector<Monomial> terms) {
  return Expression::from_monomials(std::move(sig), std::move(terms));
}

Expression single(const SignaturePtr& sig, Monomial m) {
  std::vector<Monomial> v;
  v.push_back(std::move(m));
  return make(sig, std::move(v));
}

} // namespace

Expression::Expression(Rational constant, SignaturePtr sig) : sig_(std::move(sig)) {
  if (constant != 0) {
    Monomial m;
    m.coefficient = std::move(constant);
    terms_.push_back(std::move(m));
  }
}

Expression Expression::symbol(SignaturePtr sig, const Symbol& s, int exponent) {
  return product(std::move(sig), Rational(1), {{s, exponent}});
}

Expression Expression::product(SignaturePtr sig, Rational coefficient,
                               const std::vector<std::pair<Symbol, int>>& ordered_factors) {
  Monomial m;
  m.coefficient = std::move(coefficient);
  for (const auto& [s, k] : ordered_factors) {
    if (!sig) throw GeneratorMismatchError("symbol without a signature");
    if (s.gen >= sig->size()) throw UnknownGeneratorError("generator id out of range");
    const auto& spec = sig->spec(s.gen);
    if (k < 0 && spec.role != Role::parameter)
      throw DomainError("negative exponent on non-parameter '" + spec.name + "'");
    if (k == 0) continue;
    if (spec.grading.odd) {
      if (k > 1) return Expression(Rational(0), sig);
      m.odd.push_back(s);
    } else {
      m.even.push_back({s, k});
    }
  }
  int sign = sort_odd(m.odd);
  if (sign == 0) return Expression(Rational(0), sig);
  if (sign < 0) m.coefficient = -m.coefficient;
  std::sort(m.even.begin(), m.even.end(), [](const Factor& a, const Factor& b) { return a.symbol < b.symbol; });
  std::vector<Factor> merged;
  for (const auto& f : m.even) {
    if (!merged.empty() && merged.back().symbol == f.symbol) {
      merged.back().exponent += f.exponent;
      if (merged.back().exponent == 0) merged.pop_back();
    } else {
      merged.push_back(f);
    }
  }
  m.even = std::move(merged);
  return single(sig, std::move(m));
}

Expression Expression::from_monomials(SignaturePtr sig, std::vector<Monomial> terms) {
  Expression e;
  e.sig_ = std::move(sig);
  e.terms_ = std::move(terms);
  e.normalize();
  return e;
}

void Expression::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return compare_key(a, b) < 0; });
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (auto& m : terms_) {
    if (!out.empty() && same_key(out.back(), m)) {
      out.back().coefficient += m.coefficient;
    } else {
      if (!out.empty() && out.back().coefficient == 0) out.pop_back();
      out.push_back(std::move(m));
    }
  }
  if (!out.empty() && out.back().coefficient == 0) out.pop_back();
  terms_ = std::move(out);
}

bool Expression::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].is_constant());
}

std::optional<Rational> Expression::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_[0].is_constant()) return terms_[0].coefficient;
  return std::nullopt;
}

Expression Expression::rebased(SignaturePtr sig) const {
  if (sig == sig_) return *this;
  if (!sig) {
    if (!is_constant()) throw GeneratorMismatchError("cannot drop the signature of a non-constant expression");
    Expression e = *this;
    e.sig_ = nullptr;
    return e;
  }
  if (sig_ && !sig->extends(*sig_)) {
    if (!sig_->extends(*sig)) throw GeneratorMismatchError("incompatible signatures");
    for (const auto& s : symbols())
      if (s.gen >= sig->size())
        throw GeneratorMismatchError("generator '" + sig_->spec(s.gen).name + "' does not exist in the target signature");
  }
  Expression e = *this;
  e.sig_ = std::move(sig);
  return e;
}

Expression Expression::operator-() const {
  Expression e = *this;
  for (auto& m : e.terms_) m.coefficient = -m.coefficient;
  return e;
}

Expression& Expression::operator+=(const Expression& other) {
  sig_ = common_signature(sig_, other.sig_);
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

Expression& Expression::operator-=(const Expression& other) { return *this += -other; }

Expression& Expression::operator*=(const Expression& other) {
  *this = *this * other;
  return *this;
}

Expression operator*(const Expression& a, const Expression& b) {
  auto sig = common_signature(a.sig_, b.sig_);
  std::vector<Monomial> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  Monomial m;
  for (const auto& x : a.terms_)
    for (const auto& y : b.terms_)
      if (multiply(x, y, m)) out.push_back(m);
  return make(sig, std::move(out));
}

Expression operator*(const Rational& c, const Expression& e) {
  if (c == 0) return Expression(Rational(0), e.sig_);
  Expression r = e;
  for (auto& m : r.terms_) m.coefficient *= c;
  return r;
}

std::vector<Symbol> Expression::symbols() const {
  std::set<Symbol> all;
  for (const auto& m : terms_) {
    for (const auto& f : m.even) all.insert(f.symbol);
    for (const auto& s : m.odd) all.insert(s);
  }
  return {all.begin(), all.end()};
}

Grading grading_of(const SignaturePtr& sig, const Monomial& m) {
  Grading g;
  if (m.is_constant()) return g;
  if (!sig) throw GeneratorMismatchError("symbol without a signature");
  for (const auto& f : m.even) g += sig->grading(f.symbol.gen).times(f.exponent);
  for (const auto& s : m.odd) g += sig->grading(s.gen);
  return g;
}

std::vector<std::pair<Grading, Expression>> Expression::homogeneous_components() const {
  std::vector<std::pair<Grading, std::vector<Monomial>>> groups;
  for (const auto& m : terms_) {
    Grading g = grading_of(sig_, m);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& p) { return p.first == g; });
    if (it == groups.end()) {
      groups.push_back({g, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(m);
  }
  std::vector<std::pair<Grading, Expression>> out;
  for (auto& [g, ms] : groups) out.emplace_back(g, make(sig_, std::move(ms)));
  return out;
}

Expression add(const Expression& a, const Expression& b) { return a + b; }
Expression mul(const Expression& a, const Expression& b) { return a * b; }

Expression partial_derivative(const Expression& e, const Symbol& s, Side side) {
  std::vector<Monomial> out;
  for (const auto& m : e.terms()) {
    auto fe = std::find_if(m.even.begin(), m.even.end(), [&](const Factor& f) { return f.symbol == s; });
    if (fe != m.even.end()) {
      Monomial r = m;
      auto& f = r.even[fe - m.even.begin()];
      r.coefficient *= f.exponent;
      if (--f.exponent == 0) r.even.erase(r.even.begin() + (fe - m.even.begin()));
      out.push_back(std::move(r));
      continue;
    }
    auto fo = std::find(m.odd.begin(), m.odd.end(), s);
    if (fo != m.odd.end()) {
      const std::size_t pos = fo - m.odd.begin();
      const std::size_t jumps = side == Side::left ? pos : m.odd.size() - 1 - pos;
      Monomial r = m;
      r.odd.erase(r.odd.begin() + pos);
      if (jumps % 2 == 1) r.coefficient = -r.coefficient;
      out.push_back(std::move(r));
    }
  }
  return make(e.signature(), std::move(out));
}

Grading grading_of(const Expression& e) {
  if (e.is_zero()) throw ZeroExpressionError("grading of the zero expression is undefined");
  Grading g = grading_of(e.signature(), e.terms().front());
  for (const auto& m : e.terms()) {
    if (grading_of(e.signature(), m) != g) {
      std::string msg = "inhomogeneous expression; gradings present:";
      for (const auto& [h, part] : e.homogeneous_components()) msg += " " + to_string(h);
      throw InhomogeneousError(msg);
    }
  }
  return g;
}

std::optional<Expression> inverse(const Expression& e) {
  if (e.terms().size() != 1) return std::nullopt;
  const Monomial& m = e.terms().front();
  if (!m.odd.empty()) return std::nullopt;
  Monomial r;
  r.coefficient = 1 / m.coefficient;
  for (const auto& f : m.even) {
    if (!e.signature() || e.signature()->spec(f.symbol.gen).role != Role::parameter) return std::nullopt;
    r.even.push_back({f.symbol, -f.exponent});
  }
  return single(e.signature(), std::move(r));
}

Expression power(const Expression& e, int k) {
  if (k < 0) {
    auto inv = inverse(e);
    if (!inv) throw DomainError("negative power of a non-invertible expression");
    return power(*inv, -k);
  }
  Expression result(Rational(1), e.signature());
  Expression base = e;
  while (k > 0) {
    if (k & 1) result *= base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

Expression substitute(const Expression& e, const std::map<Symbol, Expression>& bindings) {
  auto sig = e.signature();
  for (const auto& [s, value] : bindings) {
    sig = common_signature(sig, value.signature());
    if (value.is_zero()) continue;
    if (!e.signature()) continue;
    if (s.gen >= e.signature()->size()) throw UnknownGeneratorError("binding for an unknown generator");
    const Grading want = e.signature()->grading(s.gen);
    const Grading got = grading_of(value);
    if (got != want)
      throw GradingError("substitution for " + e.signature()->symbol_name(s) + " has grading " + to_string(got) +
                         ", expected " + to_string(want));
  }
  Expression result(Rational(0), sig);
  for (const auto& m : e.terms()) {
    Expression term(m.coefficient, sig);
    for (const auto& f : m.even) {
      auto it = bindings.find(f.symbol);
      if (it == bindings.end())
        term = term * Expression::symbol(sig, f.symbol, f.exponent);
      else
        term = term * power(it->second, f.exponent);
      if (term.is_zero()) break;
    }
    for (const auto& s : m.odd) {
      if (term.is_zero()) break;
      auto it = bindings.find(s);
      term = term * (it == bindings.end() ? Expression::symbol(sig, s) : it->second);
    }
    result += term;
  }
  return result;
}

Expression apply_derivation(const Expression& e, bool odd,
                            const std::function<Expression(const Symbol&)>& image) {
  SignaturePtr sig = e.signature();
  std::vector<Monomial> out;
  auto emit = [&](const Monomial& prefix, const Expression& img, const Monomial& suffix, bool negate) {
    sig = common_signature(sig, img.signature());
    Monomial a, b;
    for (const auto& x : img.terms()) {
      if (!multiply(prefix, x, a)) continue;
      if (!multiply(a, suffix, b)) continue;
      if (negate) b.coefficient = -b.coefficient;
      out.push_back(b);
    }
  };
  Monomial suffix_all;
  for (const auto& m : e.terms()) {
    suffix_all.coefficient = 1;
    suffix_all.even.clear();
    suffix_all.odd = m.odd;
    for (std::size_t i = 0; i < m.even.size(); ++i) {
      Expression img = image(m.even[i].symbol);
      if (img.is_zero()) continue;
      Monomial prefix;
      prefix.coefficient = m.coefficient * m.even[i].exponent;
      prefix.even = m.even;
      if (--prefix.even[i].exponent == 0) prefix.even.erase(prefix.even.begin() + i);
      emit(prefix, img, suffix_all, false);
    }
    for (std::size_t i = 0; i < m.odd.size(); ++i) {
      Expression img = image(m.odd[i]);
      if (img.is_zero()) continue;
      Monomial prefix;
      prefix.coefficient = m.coefficient;
      prefix.even = m.even;
      prefix.odd.assign(m.odd.begin(), m.odd.begin() + i);
      Monomial suffix;
      suffix.odd.assign(m.odd.begin() + i + 1, m.odd.end());
      emit(prefix, img, suffix, odd && (i % 2 == 1));
    }
  }
  return make(sig, std::move(out));
}

} // namespace jetbv
