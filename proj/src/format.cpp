#include "jetbv/frontend.hpp"

#include <sstream>

namespace jetbv {

std::string format_rational(const Rational& q, Style style) {
  if (style == Style::plain || q.get_den() == 1) return q.get_str();
  std::string sign = q < 0 ? "-" : "";
  mpz_class num = abs(q.get_num());
  return sign + "\\frac{" + num.get_str() + "}{" + q.get_den().get_str() + "}";
}

namespace {

std::string components_text(const Component& c, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < c.size; ++i) {
    if (i) out += sep;
    out += std::to_string(c[i]);
  }
  return out;
}

std::string latex_base(const GeneratorSpec& g) {
  std::string name = g.name;
  if (g.role == Role::antifield && !name.empty() && name.back() == '*') {
    name.pop_back();
    return name + "^{*}";
  }
  return name;
}

} // namespace

std::string format_symbol(const Signature& sig, const Symbol& s, Style style) {
  const auto& g = sig.spec(s.gen);
  if (style == Style::plain) {
    std::string out = g.name;
    if (s.component.size > 0) out += "[" + components_text(s.component, ",") + "]";
    for (std::size_t v = 0; v < sig.variable_count(); ++v)
      for (int k = 0; k < s.derivatives[v]; ++k) out = "d(" + out + ";" + sig.spec(sig.variable(v)).name + ")";
    return out;
  }
  std::string sub = components_text(s.component, ",");
  std::string derivs;
  for (std::size_t v = 0; v < sig.variable_count(); ++v)
    for (int k = 0; k < s.derivatives[v]; ++k) derivs += sig.spec(sig.variable(v)).name;
  if (!derivs.empty()) sub += (sub.empty() ? "" : ",") + derivs;
  std::string out = latex_base(g);
  if (!sub.empty()) out += "_{" + sub + "}";
  return out;
}

namespace {

std::string factor_text(const Signature& sig, const Symbol& s, int exponent, Style style) {
  std::string base = format_symbol(sig, s, style);
  if (exponent == 1) return base;
  if (style == Style::plain) return base + "^" + std::to_string(exponent);
  if (base.find('_') != std::string::npos || base.find('^') != std::string::npos) base = "{" + base + "}";
  return base + "^{" + std::to_string(exponent) + "}";
}

} // namespace

std::string format_expression(const Expression& e, Style style) {
  if (e.is_zero()) return "0";
  const char* joiner = style == Style::plain ? " * " : "\\,";
  std::ostringstream os;
  bool first = true;
  for (const auto& m : e.terms()) {
    const bool negative = m.coefficient < 0;
    const Rational magnitude = abs(m.coefficient);
    if (first)
      os << (negative ? "-" : "");
    else
      os << (negative ? " - " : " + ");
    first = false;
    std::vector<std::string> parts;
    if (magnitude != 1 || m.is_constant()) parts.push_back(format_rational(magnitude, style));
    for (const auto& f : m.even) parts.push_back(factor_text(*e.signature(), f.symbol, f.exponent, style));
    for (const auto& s : m.odd) parts.push_back(factor_text(*e.signature(), s, 1, style));
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? joiner : "") << parts[i];
  }
  return os.str();
}

} // namespace jetbv
