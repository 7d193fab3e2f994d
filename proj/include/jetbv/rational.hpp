#pragma once

#include <gmpxx.h>

#include <string>

namespace jetbv {

using Rational = mpq_class;

/// Canonical rational num/den. Throws std::domain_error on a zero denominator.
Rational make_rational(long num, long den = 1);

/// Parses "p", "-p" or "p/q".
Rational parse_rational(const std::string& text);

inline std::string to_string(const Rational& q) { return q.get_str(); }

} // namespace jetbv
