#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jetbv {

using GenId = std::uint16_t;

inline constexpr std::size_t kMaxVariables = 6;
inline constexpr std::size_t kMaxIndexSlots = 4;

enum class Role : std::uint8_t { independent_variable, parameter, field, ghost, antifield };

std::string_view to_string(Role role);

/// (parity, ghost number, antifield number). Products add componentwise,
/// parity mod 2.
struct Grading {
  bool odd = false;
  int ghost_number = 0;
  int antifield_number = 0;

  Grading& operator+=(const Grading& other) {
    odd = odd != other.odd;
    ghost_number += other.ghost_number;
    antifield_number += other.antifield_number;
    return *this;
  }
  friend Grading operator+(Grading a, const Grading& b) { return a += b; }
  /// k-fold sum; k may be negative for invertible parameters.
  Grading times(int k) const {
    return {odd && (k % 2 != 0), ghost_number * k, antifield_number * k};
  }
  friend bool operator==(const Grading&, const Grading&) = default;
};

std::string to_string(const Grading& g);

/// Closed integer range [lo, hi]. Spacetime ranges run over the positions of
/// the independent variables and carry metric factors under contraction.
struct IndexRange {
  int lo = 0;
  int hi = -1;
  bool spacetime = false;

  int size() const { return hi - lo + 1; }
  bool contains(int v) const { return v >= lo && v <= hi; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct GeneratorSpec {
  std::string name;
  Role role = Role::field;
  std::vector<IndexRange> index_ranges;
  Grading grading;
  /// For antifields: the generator this one is dual to.
  std::optional<GenId> antifield_of;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

/// Component tuple of an indexed generator, e.g. A[a, mu] -> (2, 0).
struct Component {
  std::uint8_t size = 0;
  std::array<std::int16_t, kMaxIndexSlots> values{};

  Component() = default;
  Component(std::initializer_list<int> vs);
  static Component from(const std::vector<int>& vs);

  int operator[](std::size_t i) const { return values[i]; }
  std::vector<int> to_vector() const { return {values.begin(), values.begin() + size}; }

  friend bool operator==(const Component&, const Component&) = default;
  friend std::strong_ordering operator<=>(const Component& a, const Component& b);
};

/// Derivative counts per independent variable (unordered multi-index).
struct MultiIndex {
  std::array<std::uint8_t, kMaxVariables> counts{};

  int order() const;
  int operator[](std::size_t var) const { return counts[var]; }
  MultiIndex plus(std::size_t var, int k = 1) const;
  /// True when every count of `other` is <= the corresponding count here.
  bool contains(const MultiIndex& other) const;
  MultiIndex minus(const MultiIndex& other) const;

  static MultiIndex unit(std::size_t var) { return MultiIndex{}.plus(var); }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  /// Total order first, then counts lexicographically.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);
};

/// A polynomial generator of the expression algebra: an independent variable,
/// a parameter, or a jet coordinate u^a_alpha of a field/ghost/antifield.
/// Canonical order: generator declaration order, component, multi-index.
struct Symbol {
  GenId gen = 0;
  Component component;
  MultiIndex derivatives;

  friend bool operator==(const Symbol&, const Symbol&) = default;
  friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) {
    if (auto c = a.gen <=> b.gen; c != 0) return c;
    if (auto c = a.component <=> b.component; c != 0) return c;
    return a.derivatives <=> b.derivatives;
  }
};

class Signature;
using SignaturePtr = std::shared_ptr<const Signature>;

/// The declared generator set of a theory. Immutable once built; extensions
/// (e.g. adding antifields) keep all existing generator ids.
class Signature {
public:
  /// Validates and builds. Throws GradingError / Error on malformed specs.
  static SignaturePtr make(std::vector<GeneratorSpec> generators);

  /// A new signature whose generator list starts with this one's.
  SignaturePtr extended(std::vector<GeneratorSpec> extra) const;

  std::size_t size() const { return generators_.size(); }
  const GeneratorSpec& spec(GenId id) const { return generators_.at(id); }
  const std::vector<GeneratorSpec>& generators() const { return generators_; }
  std::optional<GenId> find(std::string_view name) const;

  std::size_t variable_count() const { return variables_.size(); }
  GenId variable(std::size_t position) const { return variables_.at(position); }
  /// Position of an independent variable among the variables, or -1.
  int variable_position(GenId id) const { return var_position_.at(id); }
  std::optional<std::size_t> find_variable(std::string_view name) const;

  /// The antifield generator dual to `id`, when present.
  std::optional<GenId> antifield(GenId id) const;

  bool is_jet(GenId id) const;
  const Grading& grading(GenId id) const { return generators_.at(id).grading; }
  bool is_odd(GenId id) const { return generators_.at(id).grading.odd; }

  /// All component tuples of a generator in lexicographic order.
  std::vector<Component> components(GenId id) const;
  bool valid_component(GenId id, const Component& c) const;

  /// True when `other`'s generator list is a prefix of ours.
  bool extends(const Signature& other) const;

  std::string symbol_name(const Symbol& s) const;

private:
  Signature() = default;
  void index();

  std::vector<GeneratorSpec> generators_;
  std::vector<GenId> variables_;
  std::vector<int> var_position_;
  std::vector<std::optional<GenId>> antifield_;
  std::unordered_map<std::string, GenId> by_name_;
};

/// Of two compatible signatures return the larger; throws
/// GeneratorMismatchError otherwise. Null means "constants only".
SignaturePtr common_signature(const SignaturePtr& a, const SignaturePtr& b);

} // namespace jetbv
