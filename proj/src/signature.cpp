#include "jetbv/signature.hpp"

#include "jetbv/error.hpp"
#include "jetbv/rational.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace jetbv {

Rational make_rational(long num, long den) {
  if (den == 0) throw std::domain_error("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational parse_rational(const std::string& text) {
  Rational q;
  if (q.set_str(text, 10) != 0) throw std::invalid_argument("not a rational: " + text);
  if (q.get_den() == 0) throw std::domain_error("zero denominator");
  q.canonicalize();
  return q;
}

std::string_view to_string(Role role) {
  switch (role) {
  case Role::independent_variable: return "independent-variable";
  case Role::parameter: return "parameter";
  case Role::field: return "field";
  case Role::ghost: return "ghost";
  case Role::antifield: return "antifield";
  }
  return "?";
}

std::string to_string(const Grading& g) {
  std::ostringstream os;
  os << "(" << (g.odd ? "odd" : "even") << ", gh=" << g.ghost_number
     << ", afn=" << g.antifield_number << ")";
  return os.str();
}

Component::Component(std::initializer_list<int> vs) {
  if (vs.size() > kMaxIndexSlots) throw Error("too many index slots");
  for (int v : vs) values[size++] = static_cast<std::int16_t>(v);
}

Component Component::from(const std::vector<int>& vs) {
  if (vs.size() > kMaxIndexSlots) throw Error("too many index slots");
  Component c;
  for (int v : vs) c.values[c.size++] = static_cast<std::int16_t>(v);
  return c;
}

std::strong_ordering operator<=>(const Component& a, const Component& b) {
  const std::size_t n = std::min(a.size, b.size);
  for (std::size_t i = 0; i < n; ++i)
    if (auto c = a.values[i] <=> b.values[i]; c != 0) return c;
  return a.size <=> b.size;
}

int MultiIndex::order() const { return std::accumulate(counts.begin(), counts.end(), 0); }

MultiIndex MultiIndex::plus(std::size_t var, int k) const {
  MultiIndex r = *this;
  int v = r.counts.at(var) + k;
  if (v < 0 || v > 255) throw Error("derivative count out of range");
  r.counts[var] = static_cast<std::uint8_t>(v);
  return r;
}

bool MultiIndex::contains(const MultiIndex& other) const {
  for (std::size_t i = 0; i < kMaxVariables; ++i)
    if (other.counts[i] > counts[i]) return false;
  return true;
}

MultiIndex MultiIndex::minus(const MultiIndex& other) const {
  MultiIndex r;
  for (std::size_t i = 0; i < kMaxVariables; ++i)
    r.counts[i] = static_cast<std::uint8_t>(counts[i] - other.counts[i]);
  return r;
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.order() <=> b.order(); c != 0) return c;
  return a.counts <=> b.counts;
}

namespace {

void validate(const GeneratorSpec& g) {
  if (g.name.empty()) throw Error("generator with empty name");
  if (g.index_ranges.size() > kMaxIndexSlots)
    throw Error("generator '" + g.name + "' has too many index slots");
  for (const auto& r : g.index_ranges)
    if (r.size() <= 0) throw Error("generator '" + g.name + "' has an empty index range");
  if (g.grading.antifield_number < 0)
    throw GradingError("generator '" + g.name + "' has negative antifield number");
  switch (g.role) {
  case Role::independent_variable:
  case Role::parameter:
    if (g.grading != Grading{})
      throw GradingError("'" + g.name + "': independent variables and parameters are even with ghost number 0");
    if (!g.index_ranges.empty())
      throw Error("'" + g.name + "': independent variables and parameters carry no indices");
    break;
  case Role::field:
    if (g.grading.antifield_number != 0)
      throw GradingError("field '" + g.name + "' must have antifield number 0");
    break;
  case Role::ghost:
    if (g.grading.ghost_number < 1)
      throw GradingError("ghost '" + g.name + "' must have ghost number >= 1");
    if (g.grading.antifield_number != 0)
      throw GradingError("ghost '" + g.name + "' must have antifield number 0");
    break;
  case Role::antifield:
    if (g.grading.ghost_number > -1)
      throw GradingError("antifield '" + g.name + "' must have ghost number <= -1");
    if (!g.antifield_of) throw Error("antifield '" + g.name + "' has no dual generator");
    break;
  }
}

} // namespace

SignaturePtr Signature::make(std::vector<GeneratorSpec> generators) {
  if (generators.size() > 0xFFFF) throw Error("too many generators");
  std::shared_ptr<Signature> sig(new Signature());
  sig->generators_ = std::move(generators);
  sig->index();
  return sig;
}

SignaturePtr Signature::extended(std::vector<GeneratorSpec> extra) const {
  std::vector<GeneratorSpec> all = generators_;
  all.insert(all.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  return make(std::move(all));
}

void Signature::index() {
  var_position_.assign(generators_.size(), -1);
  antifield_.assign(generators_.size(), std::nullopt);
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const auto& g = generators_[i];
    validate(g);
    if (!by_name_.emplace(g.name, static_cast<GenId>(i)).second)
      throw Error("duplicate generator name '" + g.name + "'");
    if (g.role == Role::independent_variable) {
      var_position_[i] = static_cast<int>(variables_.size());
      variables_.push_back(static_cast<GenId>(i));
    }
  }
  if (variables_.size() > kMaxVariables) throw Error("too many independent variables");
  for (std::size_t i = 0; i < generators_.size(); ++i) {
    const auto& g = generators_[i];
    if (g.role != Role::antifield) continue;
    GenId of = *g.antifield_of;
    if (of >= generators_.size()) throw Error("antifield '" + g.name + "' refers to an unknown generator");
    const auto& base = generators_[of];
    if (base.role != Role::field && base.role != Role::ghost)
      throw Error("antifield '" + g.name + "' must be dual to a field or ghost");
    if (base.index_ranges != g.index_ranges)
      throw Error("antifield '" + g.name + "' index ranges differ from its field");
    if (antifield_[of]) throw Error("generator '" + base.name + "' has two antifields");
    antifield_[of] = static_cast<GenId>(i);
  }
}

std::optional<GenId> Signature::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Signature::find_variable(std::string_view name) const {
  auto id = find(name);
  if (!id || var_position_[*id] < 0) return std::nullopt;
  return static_cast<std::size_t>(var_position_[*id]);
}

std::optional<GenId> Signature::antifield(GenId id) const { return antifield_.at(id); }

bool Signature::is_jet(GenId id) const {
  Role r = generators_.at(id).role;
  return r == Role::field || r == Role::ghost || r == Role::antifield;
}

std::vector<Component> Signature::components(GenId id) const {
  const auto& ranges = generators_.at(id).index_ranges;
  std::vector<Component> out;
  std::vector<int> cur;
  for (const auto& r : ranges) cur.push_back(r.lo);
  while (true) {
    out.push_back(Component::from(cur));
    std::size_t k = ranges.size();
    while (k > 0) {
      --k;
      if (cur[k] < ranges[k].hi) {
        ++cur[k];
        for (std::size_t j = k + 1; j < ranges.size(); ++j) cur[j] = ranges[j].lo;
        break;
      }
      if (k == 0) return out;
    }
    if (ranges.empty()) return out;
  }
}

bool Signature::valid_component(GenId id, const Component& c) const {
  const auto& ranges = generators_.at(id).index_ranges;
  if (c.size != ranges.size()) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (!ranges[i].contains(c[i])) return false;
  return true;
}

bool Signature::extends(const Signature& other) const {
  if (other.generators_.size() > generators_.size()) return false;
  return std::equal(other.generators_.begin(), other.generators_.end(), generators_.begin());
}

std::string Signature::symbol_name(const Symbol& s) const {
  std::ostringstream os;
  os << spec(s.gen).name;
  if (s.component.size > 0) {
    os << "[";
    for (std::size_t i = 0; i < s.component.size; ++i) os << (i ? "," : "") << s.component[i];
    os << "]";
  }
  for (std::size_t v = 0; v < variables_.size(); ++v)
    for (int k = 0; k < s.derivatives[v]; ++k) os << "_" << spec(variables_[v]).name;
  return os.str();
}

SignaturePtr common_signature(const SignaturePtr& a, const SignaturePtr& b) {
  if (!a) return b;
  if (!b || a == b) return a;
  if (a->extends(*b)) return a;
  if (b->extends(*a)) return b;
  throw GeneratorMismatchError("expressions reference generators of different theories");
}

} // namespace jetbv
