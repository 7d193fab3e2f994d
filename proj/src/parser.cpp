#include "jetbv/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace jetbv {

ParseError::ParseError(int line, int column, std::string message, std::vector<std::string> expected,
                       std::string source_line)
    : Error([&] {
        std::ostringstream os;
        os << "line " << line << ", column " << column << ": " << message;
        if (!expected.empty()) {
          os << " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
          os << ")";
        }
        return os.str();
      }()),
      line_(line), column_(column), message_(std::move(message)), expected_(std::move(expected)),
      source_line_(std::move(source_line)) {}

std::string ParseError::caret() const {
  if (source_line_.empty()) return {};
  return source_line_ + "\n" + std::string(static_cast<std::size_t>(std::max(column_ - 1, 0)), ' ') + "^";
}

namespace detail {

enum class Tok { ident, number, punct, dotdot, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  int line = 1;
  int col = 1;
  bool space_before = false;
  bool starts_line = false;
};

struct IndexArg {
  bool literal = false;
  int value = 0;
  std::string letter;
  int line = 1, col = 1;
};

struct Occurrence {
  std::string letter;
  bool upper = false;
  int line = 1, col = 1;
};

struct Contraction {
  std::string letter;
  bool upper_a = false;
  bool upper_b = false;
};

enum class Resolved { none, variable, parameter, generator, definition, eps, delta };

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  enum Kind { num, atom, deriv, el, neg, sum, prod, pow } kind = num;
  int line = 1, col = 1;

  Rational value;
  // atom
  std::string name;
  bool antifield = false;
  std::vector<IndexArg> args;
  Resolved resolved = Resolved::none;
  GenId gen = 0;
  // deriv: index of the variable
  IndexArg var;
  // children; sum: flags = negated, prod: flags = divisor
  std::vector<NodePtr> kids;
  std::vector<bool> flags;
  int exponent = 1;

  std::vector<Occurrence> free;
  std::vector<Contraction> contracted;
};

struct Definition {
  std::vector<std::string> formals;
  NodePtr body;
};

struct ParserState {
  SignaturePtr theory_sig;
  SignaturePtr bv_sig;
  SignaturePtr full_sig; // bv + EL placeholders
  std::vector<Rational> metric;
  std::map<std::string, IndexRange> letters;
  std::map<std::string, Definition> defs;
  std::map<GenId, GenId> placeholder_field; // EL placeholder -> field
  std::map<GenId, GenId> field_placeholder;
  std::vector<std::string> source_lines;

  void build_signatures(std::vector<GeneratorSpec> specs) {
    theory_sig = Signature::make(std::move(specs));
    bv_sig = theory_sig->extended(antifield_specs(*theory_sig));
    std::vector<GeneratorSpec> placeholders;
    for (std::size_t i = 0; i < theory_sig->size(); ++i) {
      const auto& g = theory_sig->spec(static_cast<GenId>(i));
      if (g.role != Role::field) continue;
      GeneratorSpec p = g;
      p.name = "EL(" + g.name + ")";
      placeholders.push_back(p);
      GenId pid = static_cast<GenId>(bv_sig->size() + placeholders.size() - 1);
      placeholder_field[pid] = static_cast<GenId>(i);
      field_placeholder[static_cast<GenId>(i)] = pid;
    }
    full_sig = bv_sig->extended(std::move(placeholders));
  }

  std::string line_text(int line) const {
    if (line >= 1 && static_cast<std::size_t>(line) <= source_lines.size()) return source_lines[line - 1];
    return {};
  }

  [[noreturn]] void fail(int line, int col, const std::string& msg, std::vector<std::string> expected = {}) const {
    throw ParseError(line, col, msg, std::move(expected), line_text(line));
  }
};

// ---------------------------------------------------------------- lexer

std::vector<Token> lex(std::string_view text, const ParserState& st) {
  std::vector<Token> out;
  int line = 1, col = 1;
  bool space = true, line_start = true;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
        line_start = true;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    t.space_before = space;
    t.starts_line = line_start;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      t.kind = Tok::ident;
      t.text = std::string(text.substr(i, j - i));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.kind = Tok::number;
      t.text = std::string(text.substr(i, j - i));
    } else if (c == '.' && i + 1 < text.size() && text[i + 1] == '.') {
      t.kind = Tok::dotdot;
      t.text = "..";
    } else if (std::string_view("+-*/^()[],;=").find(c) != std::string_view::npos) {
      t.kind = Tok::punct;
      t.text = std::string(1, c);
    } else {
      st.fail(line, col, std::string("unexpected character '") + c + "'");
    }
    const std::size_t n = t.text.size();
    out.push_back(std::move(t));
    advance(n);
    space = false;
    line_start = false;
  }
  Token end;
  end.kind = Tok::end;
  end.line = line;
  end.col = col;
  end.space_before = true;
  end.starts_line = true;
  out.push_back(end);
  return out;
}

bool is_reserved(const std::string& s) {
  return s == "d" || s == "EL" || s == "eps" || s == "delta" || s == "diag" || s == "vars";
}

// ---------------------------------------------------------------- parser

class Parser {
public:
  Parser(ParserState& st, std::vector<Token> toks, std::size_t begin, std::size_t end)
      : st_(st), toks_(std::move(toks)), pos_(begin), end_(end) {}

  const Token& peek(std::size_t k = 0) const {
    std::size_t p = std::min(pos_ + k, end_);
    return toks_[p];
  }
  bool at_end() const { return pos_ >= end_; }
  const Token& next() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  bool is(const char* punct, std::size_t k = 0) const {
    const Token& t = peek(k);
    return (pos_ + k) < end_ && t.kind == Tok::punct && t.text == punct;
  }
  bool is_ident(const char* word) const {
    return !at_end() && peek().kind == Tok::ident && peek().text == word;
  }
  [[noreturn]] void fail_here(const std::string& msg, std::vector<std::string> expected = {}) const {
    const Token& t = peek();
    st_.fail(t.line, t.col, msg, std::move(expected));
  }
  void expect(const char* punct) {
    if (!is(punct)) fail_here(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'",
                              {std::string("'") + punct + "'"});
    next();
  }
  std::string expect_ident() {
    if (at_end() || peek().kind != Tok::ident)
      fail_here(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'", {"identifier"});
    return next().text;
  }
  int expect_int() {
    bool neg = false;
    if (is("-")) {
      next();
      neg = true;
    }
    if (at_end() || peek().kind != Tok::number)
      fail_here(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'", {"integer"});
    int v = std::stoi(next().text);
    return neg ? -v : v;
  }
  Rational expect_rational() {
    bool neg = false;
    if (is("-")) {
      next();
      neg = true;
    }
    if (at_end() || peek().kind != Tok::number)
      fail_here(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'", {"number"});
    Rational q(next().text);
    if (is("/")) {
      next();
      if (at_end() || peek().kind != Tok::number) fail_here("expected a denominator", {"integer"});
      const Token& d = next();
      Rational den(d.text);
      if (den == 0) st_.fail(d.line, d.col, "zero denominator");
      q /= den;
    }
    return neg ? Rational(-q) : q;
  }
  void expect_end() {
    if (!at_end()) fail_here("unexpected '" + peek().text + "'", {"end of statement"});
  }

  // expr := term (('+'|'-') term)*
  NodePtr expr() {
    const Token& first = peek();
    NodePtr n = term();
    if (!is("+") && !is("-")) return n;
    auto s = std::make_shared<Node>();
    s->kind = Node::sum;
    s->line = first.line;
    s->col = first.col;
    s->kids.push_back(n);
    s->flags.push_back(false);
    while (is("+") || is("-")) {
      bool minus = next().text == "-";
      s->kids.push_back(term());
      s->flags.push_back(minus);
    }
    return s;
  }

  // term := unary (('*'|'/') unary)*
  NodePtr term() {
    const Token& first = peek();
    NodePtr n = unary();
    if (!is("*") && !is("/")) return n;
    auto p = std::make_shared<Node>();
    p->kind = Node::prod;
    p->line = first.line;
    p->col = first.col;
    p->kids.push_back(n);
    p->flags.push_back(false);
    while (is("*") || is("/")) {
      bool divide = next().text == "/";
      p->kids.push_back(unary());
      p->flags.push_back(divide);
    }
    return p;
  }

  NodePtr unary() {
    if (is("-")) {
      const Token& t = next();
      auto n = std::make_shared<Node>();
      n->kind = Node::neg;
      n->line = t.line;
      n->col = t.col;
      n->kids.push_back(unary());
      return n;
    }
    if (is("+")) {
      next();
      return unary();
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!is("^")) return base;
    const Token& t = next();
    auto n = std::make_shared<Node>();
    n->kind = Node::pow;
    n->line = t.line;
    n->col = t.col;
    n->kids.push_back(base);
    n->exponent = expect_int();
    return n;
  }

  IndexArg index_arg() {
    IndexArg a;
    a.line = peek().line;
    a.col = peek().col;
    if (!at_end() && (peek().kind == Tok::number || is("-"))) {
      a.literal = true;
      a.value = expect_int();
    } else if (!at_end() && peek().kind == Tok::ident) {
      a.letter = next().text;
    } else {
      fail_here(at_end() ? "unexpected end of input" : "unexpected '" + peek().text + "'",
                {"index letter", "integer"});
    }
    return a;
  }

  // An identifier names a field or ghost that has an antifield.
  bool has_antifield(const std::string& name) const {
    auto id = st_.bv_sig->find(name);
    return id && st_.bv_sig->antifield(*id).has_value();
  }

  // A '*' glued to the preceding token and not glued to an operand marks an
  // antifield.
  bool antifield_star() const {
    if (!is("*") || peek().space_before) return false;
    const Token& after = peek(1);
    if (pos_ + 1 >= end_) return true;
    if (after.space_before) return true;
    if (after.kind == Tok::punct && std::string_view("[),;+-*^=").find(after.text[0]) != std::string_view::npos)
      return true;
    return false;
  }

  NodePtr primary() {
    if (at_end()) fail_here("unexpected end of input", {"number", "identifier", "'('"});
    const Token& t = peek();
    auto n = std::make_shared<Node>();
    n->line = t.line;
    n->col = t.col;
    if (t.kind == Tok::number) {
      next();
      n->kind = Node::num;
      n->value = Rational(t.text);
      return n;
    }
    if (is("(")) {
      next();
      NodePtr inner = expr();
      expect(")");
      return inner;
    }
    if (t.kind != Tok::ident)
      fail_here("unexpected '" + t.text + "'", {"number", "identifier", "'('"});
    if (t.text == "d" && is("(", 1)) {
      next();
      next();
      n->kind = Node::deriv;
      n->kids.push_back(expr());
      expect(";");
      n->var = index_arg();
      expect(")");
      return n;
    }
    if (t.text == "EL" && is("(", 1)) {
      next();
      next();
      n->kind = Node::el;
      if (at_end() || peek().kind != Tok::ident) fail_here("EL(...) expects a field", {"field"});
      n->kids.push_back(atom());
      expect(")");
      return n;
    }
    return atom();
  }

  NodePtr atom() {
    const Token& t = next();
    auto n = std::make_shared<Node>();
    n->kind = Node::atom;
    n->line = t.line;
    n->col = t.col;
    n->name = t.text;
    if (has_antifield(n->name) && antifield_star()) {
      next();
      n->antifield = true;
    }
    if (is("[") && !peek().space_before) {
      next();
      n->args.push_back(index_arg());
      while (is(",")) {
        next();
        n->args.push_back(index_arg());
      }
      expect("]");
      if (!n->antifield && has_antifield(n->name) && antifield_star()) {
        next();
        n->antifield = true;
      }
    }
    return n;
  }

  std::size_t position() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::size_t end() const { return end_; }
  const std::vector<Token>& tokens() const { return toks_; }

private:
  ParserState& st_;
  std::vector<Token> toks_;
  std::size_t pos_;
  std::size_t end_;
};

// ---------------------------------------------------------------- analysis

struct Analyzer {
  const ParserState& st;
  bool allow_el = false;

  const IndexRange& letter_range(const std::string& letter, int line, int col) const {
    auto it = st.letters.find(letter);
    if (it == st.letters.end()) st.fail(line, col, "undeclared index letter '" + letter + "'");
    return it->second;
  }

  void check_slot(const IndexArg& a, const IndexRange& slot, const std::string& owner) const {
    if (a.literal) return; // checked at evaluation
    const IndexRange& r = letter_range(a.letter, a.line, a.col);
    if (!(r == slot))
      st.fail(a.line, a.col, "index-range mismatch: letter '" + a.letter + "' does not range over slot of '" +
                                 owner + "'");
  }

  // Collects occurrences: letters seen twice become contractions.
  void contract(Node& n, std::vector<Occurrence> occ) const {
    n.free.clear();
    n.contracted.clear();
    std::map<std::string, std::vector<Occurrence>> by_letter;
    std::vector<std::string> order;
    for (auto& o : occ) {
      if (by_letter[o.letter].empty()) order.push_back(o.letter);
      by_letter[o.letter].push_back(o);
    }
    for (const auto& l : order) {
      const auto& v = by_letter[l];
      if (v.size() == 1) {
        n.free.push_back(v[0]);
      } else if (v.size() == 2) {
        n.contracted.push_back({l, v[0].upper, v[1].upper});
      } else {
        st.fail(v[2].line, v[2].col, "index letter '" + l + "' appears more than twice in one term");
      }
    }
  }

  void resolve_atom(Node& n) const {
    const auto& sig = *st.full_sig;
    if (n.name == "eps") {
      n.resolved = Resolved::eps;
      if (n.args.empty()) st.fail(n.line, n.col, "eps needs indices");
      return;
    }
    if (n.name == "delta") {
      n.resolved = Resolved::delta;
      if (n.args.size() != 2) st.fail(n.line, n.col, "delta needs two indices");
      return;
    }
    if (auto it = st.defs.find(n.name); it != st.defs.end()) {
      n.resolved = Resolved::definition;
      if (n.args.size() != it->second.formals.size())
        st.fail(n.line, n.col, "definition '" + n.name + "' expects " + std::to_string(it->second.formals.size()) +
                                   " indices");
      for (std::size_t i = 0; i < n.args.size(); ++i)
        check_slot(n.args[i], st.letters.at(it->second.formals[i]), n.name);
      return;
    }
    std::string gname = n.antifield ? n.name + "*" : n.name;
    auto id = sig.find(gname);
    if (!id || gname.starts_with("EL(")) st.fail(n.line, n.col, "undeclared identifier '" + gname + "'");
    n.gen = *id;
    const auto& spec = sig.spec(*id);
    switch (spec.role) {
    case Role::independent_variable: n.resolved = Resolved::variable; break;
    case Role::parameter: n.resolved = Resolved::parameter; break;
    default: n.resolved = Resolved::generator; break;
    }
    if (n.resolved != Resolved::generator && !n.args.empty())
      st.fail(n.line, n.col, "'" + n.name + "' takes no indices");
    if (n.resolved == Resolved::generator) {
      if (n.args.size() != spec.index_ranges.size())
        st.fail(n.line, n.col, "'" + gname + "' expects " + std::to_string(spec.index_ranges.size()) + " indices, got " +
                                   std::to_string(n.args.size()));
      for (std::size_t i = 0; i < n.args.size(); ++i) check_slot(n.args[i], spec.index_ranges[i], gname);
    }
  }

  std::vector<Occurrence> atom_occurrences(const Node& n, bool upper) const {
    std::vector<Occurrence> occ;
    for (const auto& a : n.args) {
      if (a.literal) continue;
      letter_range(a.letter, a.line, a.col);
      occ.push_back({a.letter, upper, a.line, a.col});
    }
    return occ;
  }

  std::vector<Occurrence> analyze(Node& n) const {
    switch (n.kind) {
    case Node::num: return {};
    case Node::atom: {
      resolve_atom(n);
      contract(n, atom_occurrences(n, n.antifield));
      return n.free;
    }
    case Node::el: {
      if (!allow_el) st.fail(n.line, n.col, "EL(...) is only allowed in Noether operators");
      Node& a = *n.kids[0];
      resolve_atom(a);
      if (a.resolved != Resolved::generator || a.antifield ||
          st.full_sig->spec(a.gen).role != Role::field)
        st.fail(a.line, a.col, "EL(...) expects a field");
      contract(a, atom_occurrences(a, true));
      n.free = a.free;
      return n.free;
    }
    case Node::deriv: {
      auto occ = analyze(*n.kids[0]);
      if (!n.var.literal) {
        if (st.full_sig->find_variable(n.var.letter)) {
          // a variable name
        } else {
          const IndexRange& r = letter_range(n.var.letter, n.var.line, n.var.col);
          if (!r.spacetime)
            st.fail(n.var.line, n.var.col, "derivative index '" + n.var.letter + "' must range over the variables");
          occ.push_back({n.var.letter, false, n.var.line, n.var.col});
        }
      } else if (n.var.value < 0 || static_cast<std::size_t>(n.var.value) >= st.full_sig->variable_count()) {
        st.fail(n.var.line, n.var.col, "no independent variable at position " + std::to_string(n.var.value));
      }
      contract(n, std::move(occ));
      return n.free;
    }
    case Node::neg: n.free = analyze(*n.kids[0]); return n.free;
    case Node::pow: {
      auto occ = analyze(*n.kids[0]);
      if (!occ.empty()) st.fail(n.line, n.col, "powers of indexed expressions must be written as products");
      return {};
    }
    case Node::prod: {
      std::vector<Occurrence> occ;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        auto k = analyze(*n.kids[i]);
        if (n.flags[i] && !k.empty()) st.fail(n.kids[i]->line, n.kids[i]->col, "divisor carries free indices");
        occ.insert(occ.end(), k.begin(), k.end());
      }
      contract(n, std::move(occ));
      return n.free;
    }
    case Node::sum: {
      std::vector<Occurrence> first;
      std::set<std::string> letters;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        auto k = analyze(*n.kids[i]);
        std::set<std::string> ls;
        for (const auto& o : k) ls.insert(o.letter);
        if (i == 0) {
          first = k;
          letters = ls;
        } else if (ls != letters) {
          st.fail(n.kids[i]->line, n.kids[i]->col, "summands have different free indices");
        }
      }
      n.free = first;
      return n.free;
    }
    }
    return {};
  }
};

// ---------------------------------------------------------------- evaluation

struct Evaluator {
  const ParserState& st;
  std::map<std::pair<std::string, std::vector<int>>, Expression> def_cache;

  using Env = std::map<std::string, int>;

  int index_value(const IndexArg& a, const Env& env) const {
    if (a.literal) return a.value;
    auto it = env.find(a.letter);
    if (it == env.end()) st.fail(a.line, a.col, "free index '" + a.letter + "' is not bound");
    return it->second;
  }

  Expression eval(const Node& n, Env& env) {
    if (n.contracted.empty()) return eval_core(n, env);
    const auto& sig = st.full_sig;
    Expression total(Rational(0), sig);
    std::function<void(std::size_t, Rational)> rec = [&](std::size_t k, Rational factor) {
      if (k == n.contracted.size()) {
        total += factor * eval_core(n, env);
        return;
      }
      const auto& c = n.contracted[k];
      const IndexRange& r = st.letters.at(c.letter);
      const auto found = env.find(c.letter);
      const bool shadowing = found != env.end();
      const int saved = shadowing ? found->second : 0;
      for (int v = r.lo; v <= r.hi; ++v) {
        env[c.letter] = v;
        Rational f = factor;
        if (r.spacetime && c.upper_a == c.upper_b) {
          const Rational& g = st.metric.at(static_cast<std::size_t>(v));
          f = c.upper_a ? Rational(f * g) : Rational(f / g);
        }
        rec(k + 1, f);
      }
      if (shadowing)
        env[c.letter] = saved;
      else
        env.erase(c.letter);
    };
    rec(0, Rational(1));
    return total;
  }

  Expression eval_core(const Node& n, Env& env) {
    const auto& sig = st.full_sig;
    switch (n.kind) {
    case Node::num: return Expression(n.value, sig);
    case Node::neg: return -eval(*n.kids[0], env);
    case Node::sum: {
      Expression r(Rational(0), sig);
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (n.flags[i])
          r -= eval(*n.kids[i], env);
        else
          r += eval(*n.kids[i], env);
      }
      return r;
    }
    case Node::prod: {
      Expression r(Rational(1), sig);
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        Expression k = eval(*n.kids[i], env);
        if (n.flags[i]) {
          auto inv = inverse(k);
          if (!inv) st.fail(n.kids[i]->line, n.kids[i]->col, "division by a non-invertible expression");
          k = *inv;
        }
        r = r * k;
        if (r.is_zero()) break;
      }
      return r;
    }
    case Node::pow: {
      Expression b = eval(*n.kids[0], env);
      if (n.exponent < 0 && !inverse(b)) st.fail(n.line, n.col, "negative power of a non-invertible expression");
      return power(b, n.exponent);
    }
    case Node::deriv: {
      Expression inner = eval(*n.kids[0], env);
      std::size_t pos;
      if (n.var.literal)
        pos = static_cast<std::size_t>(n.var.value);
      else if (auto v = sig->find_variable(n.var.letter))
        pos = *v;
      else
        pos = static_cast<std::size_t>(index_value(n.var, env));
      return total_derivative(inner, pos);
    }
    case Node::el: {
      const Node& a = *n.kids[0];
      Symbol s = atom_symbol(a, env);
      s.gen = st.field_placeholder.at(s.gen);
      return Expression::symbol(sig, s);
    }
    case Node::atom: return eval_atom(n, env);
    }
    return Expression(Rational(0), sig);
  }

  Symbol atom_symbol(const Node& n, const Env& env) const {
    const auto& spec = st.full_sig->spec(n.gen);
    std::vector<int> comp;
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      int v = index_value(n.args[i], env);
      if (!spec.index_ranges[i].contains(v))
        st.fail(n.args[i].line, n.args[i].col,
                "index value " + std::to_string(v) + " out of range " + std::to_string(spec.index_ranges[i].lo) +
                    ".." + std::to_string(spec.index_ranges[i].hi) + " for '" + spec.name + "'");
      comp.push_back(v);
    }
    return Symbol{n.gen, Component::from(comp), {}};
  }

  Expression eval_atom(const Node& n, Env& env) {
    const auto& sig = st.full_sig;
    switch (n.resolved) {
    case Resolved::variable:
    case Resolved::parameter: return Expression::symbol(sig, {n.gen, {}, {}});
    case Resolved::generator: return Expression::symbol(sig, atom_symbol(n, env));
    case Resolved::delta: {
      return Expression(Rational(index_value(n.args[0], env) == index_value(n.args[1], env) ? 1 : 0), sig);
    }
    case Resolved::eps: {
      std::vector<int> vs;
      int lo = 1;
      bool have_lo = false;
      for (const auto& a : n.args) {
        vs.push_back(index_value(a, env));
        if (!a.literal && !have_lo) {
          lo = st.letters.at(a.letter).lo;
          have_lo = true;
        }
      }
      if (!have_lo) lo = *std::min_element(vs.begin(), vs.end());
      std::vector<int> sorted = vs;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != lo + static_cast<int>(i)) return Expression(Rational(0), sig);
      int sign = 1;
      for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = i + 1; j < vs.size(); ++j)
          if (vs[i] > vs[j]) sign = -sign;
      return Expression(Rational(sign), sig);
    }
    case Resolved::definition: {
      const auto& def = st.defs.at(n.name);
      std::vector<int> values;
      for (const auto& a : n.args) values.push_back(index_value(a, env));
      auto key = std::make_pair(n.name, values);
      if (auto it = def_cache.find(key); it != def_cache.end()) return it->second;
      Env inner;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const IndexRange& r = st.letters.at(def.formals[i]);
        if (!r.contains(values[i]))
          st.fail(n.args[i].line, n.args[i].col, "index value " + std::to_string(values[i]) + " out of range");
        inner[def.formals[i]] = values[i];
      }
      Expression v = eval(*def.body, inner);
      def_cache.emplace(key, v);
      return v;
    }
    case Resolved::none: break;
    }
    st.fail(n.line, n.col, "unresolved identifier '" + n.name + "'");
  }
};

} // namespace detail

using detail::Analyzer;
using detail::Evaluator;
using detail::Node;
using detail::NodePtr;
using detail::Parser;
using detail::Resolved;
using detail::ParserState;
using detail::Tok;
using detail::Token;

ModelContext::ModelContext() : state_(std::make_unique<ParserState>()) {}
ModelContext::~ModelContext() = default;

const SignaturePtr& ModelContext::theory_signature() const { return state_->theory_sig; }
const SignaturePtr& ModelContext::bv_signature() const { return state_->bv_sig; }
const std::vector<Rational>& ModelContext::metric() const { return state_->metric; }

BVExtension ParsedModel::extension() const { return bv ? *bv : extend_to_bv(theory, {}); }

namespace {

// Lowers an expression from the parser's working signature to `target`,
// reporting leftover generators at the given position.
Expression lower_to(const Expression& e, const SignaturePtr& target, const ParserState& st, int line, int col,
                    const std::string& what) {
  for (const auto& s : e.symbols())
    if (s.gen >= target->size())
      st.fail(line, col, "'" + st.full_sig->spec(s.gen).name + "' is not allowed in " + what);
  return e.rebased(target);
}

struct LetterBinding {
  std::vector<std::string> letters;
  std::vector<IndexRange> ranges;

  // Calls f for every assignment of the letters (a single empty one if none).
  void for_each(const std::function<void(const std::map<std::string, int>&, const std::vector<int>&)>& f) const {
    std::map<std::string, int> env;
    std::vector<int> values(letters.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == letters.size()) {
        f(env, values);
        return;
      }
      for (int v = ranges[k].lo; v <= ranges[k].hi; ++v) {
        env[letters[k]] = v;
        values[k] = v;
        rec(k + 1);
      }
      env.erase(letters[k]);
    };
    rec(0);
  }
};

void check_free_letters(const ParserState& st, const Node& n, const std::vector<std::string>& bound) {
  std::set<std::string> want(bound.begin(), bound.end());
  std::set<std::string> have;
  for (const auto& o : n.free) {
    have.insert(o.letter);
    if (!want.count(o.letter)) st.fail(o.line, o.col, "free index '" + o.letter + "' is not bound");
  }
  for (const auto& b : bound)
    if (!have.count(b)) st.fail(n.line, n.col, "index '" + b + "' does not occur on the right-hand side");
}

NoetherOperator extract_operator(const Expression& e, const ParserState& st, int line, int col) {
  NoetherOperator op;
  const auto& sig = st.full_sig;
  for (const auto& m : e.terms()) {
    std::optional<Symbol> ph;
    int count = 0;
    for (const auto& f : m.even)
      if (st.placeholder_field.count(f.symbol.gen)) {
        ph = f.symbol;
        count += f.exponent;
      }
    for (const auto& s : m.odd)
      if (st.placeholder_field.count(s.gen)) {
        ph = s;
        ++count;
      }
    if (count != 1) st.fail(line, col, "Noether operator must be linear in EL(...)");
    Expression single = Expression::from_monomials(sig, {m});
    Expression coeff = partial_derivative(single, *ph, Side::right);
    coeff = lower_to(coeff, st.theory_sig, st, line, col, "Noether operator coefficients");
    op.add({st.placeholder_field.at(ph->gen), ph->component}, ph->derivatives, coeff);
  }
  return op;
}

} // namespace

class ModelParser {
public:
  explicit ModelParser(std::string_view text) : ctx_(new ModelContext()), st_(*ctx_->state_) {
    std::string line;
    std::istringstream is{std::string(text)};
    while (std::getline(is, line)) st_.source_lines.push_back(line);
    toks_ = detail::lex(text, st_);
  }

  std::shared_ptr<ModelContext> context() { return ctx_; }

  ParsedModel run() {
    // Statements start at tokens in column 1.
    std::vector<std::pair<std::size_t, std::size_t>> statements;
    std::size_t start = 0;
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (i > start && toks_[i].starts_line && toks_[i].col == 1) {
        statements.emplace_back(start, i);
        start = i;
      } else if (i == start && toks_[i].col != 1) {
        st_.fail(toks_[i].line, toks_[i].col, "statement must start in column 1");
      }
    }
    if (start + 1 < toks_.size()) statements.emplace_back(start, toks_.size() - 1);
    for (auto [b, e] : statements) statement(b, e);
    return finish();
  }

private:
  Parser parser(std::size_t b, std::size_t e) { return Parser(st_, toks_, b, e); }

  void need_no_signature(const Token& t) {
    if (st_.theory_sig) st_.fail(t.line, t.col, "declarations must precede definitions and expressions");
  }

  void ensure_signature() {
    if (!st_.theory_sig) {
      st_.build_signatures(specs_);
      if (!have_metric_) st_.metric.assign(st_.theory_sig->variable_count(), Rational(1));
    }
  }

  void declare_name(const Token& t, const std::string& name) {
    if (detail::is_reserved(name)) st_.fail(t.line, t.col, "'" + name + "' is reserved");
    if (names_.count(name) || st_.letters.count(name)) st_.fail(t.line, t.col, "duplicate declaration of '" + name + "'");
    names_.insert(name);
  }

  void statement(std::size_t b, std::size_t e) {
    Parser p = parser(b, e);
    const Token kw = p.peek();
    if (kw.kind != Tok::ident)
      st_.fail(kw.line, kw.col, "expected a statement keyword",
               {"vars", "metric", "params", "index", "field", "ghost", "def", "lagrangian", "gauge", "master"});
    p.next();
    const std::string& k = kw.text;
    if (k == "vars") {
      need_no_signature(kw);
      if (!specs_.empty() || vars_ > 0) st_.fail(kw.line, kw.col, "'vars' must be the first declaration");
      while (!p.at_end()) {
        const Token& t = p.peek();
        std::string name = p.expect_ident();
        declare_name(t, name);
        specs_.push_back({name, Role::independent_variable, {}, {}, std::nullopt});
        ++vars_;
      }
      if (vars_ == 0) p.fail_here("expected at least one variable", {"identifier"});
    } else if (k == "metric") {
      need_no_signature(kw);
      if (!p.is_ident("diag")) p.fail_here("expected diag(...)", {"diag"});
      p.next();
      p.expect("(");
      std::vector<Rational> diag;
      diag.push_back(p.expect_rational());
      while (p.is(",")) {
        p.next();
        diag.push_back(p.expect_rational());
      }
      p.expect(")");
      p.expect_end();
      if (diag.size() != static_cast<std::size_t>(vars_))
        st_.fail(kw.line, kw.col, "metric-dimension mismatch: " + std::to_string(diag.size()) + " entries for " +
                                      std::to_string(vars_) + " variables");
      for (const auto& g : diag)
        if (g == 0) st_.fail(kw.line, kw.col, "metric entries must be nonzero");
      st_.metric = diag;
      have_metric_ = true;
    } else if (k == "params") {
      need_no_signature(kw);
      while (!p.at_end()) {
        const Token& t = p.peek();
        std::string name = p.expect_ident();
        declare_name(t, name);
        specs_.push_back({name, Role::parameter, {}, {}, std::nullopt});
      }
    } else if (k == "index") {
      std::vector<std::pair<Token, std::string>> names;
      while (!p.at_end() && !p.is("=")) {
        const Token& t = p.peek();
        names.emplace_back(t, p.expect_ident());
      }
      if (names.empty()) p.fail_here("expected index letters", {"identifier"});
      p.expect("=");
      IndexRange r;
      if (p.is_ident("vars")) {
        p.next();
        r = {0, vars_ - 1, true};
        if (vars_ == 0) st_.fail(kw.line, kw.col, "spacetime indices need declared variables");
      } else {
        r.lo = p.expect_int();
        if (p.at_end() || p.peek().kind != Tok::dotdot) p.fail_here("expected '..'", {"'..'"});
        p.next();
        r.hi = p.expect_int();
        if (r.hi < r.lo) st_.fail(kw.line, kw.col, "empty index range");
      }
      p.expect_end();
      for (auto& [t, name] : names) {
        declare_name(t, name);
        st_.letters[name] = r;
      }
    } else if (k == "field" || k == "ghost") {
      need_no_signature(kw);
      GeneratorSpec g;
      g.role = k == "field" ? Role::field : Role::ghost;
      g.grading = k == "field" ? Grading{false, 0, 0} : Grading{true, 1, 0};
      const Token& t = p.peek();
      g.name = p.expect_ident();
      declare_name(t, g.name);
      if (p.is("[")) {
        p.next();
        do {
          if (p.is(",")) p.next();
          if (!p.at_end() && p.peek().kind == Tok::ident) {
            const Token& lt = p.peek();
            std::string letter = p.next().text;
            auto it = st_.letters.find(letter);
            if (it == st_.letters.end()) st_.fail(lt.line, lt.col, "undeclared index letter '" + letter + "'");
            g.index_ranges.push_back(it->second);
          } else {
            IndexRange r;
            r.lo = p.expect_int();
            if (p.at_end() || p.peek().kind != Tok::dotdot) p.fail_here("expected '..'", {"'..'"});
            p.next();
            r.hi = p.expect_int();
            if (r.hi < r.lo) st_.fail(t.line, t.col, "empty index range");
            g.index_ranges.push_back(r);
          }
        } while (p.is(","));
        p.expect("]");
      }
      while (!p.at_end()) {
        if (p.is_ident("even")) {
          p.next();
          g.grading.odd = false;
        } else if (p.is_ident("odd")) {
          p.next();
          g.grading.odd = true;
        } else if (p.is_ident("gh")) {
          p.next();
          g.grading.ghost_number = p.expect_int();
        } else {
          p.fail_here("unexpected '" + p.peek().text + "'", {"even", "odd", "gh"});
        }
      }
      try {
        Signature::make({g});
      } catch (const Error& ex) {
        st_.fail(kw.line, kw.col, ex.what());
      }
      specs_.push_back(g);
    } else if (k == "def") {
      ensure_signature();
      const Token& t = p.peek();
      std::string name = p.expect_ident();
      if (detail::is_reserved(name) || st_.defs.count(name) || st_.full_sig->find(name) || st_.letters.count(name))
        st_.fail(t.line, t.col, "duplicate or reserved name '" + name + "'");
      std::vector<std::string> formals = bound_letters(p);
      p.expect("=");
      NodePtr body = p.expr();
      p.expect_end();
      Analyzer{st_, false}.analyze(*body);
      check_free_letters(st_, *body, formals);
      st_.defs[name] = {formals, body};
    } else if (k == "lagrangian") {
      ensure_signature();
      if (lagrangian_) st_.fail(kw.line, kw.col, "duplicate lagrangian");
      NodePtr body = p.expr();
      p.expect_end();
      Analyzer{st_, false}.analyze(*body);
      check_free_letters(st_, *body, {});
      Evaluator ev{st_, {}};
      Evaluator::Env env;
      lagrangian_ = lower_to(ev.eval(*body, env), st_.theory_sig, st_, kw.line, kw.col, "the lagrangian");
    } else if (k == "gauge") {
      ensure_signature();
      const Token& t = p.peek();
      std::string ghost = p.expect_ident();
      auto id = st_.theory_sig->find(ghost);
      if (!id || st_.theory_sig->spec(*id).role != Role::ghost)
        st_.fail(t.line, t.col, "'" + ghost + "' is not a declared ghost");
      std::vector<std::string> formals = bound_letters(p);
      const auto& spec = st_.theory_sig->spec(*id);
      if (formals.size() != spec.index_ranges.size())
        st_.fail(t.line, t.col, "ghost '" + ghost + "' expects " + std::to_string(spec.index_ranges.size()) + " indices");
      for (std::size_t i = 0; i < formals.size(); ++i)
        if (!(st_.letters.at(formals[i]) == spec.index_ranges[i]))
          st_.fail(t.line, t.col, "index-range mismatch for ghost '" + ghost + "'");
      p.expect("=");
      NodePtr body = p.expr();
      p.expect_end();
      Analyzer{st_, true}.analyze(*body);
      check_free_letters(st_, *body, formals);
      for (const auto& g : gauge_)
        if (g.ghost == *id) st_.fail(t.line, t.col, "duplicate gauge generator for ghost '" + ghost + "'");
      GaugeGenerator gen;
      gen.ghost = *id;
      Evaluator ev{st_, {}};
      LetterBinding lb{formals, {}};
      for (const auto& f : formals) lb.ranges.push_back(st_.letters.at(f));
      lb.for_each([&](const std::map<std::string, int>& env0, const std::vector<int>& values) {
        Evaluator::Env env = env0;
        gen.identities[Component::from(values)] = extract_operator(ev.eval(*body, env), st_, kw.line, kw.col);
      });
      gauge_.push_back(std::move(gen));
    } else if (k == "master") {
      ensure_signature();
      if (master_) st_.fail(kw.line, kw.col, "duplicate master action");
      NodePtr body = p.expr();
      p.expect_end();
      Analyzer{st_, false}.analyze(*body);
      check_free_letters(st_, *body, {});
      Evaluator ev{st_, {}};
      Evaluator::Env env;
      master_ = lower_to(ev.eval(*body, env), st_.bv_sig, st_, kw.line, kw.col, "the master action");
    } else {
      st_.fail(kw.line, kw.col, "unknown statement '" + k + "'",
               {"vars", "metric", "params", "index", "field", "ghost", "def", "lagrangian", "gauge", "master"});
    }
  }

  std::vector<std::string> bound_letters(Parser& p) {
    std::vector<std::string> formals;
    if (!p.is("[")) return formals;
    p.next();
    do {
      if (p.is(",")) p.next();
      const Token& t = p.peek();
      std::string l = p.expect_ident();
      if (!st_.letters.count(l)) st_.fail(t.line, t.col, "undeclared index letter '" + l + "'");
      if (std::find(formals.begin(), formals.end(), l) != formals.end())
        st_.fail(t.line, t.col, "repeated index letter '" + l + "'");
      formals.push_back(l);
    } while (p.is(","));
    p.expect("]");
    return formals;
  }

  ParsedModel finish() {
    ensure_signature();
    if (!lagrangian_) {
      const Token& t = toks_.back();
      st_.fail(t.line, t.col, "missing lagrangian", {"lagrangian"});
    }
    Theory theory(st_.theory_sig, st_.metric, *lagrangian_);
    std::optional<BVExtension> bv;
    if (!gauge_.empty() || master_) {
      bv = extend_to_bv(theory, gauge_);
      if (master_) bv = bv->with_master_action(*master_);
    }
    return ParsedModel{std::move(theory), std::move(bv), ctx_};
  }

  std::shared_ptr<ModelContext> ctx_;
  ParserState& st_;
  std::vector<Token> toks_;
  std::vector<GeneratorSpec> specs_;
  std::set<std::string> names_;
  int vars_ = 0;
  bool have_metric_ = false;
  std::optional<Expression> lagrangian_;
  std::optional<Expression> master_;
  std::vector<GaugeGenerator> gauge_;
};

namespace {

// Parses a stand-alone expression with the context's letters and defs.
struct Snippet {
  const ParserState& st;
  std::vector<Token> toks;

  Snippet(std::string_view text, const ParserState& state) : st(state) {
    // Error positions refer to the snippet itself.
    auto& lines = const_cast<ParserState&>(st).source_lines;
    saved = lines;
    lines = {std::string(text)};
    toks = detail::lex(text, st);
  }
  ~Snippet() { const_cast<ParserState&>(st).source_lines = saved; }

  Parser parser() { return Parser(const_cast<ParserState&>(st), toks, 0, toks.size() - 1); }

  std::vector<std::string> saved;
};

} // namespace

ParsedModel parse_model(std::string_view text) {
  ModelParser mp(text);
  return mp.run();
}

std::shared_ptr<const ModelContext> ModelContext::for_theory(const Theory& t) {
  std::shared_ptr<ModelContext> ctx(new ModelContext());
  auto& st = *ctx->state_;
  std::vector<GeneratorSpec> specs;
  for (const auto& g : t.signature()->generators())
    if (g.role != Role::antifield) specs.push_back(g);
  if (specs.size() != t.signature()->size()) {
    // The theory already carries antifields: keep its generator ids.
    st.theory_sig = t.signature();
    st.bv_sig = t.signature()->extended(antifield_specs(*t.signature()));
    st.full_sig = st.bv_sig;
  } else {
    st.build_signatures(std::move(specs));
  }
  st.metric = t.metric();
  return ctx;
}

Expression parse_expression(std::string_view text, const ModelContext& context) {
  const ParserState& st = context.state();
  Snippet sn(text, st);
  Parser p = sn.parser();
  if (p.at_end()) p.fail_here("empty expression", {"expression"});
  NodePtr n = p.expr();
  p.expect_end();
  Analyzer{st, false}.analyze(*n);
  check_free_letters(st, *n, {});
  Evaluator ev{st, {}};
  Evaluator::Env env;
  return lower_to(ev.eval(*n, env), st.bv_sig, st, 1, 1, "expressions");
}

Expression parse_expression(std::string_view text, const Theory& theory) {
  auto ctx = ModelContext::for_theory(theory);
  Expression e = parse_expression(text, *ctx);
  // Reattach to the caller's theory signature when possible.
  if (theory.signature()->extends(*ctx->theory_signature()) || ctx->theory_signature() == theory.signature()) {
    bool base_only = true;
    for (const auto& s : e.symbols())
      if (s.gen >= theory.signature()->size()) base_only = false;
    if (base_only) return e.rebased(theory.signature());
  }
  return e;
}

NoetherOperator parse_noether_operator(std::string_view text, const ModelContext& context) {
  const ParserState& st = context.state();
  Snippet sn(text, st);
  Parser p = sn.parser();
  if (p.at_end()) p.fail_here("empty operator", {"expression"});
  NodePtr n = p.expr();
  p.expect_end();
  Analyzer{st, true}.analyze(*n);
  check_free_letters(st, *n, {});
  Evaluator ev{st, {}};
  Evaluator::Env env;
  return extract_operator(ev.eval(*n, env), st, 1, 1);
}

namespace {

// LHS "name[idx...]" followed by '='; returns the atom node.
NodePtr lhs_atom(Parser& p, const ParserState& st) {
  if (p.at_end() || p.peek().kind != Tok::ident) p.fail_here("expected a name", {"identifier"});
  NodePtr a = p.atom();
  Analyzer{st, false}.resolve_atom(*a);
  p.expect("=");
  return a;
}

std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> parts;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

} // namespace

EvolutionaryVF parse_characteristics(const std::vector<std::string>& entries, const ModelContext& context) {
  const ParserState& st = context.state();
  EvolutionaryVF x;
  for (const auto& entry : entries) {
    Snippet sn(entry, st);
    Parser p = sn.parser();
    NodePtr a = lhs_atom(p, st);
    if (a->resolved != Resolved::generator || st.full_sig->spec(a->gen).role != Role::field || a->antifield)
      st.fail(a->line, a->col, "characteristics are assigned to fields");
    NodePtr rhs = p.expr();
    p.expect_end();
    Analyzer{st, false}.analyze(*rhs);
    LetterBinding lb;
    for (const auto& arg : a->args)
      if (!arg.literal) {
        lb.letters.push_back(arg.letter);
        lb.ranges.push_back(st.letters.at(arg.letter));
      }
    check_free_letters(st, *rhs, lb.letters);
    Evaluator ev{st, {}};
    lb.for_each([&](const std::map<std::string, int>& env0, const std::vector<int>&) {
      Evaluator::Env env = env0;
      Symbol s = ev.atom_symbol(*a, env);
      x.characteristics[{s.gen, s.component}] =
          lower_to(ev.eval(*rhs, env), st.bv_sig, st, rhs->line, rhs->col, "characteristics");
    });
  }
  return x;
}

Section parse_section(std::string_view text, const ModelContext& context) {
  const ParserState& st = context.state();
  Section s;
  for (const auto& entry : split_top_level(text)) {
    Snippet sn(entry, st);
    Parser p = sn.parser();
    NodePtr a = lhs_atom(p, st);
    if (a->resolved == Resolved::parameter) {
      s.parameters[a->gen] = p.expect_rational();
      p.expect_end();
      continue;
    }
    if (a->resolved != Resolved::generator || st.full_sig->spec(a->gen).role != Role::field || a->antifield)
      st.fail(a->line, a->col, "sections assign fields or parameters");
    NodePtr rhs = p.expr();
    p.expect_end();
    Analyzer{st, false}.analyze(*rhs);
    check_free_letters(st, *rhs, {});
    Evaluator ev{st, {}};
    Evaluator::Env env;
    Symbol sym = ev.atom_symbol(*a, env);
    s.values[{sym.gen, sym.component}] = lower_to(ev.eval(*rhs, env), st.theory_sig, st, rhs->line, rhs->col, "sections");
  }
  return s;
}

Box parse_box(std::string_view text, const ModelContext& context) {
  const ParserState& st = context.state();
  const auto& sig = st.theory_sig;
  std::vector<std::optional<std::pair<Rational, Rational>>> slots(sig->variable_count());
  for (const auto& entry : split_top_level(text)) {
    Snippet sn(entry, st);
    Parser p = sn.parser();
    const Token& t = p.peek();
    std::string name = p.expect_ident();
    auto pos = sig->find_variable(name);
    if (!pos) st.fail(t.line, t.col, "'" + name + "' is not an independent variable");
    p.expect("=");
    Rational a = p.expect_rational();
    if (p.at_end() || p.peek().kind != Tok::dotdot) p.fail_here("expected '..'", {"'..'"});
    p.next();
    Rational b = p.expect_rational();
    p.expect_end();
    slots[*pos] = {a, b};
  }
  Box box;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i])
      throw ParseError(1, 1, "box has no interval for '" + sig->spec(sig->variable(i)).name + "'");
    box.push_back(*slots[i]);
  }
  return box;
}

} // namespace jetbv
