#pragma once

#include "jetbv/bv.hpp"
#include "jetbv/error.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jetbv {

/// Syntax or declaration error at a 1-based (line, column) position.
class ParseError : public Error {
public:
  ParseError(int line, int column, std::string message, std::vector<std::string> expected = {},
             std::string source_line = {});

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }
  const std::vector<std::string>& expected() const { return expected_; }
  /// Offending source line followed by a caret line, when known.
  std::string caret() const;

private:
  int line_;
  int column_;
  std::string message_;
  std::vector<std::string> expected_;
  std::string source_line_;
};

namespace detail {
struct ParserState;
}

/// Everything an expression needs to be parsed in the scope of a model:
/// signatures, metric, index letters and named definitions.
class ModelContext {
public:
  /// A context without index letters or definitions.
  static std::shared_ptr<const ModelContext> for_theory(const Theory& t);

  const SignaturePtr& theory_signature() const;
  /// Theory signature extended with antifields of every field and ghost.
  const SignaturePtr& bv_signature() const;
  const std::vector<Rational>& metric() const;

  ~ModelContext();
  detail::ParserState& state() const { return *state_; }
  ModelContext(const ModelContext&) = delete;
  ModelContext& operator=(const ModelContext&) = delete;

private:
  friend struct detail::ParserState;
  friend class ModelParser;
  ModelContext();
  std::unique_ptr<detail::ParserState> state_;
};

struct ParsedModel {
  Theory theory;
  std::optional<BVExtension> bv;
  std::shared_ptr<const ModelContext> context;

  /// The declared extension, or the trivial one (antifields only).
  BVExtension extension() const;
};

/// Parses a model file. Throws ParseError (syntax, undeclared identifiers,
/// index-range and metric-dimension mismatches) or DomainError.
ParsedModel parse_model(std::string_view text);

/// Parses an expression over the BV signature of the context.
Expression parse_expression(std::string_view text, const ModelContext& context);
Expression parse_expression(std::string_view text, const Theory& theory);

/// Noether operator written as an expression linear in EL(field[...])
/// placeholders, e.g. "d(EL(A[mu]);mu)".
NoetherOperator parse_noether_operator(std::string_view text, const ModelContext& context);

/// Characteristics "FIELD[idx] = EXPR"; index letters on the left expand
/// over their ranges.
EvolutionaryVF parse_characteristics(const std::vector<std::string>& entries, const ModelContext& context);

/// Comma-separated "FIELD[idx] = POLY" and "PARAM = RATIONAL" bindings.
Section parse_section(std::string_view text, const ModelContext& context);

/// Comma-separated "VAR = a..b" intervals, one per independent variable.
Box parse_box(std::string_view text, const ModelContext& context);

enum class Style { plain, latex };

std::string format_expression(const Expression& e, Style style = Style::plain);
std::string format_symbol(const Signature& sig, const Symbol& s, Style style = Style::plain);
std::string format_rational(const Rational& q, Style style = Style::plain);

/// Runs one CLI invocation. Exit codes: 0 success / check true, 1 check
/// false, 2 parse or usage error, 3 mathematical-domain error.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace jetbv
