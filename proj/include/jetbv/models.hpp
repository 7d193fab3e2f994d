#pragma once

#include "jetbv/frontend.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace jetbv {

struct ModelOptions {
  /// Base dimension of the field theories, 2 to 4.
  int dim = 2;
  /// Free-particle potential V as an expression in u[1], u[2], u[3] and m.
  std::string potential = "0";
};

enum class CheckKind { euler_lagrange, symmetry, noether_identity, divergence, master_equation, kt_nilpotent };

/// One row of a model's expected-outcomes table.
struct ExpectedOutcome {
  CheckKind kind;
  /// Component for euler_lagrange, characteristics for symmetry, operator
  /// for noether_identity, density for divergence.
  std::vector<std::string> inputs;
  /// Expected EL expression (euler_lagrange only).
  std::string expected_text;
  bool expected = true;
  std::string description;
};

struct OutcomeResult {
  std::string description;
  bool passed = false;
  std::string detail;
};

struct ModelDescriptor {
  std::string name;
  ModelOptions options;
  std::string source;
  ParsedModel model;
  std::vector<ExpectedOutcome> expected;
};

std::vector<std::string> list_models();

/// Model-file text of a builtin. Throws UnknownModelError or
/// UnsupportedDimensionError.
std::string model_source(std::string_view name, const ModelOptions& options = {});

ModelDescriptor builtin(std::string_view name, const ModelOptions& options = {});

/// Runs every row of the descriptor's expected table.
std::vector<OutcomeResult> verify_expected(const ModelDescriptor& d);

/// Generators g of the extension with d_KT(d_KT(g)) != 0 (empty when d_KT
/// squares to zero on all of them).
std::vector<FieldComponent> kt_square_failures(const BVExtension& b);

} // namespace jetbv
