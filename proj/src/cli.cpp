#include "jetbv/frontend.hpp"
#include "jetbv/models.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

namespace jetbv {

namespace {

struct Options {
  bool latex = false;
  std::optional<int> max_order;
  int dim = 2;
  std::string file;
  std::vector<std::string> q;
  std::string op, expr, f, g, section, box, emit;
  bool witness = false;
};

class UsageError : public Error {
public:
  using Error::Error;
};

ParsedModel load(const Options& o) {
  namespace fs = std::filesystem;
  if (fs::exists(o.file)) {
    std::ifstream in(o.file);
    std::stringstream ss;
    ss << in.rdbuf();
    if (!in) throw UsageError("cannot read '" + o.file + "'");
    return parse_model(ss.str());
  }
  const auto names = list_models();
  if (std::find(names.begin(), names.end(), o.file) != names.end())
    return parse_model(model_source(o.file, {o.dim}));
  throw UsageError("no such file or builtin model: '" + o.file + "'");
}

class Runner {
public:
  Runner(const Options& o, std::ostream& out) : o_(o), out_(out) {}

  std::string fmt(const Expression& e) const { return format_expression(e, style()); }
  Style style() const { return o_.latex ? Style::latex : Style::plain; }

  // Prints the on-shell form of a residual when --max-order is given.
  void on_shell(const Expression& e, const Theory& t) {
    if (!o_.max_order || e.is_zero()) return;
    out_ << "on-shell: " << fmt(on_shell_reduce(e.rebased(common_signature(e.signature(), t.signature())), t,
                                                *o_.max_order))
         << "\n";
  }

  int el() {
    const ParsedModel m = load(o_);
    const auto& sig = *m.theory.signature();
    for (const auto& [fc, e] : euler_lagrange_system(m.theory))
      out_ << "EL[" << format_symbol(sig, fc.symbol(), style()) << "] = " << fmt(e) << "\n";
    return 0;
  }

  int symm() {
    const ParsedModel m = load(o_);
    const EvolutionaryVF x = parse_characteristics(o_.q, *m.context);
    if (auto shift = characteristic_shift(m.context->bv_signature(), x); shift && !(*shift == Grading{}))
      out_ << "grading shift: " << to_string(*shift) << "\n";
    if (is_symmetry(m.theory, x)) {
      out_ << "symmetry: variation is a total divergence\n";
      return 0;
    }
    const Expression variation = prolong_apply(x, m.theory.lagrangian().rebased(m.context->bv_signature()));
    out_ << "not a symmetry\nresidual: " << fmt(variation) << "\n";
    on_shell(variation, m.theory);
    return 1;
  }

  std::string expand_operator(const ParsedModel& m) const {
    static const std::regex sugar("^\\s*D_([A-Za-z_][A-Za-z0-9_]*)\\s*$");
    std::smatch match;
    if (!std::regex_match(o_.op, match, sugar)) return o_.op;
    const auto fields = m.theory.field_components();
    if (fields.size() != 1)
      throw UsageError("operator shorthand '" + o_.op + "' needs a model with exactly one field component");
    const auto& sig = *m.theory.signature();
    if (!sig.find_variable(match[1].str())) throw UsageError("'" + match[1].str() + "' is not an independent variable");
    return "d(EL(" + format_symbol(sig, fields[0].symbol()) + ");" + match[1].str() + ")";
  }

  int noether() {
    const ParsedModel m = load(o_);
    const NoetherOperator n = parse_noether_operator(expand_operator(m), *m.context);
    const Expression r = noether_residual(m.theory, n);
    if (r.is_zero()) {
      out_ << "Noether identity holds\n";
      return 0;
    }
    out_ << "not a Noether identity\nresidual: " << fmt(r) << "\n";
    on_shell(r, m.theory);
    return 1;
  }

  int divergence() {
    const ParsedModel m = load(o_);
    const Density d(parse_expression(o_.expr, *m.context));
    if (!is_total_divergence(d)) {
      out_ << "not a total divergence\n";
      for (const auto& fc : occurring_components(d.expr)) {
        const Expression e = variational_derivative(d, fc);
        if (!e.is_zero())
          out_ << "residual EL[" << format_symbol(*d.signature(), fc.symbol(), style()) << "] = " << fmt(e) << "\n";
      }
      return 1;
    }
    out_ << "total divergence\n";
    if (o_.witness) {
      const auto w = divergence_witness(d);
      for (const auto& [var, f] : w) out_ << "witness: " << fmt(f) << "\n";
    }
    return 0;
  }

  int bracket() {
    const ParsedModel m = load(o_);
    const Expression f = parse_expression(o_.f, *m.context);
    const Expression g = parse_expression(o_.g, *m.context);
    out_ << fmt(antibracket(f, g)) << "\n";
    return 0;
  }

  int kt() {
    const ParsedModel m = load(o_);
    const Expression e = parse_expression(o_.expr, *m.context);
    const Expression r = koszul_tate_apply(m.extension(), e);
    out_ << fmt(r) << "\n";
    on_shell(r, m.theory);
    return 0;
  }

  int master() {
    const ParsedModel m = load(o_);
    const MasterReport rep = check_master_equation(m.extension());
    if (rep.holds) {
      out_ << "master equation holds in h(A)\n";
      if (!rep.residual.is_zero())
        out_ << "(S,S) is a total divergence with " << rep.residual.terms().size() << " terms\n";
      return 0;
    }
    out_ << "master equation fails\nresidual: " << fmt(rep.residual) << "\n";
    return 1;
  }

  int eval() {
    const ParsedModel m = load(o_);
    const Section s = parse_section(o_.section, *m.context);
    const Box b = parse_box(o_.box, *m.context);
    out_ << format_rational(integrate_on_box(LocalFunctional(m.theory.lagrangian()), s, b), style()) << "\n";
    return 0;
  }

  int models() {
    if (o_.emit.empty()) {
      for (const auto& n : list_models()) out_ << n << "\n";
      return 0;
    }
    out_ << model_source(o_.emit, {o_.dim});
    return 0;
  }

private:
  const Options& o_;
  std::ostream& out_;
};

} // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Variational calculus and BV formalism on jet spaces", "jetbv"};
  app.require_subcommand(1);
  app.add_flag("--latex", o.latex, "Format expressions as LaTeX");
  app.add_option("--max-order", o.max_order, "Order up to which residuals are reduced on-shell")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--dim", o.dim, "Base dimension for builtin models")->check(CLI::Range(2, 4));

  auto file_cmd = [&](const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("FILE", o.file, "Model file or builtin model name")->required();
    c->fallthrough();
    return c;
  };
  auto* el = file_cmd("el", "Print the Euler-Lagrange system");
  auto* symm = file_cmd("symm", "Check whether an evolutionary vector field is a symmetry");
  symm->add_option("--q", o.q, "Characteristics FIELD[idx] = EXPR")->required();
  auto* noether = file_cmd("noether", "Check a Noether identity");
  noether->add_option("--op", o.op, "Operator linear in EL(field), or D_<var>")->required();
  auto* div = file_cmd("divergence", "Check whether a density is a total divergence");
  div->add_option("--expr", o.expr, "Density")->required();
  div->add_flag("--witness", o.witness, "Print F with D_t F = density (one variable only)");
  auto* br = file_cmd("bracket", "Antibracket of two densities");
  br->add_option("--f", o.f)->required();
  br->add_option("--g", o.g)->required();
  auto* kt = file_cmd("kt", "Apply the Koszul-Tate differential");
  kt->add_option("--expr", o.expr)->required();
  auto* master = file_cmd("master", "Check the classical master equation");
  auto* eval = file_cmd("eval", "Integrate the lagrangian on a section over a box");
  eval->add_option("--section", o.section, "FIELD[idx] = POLY, PARAM = VALUE, ...")->required();
  eval->add_option("--box", o.box, "VAR = a..b, ...")->required();
  auto* models = app.add_subcommand("models", "List builtin models or print one");
  models->add_option("--emit", o.emit, "Model to print");
  models->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Runner r(o, out);
  try {
    if (*el) return r.el();
    if (*symm) return r.symm();
    if (*noether) return r.noether();
    if (*div) return r.divergence();
    if (*br) return r.bracket();
    if (*kt) return r.kt();
    if (*master) return r.master();
    if (*eval) return r.eval();
    if (*models) return r.models();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    if (auto c = e.caret(); !c.empty()) err << c << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownModelError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

} // namespace jetbv
