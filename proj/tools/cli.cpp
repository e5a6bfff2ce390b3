#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pregma/grammar_io.hpp"
#include "pregma/markov.hpp"
#include "pregma/pcp.hpp"
#include "pregma/pctl.hpp"
#include "pregma/pushdown.hpp"
#include "pregma/quantitative.hpp"
#include "pregma/validation.hpp"

namespace pregma::cli {
namespace {

using nlohmann::json;

// Bad arguments as opposed to bad input files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Text, JsonLines, Dot };

struct RunConfig {
  std::string grammar;
  std::string input;
  std::string output;
  std::string format;
  std::string eps_text = "1/1000000";
  Rational eps{1, 1000000};
  unsigned depth = 3;
  std::optional<unsigned> truncate_depth;
  unsigned horizon = 20;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  unsigned threads = 1;

  std::string formula;
  std::string at;
  bool qualitative = false;
  bool emit_coloured = false;
  unsigned refinements = 3;

  std::string phi1 = "tt";
  std::string phi2;
  std::string from;
  std::string method = "enclosure";
  bool emit_system = false;

  bool complete_outside = false;
  std::string sequence;
};

Format parse_format(const std::string& text, Format fallback) {
  if (text.empty()) return fallback;
  if (text == "text") return Format::Text;
  if (text == "json-lines") return Format::JsonLines;
  if (text == "dot") return Format::Dot;
  throw UsageError("--format: expected text, json-lines or dot, got '" + text + "'");
}

Rational parse_eps(const std::string& text) {
  Rational eps;
  try {
    eps = parse_rational(text);
  } catch (const Error& e) {
    throw UsageError(std::string("--eps: ") + e.what());
  }
  if (eps <= 0) throw UsageError("--eps must be positive");
  return eps;
}

json interval_json(const Interval& i) { return {{"lo", to_fraction(i.lo)}, {"hi", to_fraction(i.hi)}}; }

std::string interval_text(const Interval& i) { return "[" + to_decimal(i.lo) + "," + to_decimal(i.hi) + "]"; }

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_file(path, text);
}

// False after printing one diagnostic line per failure.
bool check_phr(const GrammarFile& f, Format format, std::ostream& out, std::ostream& err) {
  const auto failures = phr_check(f.grammar, f.mu);
  for (const auto& fail : failures) {
    if (format == Format::JsonLines)
      out << json{{"record", "failure"}, {"canonical", fail.canonical}, {"sum", to_fraction(fail.sum)},
                  {"message", fail.to_string()}}
                 .dump()
          << '\n';
    err << fail.to_string() << '\n';
  }
  return failures.empty();
}

VertexAddress vertex_arg(const GrammarIndex& index, const std::string& text, const char* flag) {
  try {
    return index.normalize(parse_address(index, text));
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

bool propositional(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
    case Formula::Kind::Atom: return true;
    case Formula::Kind::Not: return propositional(*f.left);
    case Formula::Kind::And: return propositional(*f.left) && propositional(*f.right);
    default: return false;
  }
}

// Canonical vertices satisfying a boolean combination of colours.
CanonSet colour_set(const GrammarIndex& index, const ProbabilityMap& mu, const std::string& text, const char* flag) {
  try {
    const FormulaPtr f = parse_formula(text);
    if (!propositional(*f)) throw UsageError(std::string(flag) + ": expected a colour expression, got '" + text + "'");
    Checker checker(index, mu);
    return checker.label(f).under;
  } catch (const Error& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

int worst(int a, int b) {
  auto rank = [](int c) { return c == kUnknown ? 2 : c == kFailed ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kOk;
    case Verdict::Fails: return kFailed;
    case Verdict::Unknown: return kUnknown;
  }
  return kUnknown;
}

// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Format format = parse_format(cfg.format, Format::Text);
  const GrammarFile f = load_grammar(cfg.grammar);
  const bool ok = check_phr(f, format, out, err);
  if (format == Format::JsonLines)
    out << json{{"record", "validation"}, {"grammar", cfg.grammar}, {"valid", ok}}.dump() << '\n';
  return ok ? kOk : kFailed;
}

int cmd_expand(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Format format = parse_format(cfg.format, Format::Dot);
  const GrammarFile f = load_grammar(cfg.grammar);
  const GrammarIndex index(f.grammar);
  const Expansion ex = expand(f.grammar, cfg.depth);
  const Grammar& g = f.grammar;
  std::ostringstream text;
  switch (format) {
    case Format::Dot: text << to_dot(index, ex); break;
    case Format::Text:
      for (const auto& [id, v] : ex.vertices)
        text << "vertex " << id << " level=" << v.level << " can=" << index.describe(v.canonical)
             << " address=" << format_address(index, v.address) << '\n';
      for (const Hyperarc& h : ex.graph.arcs) {
        text << (g.is_nonterminal(h.label) ? "hyperarc " : g.is_colour(h.label) ? "colour " : "arc ")
             << g.name(h.label);
        for (VertexId v : h.vertices) text << ' ' << v;
        text << '\n';
      }
      break;
    case Format::JsonLines:
      for (const auto& [id, v] : ex.vertices)
        text << json{{"record", "vertex"}, {"id", id}, {"level", v.level}, {"canonical", index.describe(v.canonical)},
                     {"address", format_address(index, v.address)}}
                    .dump()
             << '\n';
      for (const Hyperarc& h : ex.graph.arcs)
        text << json{{"record", g.is_nonterminal(h.label) ? "hyperarc" : g.is_colour(h.label) ? "colour" : "arc"},
                     {"label", g.name(h.label)},
                     {"vertices", h.vertices}}
                    .dump()
             << '\n';
      break;
  }
  write_output(cfg.output, text.str(), out);
  return kOk;
}

int cmd_from_pds(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const PushdownSystem p = load_pds(cfg.input);
  const GrammarFile f =
      to_grammar(p, cfg.complete_outside ? PdsConstruction::CompleteOutside : PdsConstruction::Figure);
  write_output(cfg.output, serialize_grammar(f.grammar, f.mu), out);
  return kOk;
}

int cmd_gen_pcp(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Format format = parse_format(cfg.format, Format::Text);
  const PcpInstance p = load_pcp(cfg.input);
  const PcpGadget gadget = encode(p);
  const std::string formula = to_string(*gadget.formula);
  const std::string grammar = serialize_grammar(gadget.file.grammar, gadget.file.mu);
  if (cfg.output.empty() || cfg.output == "-") out << "# formula: " << formula << '\n' << grammar;
  else write_file(cfg.output, grammar);

  std::optional<std::vector<unsigned>> seq;
  if (!cfg.sequence.empty()) {
    seq.emplace();
    std::istringstream in(cfg.sequence);
    std::string item;
    while (std::getline(in, item, ','))
      try {
        seq->push_back(static_cast<unsigned>(std::stoul(item)));
      } catch (const std::exception&) {
        throw UsageError("--seq: expected comma-separated pair indices, got '" + cfg.sequence + "'");
      }
  }
  if (cfg.output.empty() || cfg.output == "-") return kOk;
  if (format == Format::JsonLines) {
    json record{{"record", "gadget"}, {"formula", formula}, {"pairs", p.pairs.size()}};
    if (seq) {
      const GrammarIndex index(gadget.file.grammar);
      record["address"] = format_address(index, s_address(gadget.file.grammar, p, *seq));
      record["closed_form"] = to_fraction(closed_form(p, *seq));
    }
    out << record.dump() << '\n';
  } else {
    out << "formula=" << formula << '\n';
    if (seq) {
      const GrammarIndex index(gadget.file.grammar);
      const Rational red = closed_form(p, *seq);
      out << "address=" << format_address(index, s_address(gadget.file.grammar, p, *seq))
          << " red=" << to_fraction(red) << " (" << to_decimal(red) << ")\n";
    }
  }
  return kOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Format format = parse_format(cfg.format, Format::Text);
  const GrammarFile f = load_grammar(cfg.grammar);
  if (!check_phr(f, format, out, err)) return kFailed;
  const GrammarIndex index(f.grammar);

  FormulaPtr phi;
  try {
    phi = parse_formula(cfg.formula);
  } catch (const FormulaError& e) {
    throw UsageError(std::string("--formula: ") + e.what());
  }
  CheckOptions opts;
  opts.mode = cfg.qualitative ? CheckMode::QualitativeOnly : CheckMode::Approximate;
  opts.eps = cfg.eps;
  opts.refinements = cfg.refinements;
  Checker checker(index, f.mu, opts);
  try {
    checker.label(phi);
  } catch (const Error& e) {
    throw UsageError(std::string("--formula: ") + e.what());
  }

  auto report = [&](const std::string& where, const PointVerdict& pv) {
    if (format == Format::JsonLines) {
      json record{{"record", "verdict"}, {"formula", to_string(*phi)}, {"vertex", where},
                  {"verdict", verdict_text(pv.verdict)}};
      if (pv.enclosure) record["enclosure"] = interval_json(*pv.enclosure);
      out << record.dump() << '\n';
      return;
    }
    out << where << ": " << verdict_text(pv.verdict);
    if (pv.enclosure) out << " enclosure=" << interval_text(*pv.enclosure);
    out << '\n';
  };

  int code = kOk;
  if (!cfg.at.empty()) {
    const VertexAddress address = vertex_arg(index, cfg.at, "--at");
    const PointVerdict pv = checker.at(phi, address);
    report(cfg.at, pv);
    code = verdict_code(pv.verdict);
  } else {
    const TriSet& sat = checker.label(phi);
    const auto enclosures = checker.enclosures(phi);
    for (std::size_t i = 0; i < sat.under.size(); ++i) {
      const PointVerdict pv{sat.at(i), enclosures[i]};
      report(index.describe(index.canonical_vertices()[i]), pv);
      code = worst(code, verdict_code(pv.verdict));
    }
  }
  if (cfg.emit_coloured) {
    const Grammar coloured = checker.coloured(phi);
    if (format == Format::JsonLines)
      out << json{{"record", "grammar"}, {"text", serialize_grammar(coloured, f.mu)}}.dump() << '\n';
    else out << serialize_grammar(coloured, f.mu);
  }
  return code;
}

StateSet states_of(const FiniteMC& mc, const GrammarIndex& index, const CanonSet& set) {
  StateSet s(mc.size(), false);
  for (std::size_t i = 0; i < mc.size(); ++i) s[i] = set[index.canonical_index(mc.states[i].canonical)];
  return s;
}

int cmd_prob(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Format format = parse_format(cfg.format, Format::Text);
  const GrammarFile f = load_grammar(cfg.grammar);
  if (!check_phr(f, format, out, err)) return kFailed;
  const GrammarIndex index(f.grammar);
  const CanonSet phi1 = colour_set(index, f.mu, cfg.phi1, "--phi1");
  const CanonSet phi2 = colour_set(index, f.mu, cfg.phi2, "--phi2");
  const VertexAddress from = vertex_arg(index, cfg.from, "--from");

  if (cfg.method == "enclosure") {
    const UntilAnalysis analysis(index, f.mu, phi1, phi2, cfg.eps);
    if (cfg.emit_system) {
      const PolySystem& sys = analysis.system().poly;
      for (std::size_t i = 0; i < sys.size(); ++i) {
        const std::string rhs = sys.fixed[i] ? to_fraction(*sys.fixed[i]) : format_polynomial(sys, sys.rhs[i]);
        if (format == Format::JsonLines)
          out << json{{"record", "equation"}, {"var", sys.names[i]}, {"rhs", rhs}, {"fixed", sys.fixed[i].has_value()}}
                     .dump()
              << '\n';
        else out << sys.names[i] << " = " << rhs << '\n';
      }
    }
    const Interval value = analysis.at(from);
    const bool converged = analysis.converged() && value.width() <= cfg.eps;
    if (format == Format::JsonLines) {
      out << json{{"record", "enclosure"}, {"from", cfg.from}, {"method", "enclosure"},
                  {"lower", to_fraction(value.lo)}, {"upper", to_fraction(value.hi)},
                  {"eps", to_fraction(cfg.eps)}, {"converged", converged}}
                 .dump()
          << '\n';
    } else {
      out << "lower=" << to_fraction(value.lo) << " upper=" << to_fraction(value.hi) << '\n';
      out << "approx=" << interval_text(value) << (converged ? "" : " (not converged)") << '\n';
    }
    return converged ? kOk : kUnknown;
  }

  if (cfg.method != "truncate" && cfg.method != "sample")
    throw UsageError("--method: expected enclosure, truncate or sample, got '" + cfg.method + "'");

  // Without --depth the chain is explored around the start vertex, which never escapes.
  std::vector<bool> open(phi1.size());
  for (std::size_t i = 0; i < open.size(); ++i) open[i] = phi1[i] && !phi2[i];
  const FiniteMC mc = cfg.truncate_depth ? truncate(f.grammar, f.mu, *cfg.truncate_depth)
                                         : explore(index, f.mu, from, cfg.horizon, &open);
  const std::size_t start = mc.state_at(from);
  PathQuery q{states_of(mc, index, phi1), states_of(mc, index, phi2), cfg.horizon};

  if (cfg.method == "truncate") {
    const Rational lower = bounded_until(mc, q, start);
    // Mass still undecided after the horizon: paths that stayed in phi1 & !phi2 throughout.
    PathQuery leave{StateSet(mc.size()), StateSet(mc.size()), cfg.horizon};
    for (std::size_t i = 0; i < mc.size(); ++i) {
      leave.phi1[i] = q.phi1[i] && !q.phi2[i];
      leave.phi2[i] = !leave.phi1[i];
    }
    Rational upper = lower + 1 - bounded_until(mc, leave, start);
    upper.canonicalize();
    if (format == Format::JsonLines)
      out << json{{"record", "enclosure"}, {"from", cfg.from}, {"method", "truncate"}, {"horizon", cfg.horizon},
                  {"lower", to_fraction(lower)}, {"upper", to_fraction(upper)}}
                 .dump()
          << '\n';
    else
      out << "lower=" << to_fraction(lower) << " upper=" << to_fraction(upper) << '\n'
          << "approx=" << interval_text({lower, upper}) << '\n';
    return kOk;
  }

  const SampleResult r = sample_until(mc, q, start, cfg.samples, cfg.seed, cfg.threads);
  if (format == Format::JsonLines)
    out << json{{"record", "sample"}, {"from", cfg.from}, {"horizon", cfg.horizon}, {"seed", cfg.seed},
                {"hits", r.hits}, {"escapes", r.escapes}, {"n", r.n}}
               .dump()
        << '\n';
  else {
    out << "hits=" << r.hits << " escapes=" << r.escapes << " n=" << r.n << '\n';
    if (r.n > 0) {
      Rational estimate(r.hits, r.n);
      estimate.canonicalize();
      out << "estimate=" << to_decimal(estimate, 6) << '\n';
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

const char* const kFooter =
    "Exit codes: 0 success/holds, 1 validation failure/fails, 2 unknown, 3 usage error.\n"
    "Vertices are written `vertex` (axiom rule) or `h1.h2/vertex` (hyperarc path).";

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model checking for probabilistic hyperedge-replacement grammars", "pregma"};
  app.set_version_flag("--version", PREGMA_VERSION);
  app.footer(kFooter);
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_format = [&](CLI::App* sub, const char* choices) {
    sub->add_option("--format", cfg.format, std::string("Output format: ") + choices);
  };
  auto add_eps = [&](CLI::App* sub) {
    sub->add_option("--eps", cfg.eps_text, "Enclosure width, p/q or decimal")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check that a grammar is a probabilistic grammar");
  validate->add_option("grammar", cfg.grammar, "Grammar file")->required();
  add_format(validate, "text, json-lines");

  auto* expand_cmd = app.add_subcommand("expand", "Emit the expansion of a grammar to a given depth");
  expand_cmd->alias("emit");
  expand_cmd->add_option("grammar", cfg.grammar, "Grammar file")->required();
  expand_cmd->add_option("--depth", cfg.depth, "Parallel rewriting steps")->capture_default_str();
  expand_cmd->add_option("-o,--output", cfg.output, "Output file (default: stdout)");
  add_format(expand_cmd, "dot (default), text, json-lines");

  auto* from_pds = app.add_subcommand("from-pds", "Convert a pushdown system into a grammar");
  from_pds->alias("convert");
  from_pds->add_option("pds", cfg.input, "Pushdown system file")->required();
  from_pds->add_option("-o,--output", cfg.output, "Grammar file (default: stdout)");
  from_pds->add_flag("--complete-outside", cfg.complete_outside,
                     "Height-window construction, accepted by every engine");

  auto* check = app.add_subcommand("check", "Check a PCTL formula");
  check->add_option("grammar", cfg.grammar, "Grammar file")->required();
  check->add_option("--formula", cfg.formula, "PCTL state formula")->required();
  check->add_option("--at", cfg.at, "Vertex to check (default: every canonical vertex)");
  add_eps(check);
  check->add_option("--refinements", cfg.refinements, "Extra solver rounds for undecided thresholds")
      ->capture_default_str();
  check->add_flag("--qualitative", cfg.qualitative, "Qualitative engine only; thresholds must be 0 or 1");
  check->add_flag("--emit-coloured", cfg.emit_coloured, "Print the grammar coloured with every subformula");
  add_format(check, "text, json-lines");

  auto* prob = app.add_subcommand("prob", "Probability of phi1 U phi2 from one vertex");
  prob->add_option("grammar", cfg.grammar, "Grammar file")->required();
  prob->add_option("--phi1", cfg.phi1, "Colour expression")->capture_default_str();
  prob->add_option("--phi2", cfg.phi2, "Colour expression")->required();
  prob->add_option("--from", cfg.from, "Start vertex")->required();
  add_eps(prob);
  prob->add_option("--method", cfg.method, "enclosure, truncate or sample")->capture_default_str();
  prob->add_option("--horizon", cfg.horizon, "Step bound for truncate/sample")->capture_default_str();
  prob->add_option("--depth", cfg.truncate_depth, "Use expand(depth) instead of exploring from --from");
  prob->add_option("--n", cfg.samples, "Trajectories (sample)")->capture_default_str();
  prob->add_option("--seed", cfg.seed, "Sampler seed")->capture_default_str();
  prob->add_option("--threads", cfg.threads, "Sampler workers (results depend on seed and workers)")
      ->capture_default_str();
  prob->add_flag("--emit-system", cfg.emit_system, "Print the polynomial system, one `var = rhs` per line");
  add_format(prob, "text, json-lines");

  auto* sample = app.add_subcommand("sample", "Monte-Carlo estimate of phi1 U phi2 (prob --method sample)");
  sample->add_option("grammar", cfg.grammar, "Grammar file")->required();
  sample->add_option("--phi1", cfg.phi1, "Colour expression")->capture_default_str();
  sample->add_option("--phi2", cfg.phi2, "Colour expression")->required();
  sample->add_option("--from", cfg.from, "Start vertex")->required();
  sample->add_option("--horizon", cfg.horizon, "Step bound")->capture_default_str();
  sample->add_option("--depth", cfg.truncate_depth, "Use expand(depth) instead of exploring from --from");
  sample->add_option("--n", cfg.samples, "Trajectories")->capture_default_str();
  sample->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
  sample->add_option("--threads", cfg.threads, "Workers")->capture_default_str();
  add_format(sample, "text, json-lines");

  auto* gen_pcp = app.add_subcommand("gen-pcp", "Build the PCP gadget grammar of an instance");
  gen_pcp->add_option("instance", cfg.input, "Instance file, one `pair <u> <v>` per line")->required();
  gen_pcp->add_option("-o,--output", cfg.output, "Grammar file (default: stdout)");
  gen_pcp->add_option("--seq", cfg.sequence, "Pair indices, e.g. 1,2,1: print the s-vertex and its red mass");
  add_format(gen_pcp, "text, json-lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    cfg.eps = parse_eps(cfg.eps_text);
    if (validate->parsed()) return cmd_validate(cfg, out, err);
    if (expand_cmd->parsed()) return cmd_expand(cfg, out, err);
    if (from_pds->parsed()) return cmd_from_pds(cfg, out, err);
    if (check->parsed()) return cmd_check(cfg, out, err);
    if (prob->parsed()) return cmd_prob(cfg, out, err);
    if (sample->parsed()) {
      cfg.method = "sample";
      return cmd_prob(cfg, out, err);
    }
    if (gen_pcp->parsed()) return cmd_gen_pcp(cfg, out, err);
  } catch (const UsageError& e) {
    err << "pregma: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    err << "pregma: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace pregma::cli
