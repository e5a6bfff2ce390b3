#include "pregma/grammar_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pregma {

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

namespace {

struct Line {
  std::size_t number;
  bool indented;
  std::vector<std::string> words;
};

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error("line " + std::to_string(line) + ": " + msg);
}

unsigned parse_arity(const Line& l, const std::string& s) {
  unsigned v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(l.number, "bad arity '" + s + "'");
  return v;
}

void expect_words(const Line& l, std::size_t n) {
  if (l.words.size() != n) fail(l.number, "'" + l.words[0] + "' expects " + std::to_string(n - 1) + " argument(s)");
}

}  // namespace

void add_axiom_vertex_colours(Grammar& g) {
  if (!g.is_nonterminal(g.axiom)) return;
  Rule& z = g.rule(g.axiom);
  for (VertexId v : std::vector<VertexId>(z.rhs.vertices)) {
    const std::string& name = z.vertex_names[v];
    if (g.find_symbol(name)) continue;
    SymbolId c = g.add_symbol(name, 1, SymbolKind::Terminal);
    z.rhs.add_arc(Hyperarc{c, {v}});
  }
}

GrammarFile parse_grammar(std::string_view text) {
  std::vector<Line> lines;
  {
    std::size_t number = 0, pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(pos, end - pos);
      ++number;
      if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      Line l{number, !raw.empty() && (raw[0] == ' ' || raw[0] == '\t'), split_words(raw)};
      lines.push_back(std::move(l));
      if (end == text.size()) break;
      pos = end + 1;
    }
  }

  GrammarFile out;
  Grammar& g = out.grammar;
  std::string axiom_name;
  std::size_t axiom_line = 0;
  std::vector<std::pair<const Line*, std::string>> default_colours;
  std::vector<std::pair<const Line*, std::string>> absorbing;
  std::vector<const Line*> probs;

  // Pass 1: declarations.
  for (const Line& l : lines) {
    if (l.words.empty() || l.indented) continue;
    const std::string& kw = l.words[0];
    if (kw == "nonterminal" || kw == "terminal") {
      expect_words(l, 3);
      g.add_symbol(l.words[1], parse_arity(l, l.words[2]),
                   kw == "nonterminal" ? SymbolKind::Nonterminal : SymbolKind::Terminal);
    } else if (kw == "colour") {
      expect_words(l, 2);
      g.add_symbol(l.words[1], 1, SymbolKind::Terminal);
    } else if (kw == "axiom") {
      expect_words(l, 2);
      axiom_name = l.words[1];
      axiom_line = l.number;
    } else if (kw == "prob") {
      expect_words(l, 3);
      probs.push_back(&l);
    } else if (kw == "default-colour") {
      expect_words(l, 2);
      default_colours.emplace_back(&l, l.words[1]);
    } else if (kw == "absorbing") {
      expect_words(l, 2);
      absorbing.emplace_back(&l, l.words[1]);
    } else if (kw != "rule") {
      fail(l.number, "unknown directive '" + kw + "'");
    }
  }
  if (axiom_name.empty()) throw Error("no axiom declared");
  {
    auto z = g.find_symbol(axiom_name);
    if (!z) fail(axiom_line, "axiom '" + axiom_name + "' is not declared");
    g.axiom = *z;
  }

  auto lookup = [&](const Line& l, const std::string& name) {
    auto s = g.find_symbol(name);
    if (!s) fail(l.number, "undeclared symbol '" + name + "'");
    return *s;
  };

  for (const Line* l : probs) {
    SymbolId s = lookup(*l, l->words[1]);
    if (!g.is_arc_label(s)) fail(l->number, "'" + l->words[1] + "' is not an arc terminal");
    Rational p;
    try {
      p = parse_rational(l->words[2]);
    } catch (const Error& e) {
      fail(l->number, e.what());
    }
    if (p < 0 || p > 1) fail(l->number, "probability outside [0,1]");
    out.mu[s] = p;
  }
  for (const auto& [l, name] : absorbing) {
    if (name == "*") {
      g.absorbing_sinks = true;
      continue;
    }
    SymbolId s = lookup(*l, name);
    if (!g.is_colour(s)) fail(l->number, "'" + name + "' is not a colour");
    g.absorbing_colours.insert(s);
  }

  // Pass 2: rules.
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& head = lines[i];
    if (head.words.empty() || head.indented || head.words[0] != "rule") continue;
    if (head.words.size() < 2) fail(head.number, "rule needs a nonterminal");
    Rule r;
    r.lhs = lookup(head, head.words[1]);
    if (!g.is_nonterminal(r.lhs)) fail(head.number, "'" + head.words[1] + "' is not a nonterminal");
    auto vertex = [&](const std::string& name) {
      if (auto v = r.find_vertex(name)) return *v;
      r.vertex_names.push_back(name);
      VertexId v = static_cast<VertexId>(r.vertex_names.size() - 1);
      r.rhs.add_vertex(v);
      return v;
    };
    if (head.words.size() > 2) {
      if (head.words[2] != "inputs") fail(head.number, "expected 'inputs' after rule name");
      for (std::size_t k = 3; k < head.words.size(); ++k) {
        auto existing = r.find_vertex(head.words[k]);
        r.iota.push_back(existing ? *existing : vertex(head.words[k]));
      }
    }
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line& l = lines[j];
      if (l.words.empty() || !l.indented) break;
      const std::string& kw = l.words[0];
      if (kw == "vertex") {
        for (std::size_t k = 1; k < l.words.size(); ++k) vertex(l.words[k]);
        continue;
      }
      if (kw != "arc" && kw != "hyperarc" && kw != "colour") fail(l.number, "unknown rule line '" + kw + "'");
      if (l.words.size() < 2) fail(l.number, "missing label");
      SymbolId s = lookup(l, l.words[1]);
      const RankedSymbol& info = g.info(s);
      if (kw == "arc" && !g.is_arc_label(s)) fail(l.number, "'" + info.name + "' is not an arc terminal");
      if (kw == "colour" && !g.is_colour(s)) fail(l.number, "'" + info.name + "' is not a colour");
      if (kw == "hyperarc" && !g.is_nonterminal(s)) fail(l.number, "'" + info.name + "' is not a nonterminal");
      if (l.words.size() - 2 != info.arity)
        fail(l.number, "'" + info.name + "' expects " + std::to_string(info.arity) + " vertices");
      Hyperarc h{s, {}};
      for (std::size_t k = 2; k < l.words.size(); ++k) h.vertices.push_back(vertex(l.words[k]));
      r.rhs.add_arc(std::move(h));
    }
    g.rules.push_back(std::move(r));
  }

  for (const auto& [l, name] : default_colours) {
    SymbolId c = lookup(*l, name);
    if (!g.is_colour(c)) fail(l->number, "'" + name + "' is not a colour");
    for (Rule& r : g.rules) {
      std::set<VertexId> inputs(r.iota.begin(), r.iota.end());
      std::set<VertexId> coloured;
      for (const Hyperarc& h : r.rhs.arcs)
        if (g.is_colour(h.label)) coloured.insert(h.vertices[0]);
      for (VertexId v : std::vector<VertexId>(r.rhs.vertices))
        if (!inputs.count(v) && !coloured.count(v)) r.rhs.add_arc(Hyperarc{c, {v}});
    }
  }
  bool has_axiom_rule = false;
  for (const Rule& r : g.rules) has_axiom_rule = has_axiom_rule || r.lhs == g.axiom;
  if (has_axiom_rule) add_axiom_vertex_colours(g);
  return out;
}

GrammarFile load_grammar(const std::string& path) {
  try {
    return parse_grammar(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string serialize_grammar(const Grammar& g, const ProbabilityMap& mu) {
  std::ostringstream out;
  for (SymbolId s = 0; s < g.symbols.size(); ++s) {
    const RankedSymbol& x = g.symbols[s];
    if (x.kind == SymbolKind::Nonterminal) out << "nonterminal " << x.name << ' ' << x.arity << '\n';
    else if (x.arity == 1) out << "colour " << x.name << '\n';
    else out << "terminal " << x.name << ' ' << x.arity << '\n';
  }
  for (const auto& [s, p] : mu) out << "prob " << g.name(s) << ' ' << to_fraction(p) << '\n';
  if (g.axiom != kNoSymbol) out << "axiom " << g.name(g.axiom) << '\n';
  if (g.absorbing_sinks) out << "absorbing *\n";
  for (SymbolId c : g.absorbing_colours) out << "absorbing " << g.name(c) << '\n';
  for (const Rule& r : g.rules) {
    out << "\nrule " << g.name(r.lhs);
    if (!r.iota.empty()) {
      out << " inputs";
      for (VertexId v : r.iota) out << ' ' << r.name_of(v);
    }
    out << '\n';
    std::set<VertexId> inputs(r.iota.begin(), r.iota.end());
    std::vector<VertexId> rest;
    for (VertexId v : r.rhs.vertices)
      if (!inputs.count(v)) rest.push_back(v);
    if (!rest.empty()) {
      out << "  vertex";
      for (VertexId v : rest) out << ' ' << r.name_of(v);
      out << '\n';
    }
    for (const Hyperarc& h : r.rhs.arcs) {
      if (g.is_nonterminal(h.label)) out << "  hyperarc ";
      else if (g.is_colour(h.label)) out << "  colour ";
      else out << "  arc ";
      out << g.name(h.label);
      for (VertexId v : h.vertices) out << ' ' << r.name_of(v);
      out << '\n';
    }
  }
  return out.str();
}

namespace {
std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}
}  // namespace

std::string to_dot(const GrammarIndex& index, const Expansion& ex) {
  const Grammar& g = index.grammar();
  std::map<VertexId, std::vector<std::string>> colours;
  for (const Hyperarc& h : ex.graph.arcs)
    if (g.is_colour(h.label)) colours[h.vertices[0]].push_back(g.name(h.label));

  std::ostringstream out;
  out << "digraph expansion {\n  node [shape=circle fontsize=10];\n";
  for (VertexId v : ex.graph.vertices) {
    std::string cols;
    for (const auto& c : colours[v]) cols += (cols.empty() ? "" : ",") + c;
    out << "  v" << v << " [label=\"v" << v;
    if (!cols.empty()) out << "\\n" << dot_escape(cols);
    out << "\"";
    if (!cols.empty()) out << " colours=\"" << dot_escape(cols) << "\"";
    if (auto it = ex.vertices.find(v); it != ex.vertices.end())
      out << " tooltip=\"" << it->second.level << '/' << dot_escape(index.describe(it->second.canonical)) << "\"";
    out << "];\n";
  }
  std::size_t hyper = 0;
  for (const Hyperarc& h : ex.graph.arcs) {
    if (g.is_arc_label(h.label)) {
      out << "  v" << h.vertices[0] << " -> v" << h.vertices[1] << " [label=\"" << dot_escape(g.name(h.label))
          << "\"];\n";
    } else if (g.is_nonterminal(h.label)) {
      out << "  h" << hyper << " [shape=box style=dashed label=\"" << dot_escape(g.name(h.label)) << "\"];\n";
      for (std::size_t i = 0; i < h.vertices.size(); ++i)
        out << "  h" << hyper << " -> v" << h.vertices[i] << " [style=dashed arrowhead=none label=\"" << (i + 1)
            << "\"];\n";
      ++hyper;
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace pregma
