#include "pregma/pushdown.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace pregma {

std::string word_text(const Word& w) {
  std::string out;
  for (const auto& s : w) out += s;
  return out;
}

bool PushdownSystem::is_stack(std::string_view s) const {
  return std::find(stack.begin(), stack.end(), s) != stack.end();
}

bool PushdownSystem::is_state(std::string_view s) const {
  return std::find(states.begin(), states.end(), s) != states.end();
}

std::vector<std::string> PushdownSystem::labels() const {
  std::vector<std::string> out;
  for (const auto& r : rules)
    if (std::find(out.begin(), out.end(), r.label) == out.end()) out.push_back(r.label);
  return out;
}

Word parse_word(const PushdownSystem& p, std::string_view text) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t best = 0;
    const std::string* match = nullptr;
    for (const auto* alphabet : {&p.stack, &p.states})
      for (const auto& s : *alphabet)
        if (s.size() > best && text.substr(i, s.size()) == s) {
          best = s.size();
          match = &s;
        }
    if (!match) throw Error("cannot split '" + std::string(text) + "' into declared symbols");
    w.push_back(*match);
    i += best;
  }
  if (w.empty()) throw Error("empty word");
  for (std::size_t k = 0; k + 1 < w.size(); ++k)
    if (!p.is_stack(w[k])) throw Error("'" + std::string(text) + "': only the last symbol may be a state");
  if (!p.is_state(w.back())) throw Error("'" + std::string(text) + "' must end with a state");
  return w;
}

PushdownSystem parse_pds(std::string_view text) {
  PushdownSystem p;
  struct Pending {
    std::size_t line;
    std::vector<std::string> words;
  };
  std::vector<Pending> later;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    auto words = split_words(raw);
    if (words.empty()) continue;
    const std::string& kw = words[0];
    auto fail = [&](const std::string& msg) { throw Error("line " + std::to_string(number) + ": " + msg); };
    if (kw == "stack") {
      p.stack.insert(p.stack.end(), words.begin() + 1, words.end());
    } else if (kw == "states") {
      p.states.insert(p.states.end(), words.begin() + 1, words.end());
    } else if (kw == "rule" || kw == "start") {
      later.push_back({number, words});
    } else if (kw == "prob") {
      if (words.size() != 3) fail("expected 'prob <label> <p/q>'");
      try {
        p.mu[words[1]] = parse_rational(words[2]);
      } catch (const Error& e) {
        fail(e.what());
      }
    } else if (kw == "absorbing") {
      p.absorbing = true;
    } else {
      fail("unknown directive '" + kw + "'");
    }
  }
  for (const auto& s : p.stack)
    if (p.is_state(s)) throw Error("'" + s + "' is both a stack symbol and a state");
  for (const auto& [line, words] : later) {
    auto fail = [&, line = line](const std::string& msg) {
      throw Error("line " + std::to_string(line) + ": " + msg);
    };
    try {
      if (words[0] == "rule") {
        if (words.size() != 4) fail("expected 'rule <lhs> <label> <rhs>'");
        p.rules.push_back(SuffixRule{parse_word(p, words[1]), words[2], parse_word(p, words[3])});
      } else {
        if (words.size() != 2) fail("expected 'start <word>'");
        p.start = parse_word(p, words[1]);
      }
    } catch (const Error& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      fail(e.what());
    }
  }
  return p;
}

PushdownSystem load_pds(const std::string& path) { return parse_pds(read_file(path)); }

namespace {

// Rule under construction, vertices addressed by name.
class RuleBuilder {
 public:
  explicit RuleBuilder(SymbolId lhs) { rule_.lhs = lhs; }

  VertexId vertex(const std::string& name) {
    if (auto v = rule_.find_vertex(name)) return *v;
    const auto v = static_cast<VertexId>(rule_.vertex_names.size());
    rule_.vertex_names.push_back(name);
    rule_.rhs.add_vertex(v);
    return v;
  }
  bool has(const std::string& name) const { return rule_.find_vertex(name).has_value(); }
  void input(const std::string& name) { rule_.iota.push_back(vertex(name)); }
  void arc(SymbolId label, const std::vector<std::string>& names) {
    Hyperarc h{label, {}};
    for (const auto& n : names) h.vertices.push_back(vertex(n));
    rule_.rhs.add_arc(std::move(h));
  }
  bool is_input(VertexId v) const { return std::find(rule_.iota.begin(), rule_.iota.end(), v) != rule_.iota.end(); }
  Rule take() { return std::move(rule_); }
  const Rule& peek() const { return rule_; }

 private:
  Rule rule_;
};

bool is_suffix(const Word& w, const Word& x) {
  return x.size() <= w.size() && std::equal(x.begin(), x.end(), w.end() - static_cast<std::ptrdiff_t>(x.size()));
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Applies r to w when its lhs is a suffix of w.
std::optional<Word> apply_rule(const Word& w, const SuffixRule& r) {
  if (!is_suffix(w, r.lhs)) return std::nullopt;
  Word out(w.begin(), w.end() - static_cast<std::ptrdiff_t>(r.lhs.size()));
  out.insert(out.end(), r.rhs.begin(), r.rhs.end());
  return out;
}

// Every configuration word with `length` symbols, in alphabet order.
std::vector<Word> words_of_length(const PushdownSystem& p, std::size_t length) {
  std::vector<Word> prefixes{Word{}};
  for (std::size_t k = 1; k < length; ++k) {
    std::vector<Word> next;
    for (const auto& w : prefixes)
      for (const auto& s : p.stack) next.push_back(concat(w, {s}));
    prefixes = std::move(next);
  }
  std::vector<Word> out;
  for (const auto& w : prefixes)
    for (const auto& q : p.states) out.push_back(concat(w, {q}));
  return out;
}

std::vector<Word> stack_words(const PushdownSystem& p, std::size_t length) {
  std::vector<Word> out{Word{}};
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (const auto& s : p.stack) next.push_back(concat(w, {s}));
    out = std::move(next);
  }
  return out;
}

struct Symbols {
  SymbolId axiom, x;
  std::map<std::string, SymbolId> labels;
  std::map<std::string, SymbolId> state_colour;
};

Symbols declare(Grammar& g, const PushdownSystem& p, unsigned arity) {
  Symbols s;
  s.axiom = g.add_symbol("Z", 0, SymbolKind::Nonterminal);
  s.x = g.add_symbol("X", arity, SymbolKind::Nonterminal);
  g.axiom = s.axiom;
  for (const auto& l : p.labels()) {
    if (g.find_symbol(l)) throw Error("arc label '" + l + "' clashes with a reserved name");
    s.labels[l] = g.add_symbol(l, 2, SymbolKind::Terminal);
  }
  for (const auto& q : p.states) s.state_colour[q] = g.add_symbol("st_" + q, 1, SymbolKind::Terminal);
  return s;
}

void colour_states(RuleBuilder& b, const Symbols& s, const PushdownSystem& p) {
  const Rule& r = b.peek();
  for (VertexId v = 0; v < r.vertex_names.size(); ++v) {
    if (b.is_input(v)) continue;
    const Word w = parse_word(p, r.vertex_names[v]);
    b.arc(s.state_colour.at(w.back()), {r.vertex_names[v]});
  }
}

GrammarFile figure_grammar(const PushdownSystem& p) {
  // Strict nonempty suffixes of the rule sides, shortest first; a one-symbol side
  // that is no strict suffix is added too so that every side is a vertex.
  std::vector<Word> base;
  auto add = [&](const Word& w) {
    if (std::find(base.begin(), base.end(), w) == base.end()) base.push_back(w);
  };
  for (const auto& r : p.rules)
    for (const Word* side : {&r.lhs, &r.rhs})
      for (std::size_t k = 1; k < side->size(); ++k) add(Word(side->begin() + static_cast<std::ptrdiff_t>(k), side->end()));
  for (const auto& r : p.rules)
    for (const Word* side : {&r.lhs, &r.rhs})
      if (side->size() == 1) add(*side);
  std::stable_sort(base.begin(), base.end(), [](const Word& a, const Word& b) { return a.size() < b.size(); });

  GrammarFile out;
  Grammar& g = out.grammar;
  const Symbols s = declare(g, p, static_cast<unsigned>(base.size()));

  RuleBuilder x(s.x);
  for (const auto& t : base) x.input(word_text(t));
  for (const auto& a : p.stack)
    for (const auto& t : base) x.vertex(a + word_text(t));
  for (const auto& a : p.stack) {
    std::vector<std::string> names;
    for (const auto& t : base) names.push_back(a + word_text(t));
    x.arc(s.x, names);
  }
  for (const auto& r : p.rules) x.arc(s.labels.at(r.label), {word_text(r.lhs), word_text(r.rhs)});
  colour_states(x, s, p);

  RuleBuilder z(s.axiom);
  std::vector<std::string> names;
  for (const auto& t : base) names.push_back(word_text(t));
  for (const auto& n : names) z.vertex(n);
  z.arc(s.x, names);
  colour_states(z, s, p);

  g.rules.push_back(z.take());
  g.rules.push_back(x.take());
  g.absorbing_sinks = p.absorbing;
  for (const auto& [label, q] : p.mu) {
    if (!s.labels.count(label)) throw Error("probability for unused label '" + label + "'");
    out.mu[s.labels.at(label)] = q;
  }
  return out;
}

GrammarFile window_grammar(const PushdownSystem& p) {
  std::size_t longest = 1;
  for (const auto& r : p.rules) longest = std::max({longest, r.lhs.size(), r.rhs.size()});
  // Inputs are the words of length 1..h; an instance spans lengths 1..2h above its
  // prefix and its children sit h stack symbols deeper.
  const std::size_t h = std::max<std::size_t>(1, longest - 1);
  const std::size_t span = 2 * h;
  const std::size_t step = h;

  std::vector<Word> inputs, window;
  for (std::size_t len = 1; len <= span; ++len)
    for (auto& w : words_of_length(p, len)) {
      if (len <= h) inputs.push_back(w);
      window.push_back(std::move(w));
    }

  GrammarFile out;
  Grammar& g = out.grammar;
  const Symbols s = declare(g, p, static_cast<unsigned>(inputs.size()));

  auto fill = [&](RuleBuilder& b, bool with_inputs) {
    if (with_inputs)
      for (const auto& w : inputs) b.input(word_text(w));
    for (const auto& w : window) b.vertex(word_text(w));
    for (const auto& u : stack_words(p, step)) {
      std::vector<std::string> names;
      for (const auto& w : inputs) names.push_back(word_text(concat(u, w)));
      b.arc(s.x, names);
    }
    // Each step belongs to the instance whose prefix is the longest multiple of the
    // step inside the part of the configuration the rule leaves untouched.
    for (const auto& w : window)
      for (const auto& r : p.rules) {
        auto next = apply_rule(w, r);
        if (!next || next->size() > span || w.size() - r.lhs.size() >= step) continue;
        b.arc(s.labels.at(r.label), {word_text(w), word_text(*next)});
      }
    colour_states(b, s, p);
  };

  RuleBuilder z(s.axiom), x(s.x);
  fill(z, false);
  fill(x, true);
  g.rules.push_back(z.take());
  g.rules.push_back(x.take());
  g.absorbing_sinks = p.absorbing;
  for (const auto& [label, q] : p.mu) {
    if (!s.labels.count(label)) throw Error("probability for unused label '" + label + "'");
    out.mu[s.labels.at(label)] = q;
  }
  return out;
}

}  // namespace

GrammarFile to_grammar(const PushdownSystem& p, PdsConstruction construction) {
  for (const auto& r : p.rules)
    if (r.lhs.empty() || r.rhs.empty()) throw Error("rule sides must be nonempty words");
  return construction == PdsConstruction::Figure ? figure_grammar(p) : window_grammar(p);
}

std::string configuration_word(const GrammarIndex& index, const VertexAddress& address) {
  const VertexAddress a = index.normalize(address);
  const Grammar& g = index.grammar();
  SymbolId ctx = g.axiom;
  std::string prefix;
  for (std::uint32_t h : a.path) {
    const Rule& r = index.rule(ctx);
    const Hyperarc& arc = r.rhs.arcs.at(h);
    const Rule& child = index.rule(arc.label);
    if (arc.vertices.empty()) throw Error("hyperarc without vertices");
    const std::string& outer = r.name_of(arc.vertices[0]);
    const std::string& inner = child.name_of(child.iota[0]);
    if (outer.size() < inner.size() || outer.compare(outer.size() - inner.size(), inner.size(), inner) != 0)
      throw Error("vertex names do not follow the configuration naming");
    // outer is relative to the current prefix already.
    prefix += outer.substr(0, outer.size() - inner.size());
    ctx = arc.label;
  }
  return prefix + index.rule(ctx).name_of(a.vertex);
}

LabelledGraph configuration_graph(const PushdownSystem& p, std::size_t max_length) {
  LabelledGraph g;
  for (std::size_t len = 1; len <= max_length; ++len)
    for (const auto& w : words_of_length(p, len)) {
      g.vertices.insert(word_text(w));
      for (const auto& r : p.rules)
        if (auto next = apply_rule(w, r); next && next->size() <= max_length)
          g.arcs.emplace(word_text(w), r.label, word_text(*next));
    }
  return g;
}

LabelledGraph expansion_graph(const GrammarIndex& index, const Expansion& ex) {
  const Grammar& g = index.grammar();
  std::map<VertexId, std::string> name;
  LabelledGraph out;
  for (const auto& [id, cv] : ex.vertices) {
    name[id] = configuration_word(index, cv.address);
    out.vertices.insert(name[id]);
  }
  for (const Hyperarc& a : ex.graph.arcs)
    if (g.is_arc_label(a.label)) out.arcs.emplace(name.at(a.vertices[0]), g.name(a.label), name.at(a.vertices[1]));
  return out;
}

LabelledGraph component(const LabelledGraph& g, const std::string& start) {
  if (!g.vertices.count(start)) throw Error("unknown start vertex '" + start + "'");
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [from, label, to] : g.arcs) {
    adj[from].push_back(to);
    adj[to].push_back(from);
  }
  std::set<std::string> seen{start};
  std::deque<std::string> queue{start};
  while (!queue.empty()) {
    const std::string v = queue.front();
    queue.pop_front();
    for (const auto& w : adj[v])
      if (seen.insert(w).second) queue.push_back(w);
  }
  return induced(g, [&](const std::string& v) { return seen.count(v) > 0; });
}

std::string canonical_form(const LabelledGraph& g) {
  std::ostringstream out;
  for (const auto& v : g.vertices) out << v << '\n';
  for (const auto& [from, label, to] : g.arcs) out << from << " -" << label << "-> " << to << '\n';
  return out.str();
}

Hypergraph reachable_component(const Grammar& g, const std::string& start, unsigned depth) {
  const auto local = g.rule(g.axiom).find_vertex(start);
  if (!local) throw Error("unknown start vertex '" + start + "'");
  const Expansion ex = expand(g, depth);
  const VertexId root = ex.by_address.at(VertexAddress{{}, *local});
  std::map<VertexId, std::vector<VertexId>> adj;
  for (const Hyperarc& a : ex.graph.arcs)
    if (g.is_arc_label(a.label)) {
      adj[a.vertices[0]].push_back(a.vertices[1]);
      adj[a.vertices[1]].push_back(a.vertices[0]);
    }
  std::set<VertexId> seen{root};
  std::deque<VertexId> queue{root};
  while (!queue.empty()) {
    const VertexId v = queue.front();
    queue.pop_front();
    for (VertexId w : adj[v])
      if (seen.insert(w).second) queue.push_back(w);
  }
  Hypergraph out;
  for (VertexId v : ex.graph.vertices)
    if (seen.count(v)) out.add_vertex(v);
  for (const Hyperarc& a : ex.graph.arcs)
    if (std::all_of(a.vertices.begin(), a.vertices.end(), [&](VertexId v) { return seen.count(v) > 0; }))
      out.add_arc(a);
  return out;
}

}  // namespace pregma
