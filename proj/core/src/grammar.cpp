#include "pregma/grammar.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace pregma {

// ---------------------------------------------------------------------------
// Hypergraph / Rule / Grammar

bool Hypergraph::has_vertex(VertexId v) const {
  return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
}

void Hypergraph::add_vertex(VertexId v) {
  if (!has_vertex(v)) vertices.push_back(v);
}

bool Hypergraph::add_arc(Hyperarc arc) {
  if (std::find(arcs.begin(), arcs.end(), arc) != arcs.end()) return false;
  for (VertexId v : arc.vertices) add_vertex(v);
  arcs.push_back(std::move(arc));
  return true;
}

std::optional<VertexId> Rule::find_vertex(std::string_view name) const {
  for (std::size_t i = 0; i < vertex_names.size(); ++i)
    if (vertex_names[i] == name) return static_cast<VertexId>(i);
  return std::nullopt;
}

std::optional<SymbolId> Grammar::find_symbol(std::string_view name) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i].name == name) return static_cast<SymbolId>(i);
  return std::nullopt;
}

SymbolId Grammar::symbol(std::string_view name) const {
  auto s = find_symbol(name);
  if (!s) throw Error("unknown symbol '" + std::string(name) + "'");
  return *s;
}

bool Grammar::is_nonterminal(SymbolId s) const {
  return s < symbols.size() && symbols[s].kind == SymbolKind::Nonterminal;
}
bool Grammar::is_colour(SymbolId s) const {
  return s < symbols.size() && symbols[s].kind == SymbolKind::Terminal && symbols[s].arity == 1;
}
bool Grammar::is_arc_label(SymbolId s) const {
  return s < symbols.size() && symbols[s].kind == SymbolKind::Terminal && symbols[s].arity == 2;
}

std::vector<SymbolId> Grammar::nonterminals() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < symbols.size(); ++s)
    if (is_nonterminal(s)) out.push_back(s);
  return out;
}
std::vector<SymbolId> Grammar::colours() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < symbols.size(); ++s)
    if (is_colour(s)) out.push_back(s);
  return out;
}
std::vector<SymbolId> Grammar::arc_labels() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < symbols.size(); ++s)
    if (is_arc_label(s)) out.push_back(s);
  return out;
}

const Rule& Grammar::rule(SymbolId nonterminal) const {
  for (const Rule& r : rules)
    if (r.lhs == nonterminal) return r;
  throw Error("no rule for '" + (nonterminal < symbols.size() ? symbols[nonterminal].name : std::string("?")) + "'");
}

Rule& Grammar::rule(SymbolId nonterminal) {
  return const_cast<Rule&>(static_cast<const Grammar&>(*this).rule(nonterminal));
}

SymbolId Grammar::add_symbol(std::string name, unsigned arity, SymbolKind kind) {
  symbols.push_back(RankedSymbol{std::move(name), arity, kind});
  return static_cast<SymbolId>(symbols.size() - 1);
}

// ---------------------------------------------------------------------------
// Structural validation

std::string_view kind_name(StructuralError::Kind kind) {
  using K = StructuralError::Kind;
  switch (kind) {
    case K::DuplicateSymbol: return "DuplicateSymbol";
    case K::TerminalArity: return "TerminalArity";
    case K::MissingAxiom: return "MissingAxiom";
    case K::AxiomArity: return "AxiomArity";
    case K::DuplicateRule: return "DuplicateRule";
    case K::MissingRule: return "MissingRule";
    case K::RuleForTerminal: return "RuleForTerminal";
    case K::IotaArity: return "IotaArity";
    case K::NonInjectiveIota: return "NonInjectiveIota";
    case K::UnknownVertex: return "UnknownVertex";
    case K::UndeclaredLabel: return "UndeclaredLabel";
    case K::ArityMismatch: return "ArityMismatch";
    case K::DuplicateHyperarc: return "DuplicateHyperarc";
  }
  return "?";
}

std::string StructuralError::to_string() const {
  return std::string(kind_name(kind)) + "(" + location + ")";
}

std::vector<StructuralError> validate_grammar(const Grammar& g) {
  using K = StructuralError::Kind;
  std::vector<StructuralError> errs;
  auto report = [&](K k, std::string loc, std::string msg) {
    errs.push_back(StructuralError{k, std::move(loc), std::move(msg)});
  };
  auto sym_name = [&](SymbolId s) {
    return s < g.symbols.size() ? g.symbols[s].name : "#" + std::to_string(s);
  };

  std::set<std::string> seen;
  for (const RankedSymbol& s : g.symbols) {
    if (!seen.insert(s.name).second) report(K::DuplicateSymbol, s.name, "symbol declared twice");
    if (s.kind == SymbolKind::Terminal && s.arity != 1 && s.arity != 2)
      report(K::TerminalArity, s.name, "terminal arity must be 1 or 2");
  }

  if (!g.is_nonterminal(g.axiom)) {
    report(K::MissingAxiom, "axiom", "axiom is not a declared nonterminal");
  } else if (g.info(g.axiom).arity != 0) {
    report(K::AxiomArity, sym_name(g.axiom), "axiom must have arity 0");
  }

  std::map<SymbolId, int> rule_count;
  for (const Rule& r : g.rules) {
    const std::string where = sym_name(r.lhs);
    if (!g.is_nonterminal(r.lhs)) {
      report(K::RuleForTerminal, where, "rule lhs is not a nonterminal");
      continue;
    }
    if (++rule_count[r.lhs] == 2) report(K::DuplicateRule, where, "more than one rule");

    const std::size_t nv = r.vertex_names.size();
    std::set<VertexId> declared(r.rhs.vertices.begin(), r.rhs.vertices.end());
    auto known = [&](VertexId v) { return v < nv && declared.count(v) > 0; };

    if (r.iota.size() != g.info(r.lhs).arity)
      report(K::IotaArity, where, "iota length differs from arity");
    std::set<VertexId> image;
    bool injective = true;
    for (VertexId v : r.iota) {
      if (!known(v)) report(K::UnknownVertex, where, "iota image is not a vertex of the rule");
      if (!image.insert(v).second) injective = false;
    }
    if (!injective) report(K::NonInjectiveIota, where, "iota is not injective");

    std::set<Hyperarc> arcs;
    for (const Hyperarc& h : r.rhs.arcs) {
      if (h.label >= g.symbols.size()) {
        report(K::UndeclaredLabel, where, "hyperarc label not declared");
        continue;
      }
      if (h.vertices.size() != g.info(h.label).arity)
        report(K::ArityMismatch, where + ":" + sym_name(h.label), "hyperarc length differs from label arity");
      for (VertexId v : h.vertices)
        if (!known(v)) report(K::UnknownVertex, where + ":" + sym_name(h.label), "hyperarc vertex not in rule");
      if (!arcs.insert(h).second) report(K::DuplicateHyperarc, where + ":" + sym_name(h.label), "duplicate hyperarc");
    }
  }
  for (SymbolId s : g.nonterminals())
    if (rule_count[s] == 0) report(K::MissingRule, sym_name(s), "nonterminal has no rule");
  return errs;
}

// ---------------------------------------------------------------------------
// Rewriting

namespace {

// Hypergraph under construction with O(log n) duplicate detection.
struct Builder {
  Hypergraph g;
  std::set<VertexId> vset;
  std::set<Hyperarc> aset;

  void vertex(VertexId v) {
    if (vset.insert(v).second) g.vertices.push_back(v);
  }
  // Returns the index of the arc, or npos when it was already present.
  std::size_t arc(Hyperarc h) {
    if (!aset.insert(h).second) return static_cast<std::size_t>(-1);
    for (VertexId v : h.vertices) vertex(v);
    g.arcs.push_back(std::move(h));
    return g.arcs.size() - 1;
  }
};

// Local → global vertex map for one glued copy of `rule.rhs` on `target`.
std::vector<VertexId> glue_map(const Rule& rule, const Hyperarc& target, IdSupplier& fresh) {
  std::vector<VertexId> image(rule.vertex_names.size(), 0);
  std::vector<bool> set(rule.vertex_names.size(), false);
  for (std::size_t i = 0; i < rule.iota.size(); ++i) {
    image[rule.iota[i]] = target.vertices.at(i);
    set[rule.iota[i]] = true;
  }
  for (VertexId v : rule.rhs.vertices)
    if (!set[v]) {
      image[v] = fresh.next();
      set[v] = true;
    }
  return image;
}

Hyperarc translate(const Hyperarc& h, const std::vector<VertexId>& image) {
  Hyperarc out{h.label, {}};
  out.vertices.reserve(h.vertices.size());
  for (VertexId v : h.vertices) out.vertices.push_back(image[v]);
  return out;
}

}  // namespace

Hypergraph rewrite_one(const Hypergraph& m, std::size_t target, const Rule& rule, IdSupplier& fresh) {
  if (target >= m.arcs.size()) throw Error("rewrite target out of range: no such hyperarc");
  const Hyperarc& t = m.arcs[target];
  if (t.label != rule.lhs) throw Error("label mismatch between rewrite target and rule");
  if (t.vertices.size() != rule.iota.size()) throw Error("rewrite target arity differs from rule");
  for (VertexId v : m.vertices) fresh.skip_past(v);

  Builder b;
  for (VertexId v : m.vertices) b.vertex(v);
  for (std::size_t i = 0; i < m.arcs.size(); ++i)
    if (i != target) b.arc(m.arcs[i]);
  const auto image = glue_map(rule, t, fresh);
  for (VertexId v : rule.rhs.vertices) b.vertex(image[v]);
  for (const Hyperarc& h : rule.rhs.arcs) b.arc(translate(h, image));
  return std::move(b.g);
}

Hypergraph parallel_rewrite(const Hypergraph& m, const Grammar& g, IdSupplier& fresh) {
  for (VertexId v : m.vertices) fresh.skip_past(v);
  Builder b;
  for (VertexId v : m.vertices) b.vertex(v);
  for (const Hyperarc& h : m.arcs)
    if (!g.is_nonterminal(h.label)) b.arc(h);
  for (const Hyperarc& h : m.arcs) {
    if (!g.is_nonterminal(h.label)) continue;
    const Rule& r = g.rule(h.label);
    const auto image = glue_map(r, h, fresh);
    for (VertexId v : r.rhs.vertices) b.vertex(image[v]);
    for (const Hyperarc& x : r.rhs.arcs) b.arc(translate(x, image));
  }
  return std::move(b.g);
}

VertexId Expansion::vertex_at(const VertexAddress& address) const {
  auto it = by_address.find(address);
  if (it == by_address.end()) throw Error("address not materialized at this depth");
  return it->second;
}

std::set<VertexId> Expansion::frontier() const {
  std::set<VertexId> out;
  for (const auto& [idx, path] : pending)
    for (VertexId v : graph.arcs[idx].vertices) out.insert(v);
  return out;
}

Expansion expand(const Grammar& g, unsigned depth, IdSupplier& fresh) {
  const Rule& axiom = g.rule(g.axiom);
  Expansion ex;
  {
    Builder b;
    std::vector<VertexId> image(axiom.vertex_names.size(), 0);
    for (VertexId v : axiom.rhs.vertices) {
      image[v] = fresh.next();
      b.vertex(image[v]);
      ConcreteVertex cv{image[v], 0, CanonicalVertex{g.axiom, v}, VertexAddress{{}, v}};
      ex.vertices.emplace(image[v], cv);
      ex.by_address.emplace(cv.address, image[v]);
    }
    for (std::size_t h = 0; h < axiom.rhs.arcs.size(); ++h) {
      std::size_t idx = b.arc(translate(axiom.rhs.arcs[h], image));
      if (idx != static_cast<std::size_t>(-1) && g.is_nonterminal(axiom.rhs.arcs[h].label))
        ex.pending.emplace(idx, std::vector<std::uint32_t>{static_cast<std::uint32_t>(h)});
    }
    ex.graph = std::move(b.g);
  }

  for (unsigned step = 0; step < depth && !ex.pending.empty(); ++step) {
    Builder b;
    std::map<std::size_t, std::vector<std::uint32_t>> pending;
    for (VertexId v : ex.graph.vertices) b.vertex(v);
    for (std::size_t i = 0; i < ex.graph.arcs.size(); ++i)
      if (!ex.pending.count(i)) b.arc(ex.graph.arcs[i]);
    for (const auto& [idx, path] : ex.pending) {
      const Hyperarc& target = ex.graph.arcs[idx];
      const Rule& r = g.rule(target.label);
      const auto image = glue_map(r, target, fresh);
      std::set<VertexId> inputs(r.iota.begin(), r.iota.end());
      for (VertexId v : r.rhs.vertices) {
        b.vertex(image[v]);
        if (inputs.count(v)) continue;
        ConcreteVertex cv{image[v], static_cast<unsigned>(path.size()), CanonicalVertex{target.label, v},
                          VertexAddress{path, v}};
        ex.vertices.emplace(image[v], cv);
        ex.by_address.emplace(cv.address, image[v]);
      }
      for (std::size_t h = 0; h < r.rhs.arcs.size(); ++h) {
        std::size_t at = b.arc(translate(r.rhs.arcs[h], image));
        if (at != static_cast<std::size_t>(-1) && g.is_nonterminal(r.rhs.arcs[h].label)) {
          auto child = path;
          child.push_back(static_cast<std::uint32_t>(h));
          pending.emplace(at, std::move(child));
        }
      }
    }
    ex.graph = std::move(b.g);
    ex.pending = std::move(pending);
  }
  return ex;
}

Expansion expand(const Grammar& g, unsigned depth) {
  IdSupplier fresh;
  return expand(g, depth, fresh);
}

std::set<SymbolId> succ_nonterminals(const Grammar& g, SymbolId a) {
  if (!g.is_nonterminal(a)) throw Error("unknown nonterminal");
  std::set<SymbolId> out;
  for (const Hyperarc& h : g.rule(a).rhs.arcs)
    if (g.is_nonterminal(h.label)) out.insert(h.label);
  return out;
}

// ---------------------------------------------------------------------------
// GrammarIndex

GrammarIndex::GrammarIndex(const Grammar& g) : g_(&g) {
  for (const Rule& r : g.rules) {
    if (rules_.count(r.lhs)) continue;
    RuleInfo info;
    const std::size_t n = r.vertex_names.size();
    info.input_pos.assign(n, std::nullopt);
    info.attach.assign(n, {});
    for (std::size_t j = 0; j < r.iota.size(); ++j) info.input_pos[r.iota[j]] = static_cast<unsigned>(j + 1);
    for (std::size_t h = 0; h < r.rhs.arcs.size(); ++h) {
      const Hyperarc& x = r.rhs.arcs[h];
      if (!g.is_nonterminal(x.label)) continue;
      info.nonterminal_arcs.push_back(h);
      for (std::size_t i = 0; i < x.vertices.size(); ++i)
        info.attach[x.vertices[i]].push_back(Attachment{h, static_cast<unsigned>(i + 1)});
    }
    rules_.emplace(r.lhs, std::move(info));
  }

  // Reachable contexts, BFS from the axiom.
  if (g.is_nonterminal(g.axiom) && rules_.count(g.axiom)) {
    std::deque<SymbolId> queue{g.axiom};
    std::set<SymbolId> seen{g.axiom};
    while (!queue.empty()) {
      SymbolId a = queue.front();
      queue.pop_front();
      reachable_.push_back(a);
      const Rule& r = g.rule(a);
      for (std::size_t h : rules_.at(a).nonterminal_arcs) {
        SymbolId b = r.rhs.arcs[h].label;
        sites_[b].emplace_back(a, h);
        if (rules_.count(b) && seen.insert(b).second) queue.push_back(b);
      }
    }
  }

  std::vector<SymbolId> order = reachable_;
  for (const auto& [a, info] : rules_)
    if (std::find(order.begin(), order.end(), a) == order.end()) order.push_back(a);
  for (SymbolId a : order) {
    const Rule& r = g.rule(a);
    for (VertexId v : r.rhs.vertices) {
      if (rules_.at(a).input_pos[v]) continue;
      CanonicalVertex c{a, v};
      canonical_pos_.emplace(c, canonical_.size());
      canonical_.push_back(c);
    }
  }

  // Colours and resolved out-arcs of each canonical vertex.
  colours_.resize(canonical_.size());
  out_arcs_.resize(canonical_.size());
  for (std::size_t idx = 0; idx < canonical_.size(); ++idx) {
    const CanonicalVertex c = canonical_[idx];
    const Rule& r = g.rule(c.context);
    const RuleInfo& ri = rules_.at(c.context);
    auto resolve = [&](VertexId x) {
      Successor s;
      if (ri.input_pos[x]) {
        s.kind = Successor::Kind::Parent;
        s.position = *ri.input_pos[x];
      } else {
        s.kind = Successor::Kind::Same;
        s.vertex = x;
      }
      return s;
    };
    std::set<std::pair<SymbolId, Successor>> seen;
    auto push = [&](SymbolId label, Successor s) {
      if (seen.emplace(label, s).second) out_arcs_[idx].push_back(OutArc{label, s});
    };
    for (const Hyperarc& x : r.rhs.arcs) {
      if (g.is_colour(x.label) && x.vertices[0] == c.vertex) colours_[idx].insert(x.label);
      if (g.is_arc_label(x.label) && x.vertices[0] == c.vertex) push(x.label, resolve(x.vertices[1]));
    }
    for (const Attachment& at : ri.attach[c.vertex]) {
      const Hyperarc& hx = r.rhs.arcs[at.hyperarc];
      if (!rules_.count(hx.label)) continue;
      const Rule& rb = g.rule(hx.label);
      const RuleInfo& bi = rules_.at(hx.label);
      const VertexId inner = rb.iota.at(at.position - 1);
      for (const Hyperarc& x : rb.rhs.arcs) {
        if (x.vertices.empty() || x.vertices[0] != inner) continue;
        if (g.is_colour(x.label)) colours_[idx].insert(x.label);
        if (!g.is_arc_label(x.label)) continue;
        const VertexId w = x.vertices[1];
        if (bi.input_pos[w]) {
          push(x.label, resolve(hx.vertices[*bi.input_pos[w] - 1]));
        } else {
          Successor s;
          s.kind = Successor::Kind::Child;
          s.hyperarc = at.hyperarc;
          s.vertex = w;
          push(x.label, s);
        }
      }
    }
  }
}

const GrammarIndex::RuleInfo& GrammarIndex::info(SymbolId a) const {
  auto it = rules_.find(a);
  if (it == rules_.end()) throw Error("no rule for nonterminal");
  return it->second;
}

std::optional<unsigned> GrammarIndex::input_position(SymbolId a, VertexId u) const {
  return info(a).input_pos.at(u);
}

const std::vector<Attachment>& GrammarIndex::attachments(SymbolId a, VertexId u) const {
  return info(a).attach.at(u);
}

const std::vector<std::size_t>& GrammarIndex::nonterminal_arcs(SymbolId a) const {
  return info(a).nonterminal_arcs;
}

bool GrammarIndex::is_reachable(SymbolId a) const {
  return std::find(reachable_.begin(), reachable_.end(), a) != reachable_.end();
}

std::size_t GrammarIndex::canonical_index(const CanonicalVertex& c) const {
  auto it = canonical_pos_.find(c);
  if (it == canonical_pos_.end()) throw Error("not a canonical vertex");
  return it->second;
}

bool GrammarIndex::is_attachment(const CanonicalVertex& c) const {
  return !attachments(c.context, c.vertex).empty();
}

Attachment GrammarIndex::attachment_of(const CanonicalVertex& c) const {
  const auto& a = attachments(c.context, c.vertex);
  if (a.empty()) throw Error("interior vertex has no attachment");
  return a.front();
}

const std::set<SymbolId>& GrammarIndex::colours(const CanonicalVertex& c) const {
  return colours_[canonical_index(c)];
}

const std::vector<OutArc>& GrammarIndex::out_arcs(const CanonicalVertex& c) const {
  return out_arcs_[canonical_index(c)];
}

bool GrammarIndex::absorbing(const CanonicalVertex& c) const {
  if (!out_arcs(c).empty()) return false;
  if (g_->absorbing_sinks) return true;
  for (SymbolId col : colours(c))
    if (g_->absorbing_colours.count(col)) return true;
  return false;
}

std::string GrammarIndex::describe(const CanonicalVertex& c) const {
  const Rule& r = rule(c.context);
  const std::string& ctx = g_->name(c.context);
  const auto& att = attachments(c.context, c.vertex);
  if (att.empty()) return ctx + ":" + r.name_of(c.vertex);
  const Attachment a = att.front();
  const SymbolId b = r.rhs.arcs[a.hyperarc].label;
  std::size_t same_label = 0;
  for (std::size_t h : nonterminal_arcs(c.context))
    if (r.rhs.arcs[h].label == b) ++same_label;
  std::string out = g_->name(b);
  if (same_label > 1) out += "#" + std::to_string(a.hyperarc);
  return out + "," + std::to_string(a.position) + "@" + ctx;
}

const std::vector<std::pair<SymbolId, std::size_t>>& GrammarIndex::sites(SymbolId a) const {
  static const std::vector<std::pair<SymbolId, std::size_t>> none;
  auto it = sites_.find(a);
  return it == sites_.end() ? none : it->second;
}

SymbolId GrammarIndex::context_of(const std::vector<std::uint32_t>& path) const {
  SymbolId ctx = g_->axiom;
  for (std::uint32_t h : path) {
    const Rule& r = rule(ctx);
    if (h >= r.rhs.arcs.size() || !g_->is_nonterminal(r.rhs.arcs[h].label))
      throw Error("address path does not follow nonterminal hyperarcs");
    ctx = r.rhs.arcs[h].label;
  }
  return ctx;
}

VertexAddress GrammarIndex::normalize(const VertexAddress& address) const {
  VertexAddress a = address;
  for (;;) {
    SymbolId ctx = context_of(a.path);
    if (a.vertex >= rule(ctx).vertex_names.size()) throw Error("address vertex out of range");
    auto pos = input_position(ctx, a.vertex);
    if (!pos) return a;
    const std::uint32_t h = a.path.back();
    a.path.pop_back();
    a.vertex = rule(context_of(a.path)).rhs.arcs[h].vertices[*pos - 1];
  }
}

CanonicalVertex GrammarIndex::canonical_of(const VertexAddress& address) const {
  VertexAddress a = normalize(address);
  return CanonicalVertex{context_of(a.path), a.vertex};
}

VertexAddress parse_address(const GrammarIndex& index, std::string_view text) {
  VertexAddress a;
  std::string_view name = text;
  if (auto slash = text.rfind('/'); slash != std::string_view::npos) {
    std::string_view path = text.substr(0, slash);
    name = text.substr(slash + 1);
    std::size_t start = 0;
    while (start <= path.size() && !path.empty()) {
      std::size_t dot = path.find('.', start);
      std::string_view part = path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
      if (part.empty()) throw Error("malformed address '" + std::string(text) + "'");
      std::uint32_t h = 0;
      for (char ch : part) {
        if (ch < '0' || ch > '9') throw Error("malformed address '" + std::string(text) + "'");
        h = h * 10 + static_cast<std::uint32_t>(ch - '0');
      }
      a.path.push_back(h);
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
  }
  const Rule& r = index.rule(index.context_of(a.path));
  auto v = r.find_vertex(name);
  if (!v) throw Error("unknown vertex '" + std::string(name) + "'");
  a.vertex = *v;
  return a;
}

std::string format_address(const GrammarIndex& index, const VertexAddress& address) {
  std::ostringstream out;
  for (std::size_t i = 0; i < address.path.size(); ++i) out << (i ? "." : "") << address.path[i];
  if (!address.path.empty()) out << '/';
  out << index.rule(index.context_of(address.path)).name_of(address.vertex);
  return out.str();
}

}  // namespace pregma
