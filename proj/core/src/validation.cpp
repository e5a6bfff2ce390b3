#include "pregma/validation.hpp"

#include <functional>

namespace pregma {

std::string CompleteOutsideViolation::to_string(const Grammar& g) const {
  const Rule& r = g.rule(rule);
  const std::string where = g.name(rule) + ":" + r.name_of(vertex);
  switch (kind) {
    case Kind::InputIsOutput: return "InputIsOutput(" + where + ")";
    case Kind::SharedOutput: return "SharedOutput(" + where + ")";
  }
  return where;
}

std::vector<CompleteOutsideViolation> check_complete_outside(const Grammar& g) {
  std::vector<CompleteOutsideViolation> out;
  GrammarIndex index(g);
  std::set<SymbolId> done;
  for (const Rule& r : g.rules) {
    if (!done.insert(r.lhs).second) continue;
    for (VertexId v : r.rhs.vertices) {
      const auto& att = index.attachments(r.lhs, v);
      if (index.input_position(r.lhs, v)) {
        if (!att.empty()) out.push_back({CompleteOutsideViolation::Kind::InputIsOutput, r.lhs, v});
      } else if (att.size() > 1) {
        out.push_back({CompleteOutsideViolation::Kind::SharedOutput, r.lhs, v});
      }
    }
  }
  return out;
}

DegreeCount DegreeProfile::at(const CanonicalVertex& c, SymbolId label) const {
  auto it = counts.find(c);
  if (it == counts.end()) return {};
  auto jt = it->second.find(label);
  return jt == it->second.end() ? DegreeCount{} : jt->second;
}

bool DegreeProfile::any_infinite(const CanonicalVertex& c) const {
  auto it = counts.find(c);
  if (it == counts.end()) return false;
  for (const auto& [label, d] : it->second)
    if (d.infinite) return true;
  return false;
}

bool DegreeProfile::sink(const CanonicalVertex& c) const {
  auto it = counts.find(c);
  if (it == counts.end()) return true;
  for (const auto& [label, d] : it->second)
    if (d.infinite || d.count > 0) return false;
  return true;
}

namespace {

// Arcs inherited through input positions: node (B,i) stands for iota_B(i) seen from
// the parent; its own arcs come from H_B, deeper ones from hyperarcs of H_B on iota_B(i).
struct Inherited {
  using Node = std::pair<SymbolId, unsigned>;
  const Grammar& g;
  const GrammarIndex& index;
  std::map<Node, std::map<SymbolId, std::uint64_t>> own;
  std::map<Node, std::vector<Node>> next;

  Inherited(const Grammar& gr, const GrammarIndex& ix) : g(gr), index(ix) {
    for (SymbolId b : g.nonterminals()) {
      const Rule* r = nullptr;
      for (const Rule& x : g.rules)
        if (x.lhs == b) { r = &x; break; }
      if (!r) continue;
      for (unsigned i = 1; i <= r->iota.size(); ++i) {
        const VertexId v = r->iota[i - 1];
        auto& w = own[{b, i}];
        for (const Hyperarc& h : r->rhs.arcs)
          if (g.is_arc_label(h.label) && h.vertices[0] == v) ++w[h.label];
        for (const Attachment& a : index.attachments(b, v))
          next[{b, i}].push_back({r->rhs.arcs[a.hyperarc].label, a.position});
      }
    }
  }

  std::set<Node> reach_from(const Node& n) const {  // nodes reachable by >= 1 edge
    std::set<Node> seen;
    std::vector<Node> stack;
    auto push_succ = [&](const Node& x) {
      auto it = next.find(x);
      if (it == next.end()) return;
      for (const Node& y : it->second)
        if (seen.insert(y).second) stack.push_back(y);
    };
    push_succ(n);
    while (!stack.empty()) {
      Node x = stack.back();
      stack.pop_back();
      push_succ(x);
    }
    return seen;
  }

  bool positive(const Node& n, SymbolId label) const {
    auto it = own.find(n);
    if (it == own.end()) return false;
    auto jt = it->second.find(label);
    return jt != it->second.end() && jt->second > 0;
  }

  // Total count of `label` arcs summed over every walk from n (n included).
  DegreeCount total(const Node& n, SymbolId label) const {
    std::set<Node> closure = reach_from(n);
    closure.insert(n);
    for (const Node& m : closure) {
      if (!reach_from(m).count(m)) continue;  // not on a cycle
      std::set<Node> below = reach_from(m);
      for (const Node& p : below)
        if (positive(p, label)) return {0, true};
    }
    std::map<Node, std::uint64_t> memo;
    std::function<std::uint64_t(const Node&)> rec = [&](const Node& x) -> std::uint64_t {
      if (auto it = memo.find(x); it != memo.end()) return it->second;
      std::set<Node> below = reach_from(x);
      bool relevant = positive(x, label);
      for (const Node& p : below) relevant = relevant || positive(p, label);
      std::uint64_t sum = 0;
      if (relevant) {
        if (auto it = own.find(x); it != own.end())
          if (auto jt = it->second.find(label); jt != it->second.end()) sum += jt->second;
        if (auto it = next.find(x); it != next.end())
          for (const Node& y : it->second) sum += rec(y);
      }
      memo[x] = sum;
      return sum;
    };
    return {rec(n), false};
  }
};

}  // namespace

DegreeProfile degree_profile(const Grammar& g) {
  GrammarIndex index(g);
  Inherited inh(g, index);
  DegreeProfile prof;
  for (const CanonicalVertex& c : index.canonical_vertices()) {
    if (!index.is_reachable(c.context)) continue;
    auto& row = prof.counts[c];
    for (const OutArc& a : index.out_arcs(c)) ++row[a.label].count;
    const Rule& r = index.rule(c.context);
    for (const Attachment& at : index.attachments(c.context, c.vertex)) {
      const SymbolId b = r.rhs.arcs[at.hyperarc].label;
      auto it = inh.next.find({b, at.position});
      if (it == inh.next.end()) continue;
      for (const auto& deeper : it->second)
        for (SymbolId label : g.arc_labels()) {
          DegreeCount d = inh.total(deeper, label);
          auto& cell = row[label];
          cell.infinite = cell.infinite || d.infinite;
          cell.count += d.count;
        }
    }
    for (auto it = row.begin(); it != row.end();) {
      if (it->second.count == 0 && !it->second.infinite) it = row.erase(it);
      else ++it;
    }
  }
  return prof;
}

std::string PhrFailure::to_string() const {
  switch (kind) {
    case Kind::Sink:
    case Kind::Sum: return "canonical=" + canonical + " sum=" + to_fraction(sum);
    case Kind::InfiniteDegree: return "canonical=" + canonical + " sum=inf";
    default: return "error=" + canonical + ": " + message;
  }
}

const Rational& probability(const ProbabilityMap& mu, const Grammar& g, SymbolId label) {
  auto it = mu.find(label);
  if (it == mu.end()) throw Error("no probability for arc label '" + g.name(label) + "'");
  return it->second;
}

Rational out_mass(const GrammarIndex& index, const ProbabilityMap& mu, const CanonicalVertex& c) {
  if (index.absorbing(c)) return 1;
  Rational sum = 0;
  for (const OutArc& a : index.out_arcs(c)) sum += probability(mu, index.grammar(), a.label);
  return sum;
}

std::vector<PhrFailure> phr_check(const Grammar& g, const ProbabilityMap& mu) {
  using K = PhrFailure::Kind;
  std::vector<PhrFailure> out;
  for (const StructuralError& e : validate_grammar(g)) out.push_back({K::Structural, e.to_string(), 0, e.message});
  if (!out.empty()) return out;

  for (const auto& v : check_complete_outside(g))
    out.push_back({K::NotCompleteOutside, v.to_string(g), 0, "grammar is not complete outside"});

  bool mu_ok = true;
  for (SymbolId a : g.arc_labels()) {
    auto it = mu.find(a);
    if (it == mu.end()) {
      out.push_back({K::MissingProbability, g.name(a), 0, "no probability for arc label"});
      mu_ok = false;
    } else if (it->second < 0 || it->second > 1) {
      out.push_back({K::ProbabilityRange, g.name(a), it->second, "probability outside [0,1]"});
      mu_ok = false;
    }
  }

  GrammarIndex index(g);
  DegreeProfile prof = degree_profile(g);
  for (const CanonicalVertex& c : index.canonical_vertices()) {
    if (!index.is_reachable(c.context)) continue;
    const std::string name = index.describe(c);
    if (prof.any_infinite(c)) {
      out.push_back({K::InfiniteDegree, name, 0, "infinite out-degree"});
      continue;
    }
    if (prof.sink(c)) {
      if (!index.absorbing(c)) out.push_back({K::Sink, name, 0, "sink vertex not declared absorbing"});
      continue;
    }
    if (!mu_ok) continue;
    Rational sum = 0;
    for (const auto& [label, d] : prof.counts.at(c)) sum += mu.at(label) * Rational(static_cast<unsigned long>(d.count));
    if (sum != 1) out.push_back({K::Sum, name, sum, "out-mass differs from 1"});
  }
  return out;
}

}  // namespace pregma
