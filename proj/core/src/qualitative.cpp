#include "pregma/qualitative.hpp"

#include <deque>

namespace pregma {

Verdict agree(const std::vector<Verdict>& vs) {
  if (vs.empty()) return Verdict::Unknown;
  for (Verdict v : vs)
    if (v != vs.front()) return Verdict::Unknown;
  return vs.front();
}

Verdict tri_and(Verdict a, Verdict b) {
  if (a == Verdict::Fails || b == Verdict::Fails) return Verdict::Fails;
  if (a == Verdict::Holds && b == Verdict::Holds) return Verdict::Holds;
  return Verdict::Unknown;
}

Verdict tri_not(Verdict a) {
  if (a == Verdict::Holds) return Verdict::Fails;
  if (a == Verdict::Fails) return Verdict::Holds;
  return Verdict::Unknown;
}

namespace {

// Reachable input patterns of every context: start from the axiom's empty pattern and
// push patterns through each instantiation site.
template <typename T, typename F>
std::map<SymbolId, std::set<std::vector<T>>> propagate_environments(const GrammarIndex& index, F value) {
  const Grammar& g = index.grammar();
  std::map<SymbolId, std::set<std::vector<T>>> envs;
  std::deque<std::pair<SymbolId, std::vector<T>>> queue;
  envs[g.axiom].insert(std::vector<T>{});
  queue.emplace_back(g.axiom, std::vector<T>{});
  while (!queue.empty()) {
    auto [x, e] = queue.front();
    queue.pop_front();
    const Rule& r = index.rule(x);
    for (std::size_t h : index.nonterminal_arcs(x)) {
      const Hyperarc& arc = r.rhs.arcs[h];
      std::vector<T> child;
      for (VertexId v : arc.vertices) child.push_back(value(CanonicalVertex{x, v}, e));
      if (envs[arc.label].insert(child).second) queue.emplace_back(arc.label, child);
    }
  }
  return envs;
}

}  // namespace

PositivityAnalysis::PositivityAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                       const CanonSet& phi2)
    : index_(&index), sys_(assemble_system(index, mu, phi1, phi2)) {
  // Boolean Kleene iteration, counted so the bound (#variables) can be checked.
  const PolySystem& p = sys_.poly;
  pos_.assign(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i) pos_[i] = p.fixed[i] && *p.fixed[i] > 0;
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<bool> next = pos_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (pos_[i] || p.fixed[i]) continue;
      for (const Monomial& m : p.rhs[i].terms) {
        bool all = m.coeff > 0;
        for (std::size_t v : m.vars) all = all && pos_[v];
        if (all) {
          next[i] = true;
          break;
        }
      }
    }
    if (next != pos_) {
      changed = true;
      ++rounds_;
      pos_ = std::move(next);
    }
  }
  envs_ = propagate_environments<bool>(index, [&](const CanonicalVertex& c, const std::vector<bool>& e) {
    return value(c, e);
  });
}

bool PositivityAnalysis::value(const CanonicalVertex& c, const std::vector<bool>& inputs) const {
  auto full = [&](const CanonicalVertex& s) {
    if (pos_[sys_.win_var(s)]) return true;
    for (unsigned j = 1; j <= inputs.size(); ++j)
      if (pos_[sys_.dec_var(s, j)] && inputs[j - 1]) return true;
    return false;
  };
  if (sys_.win.count(c)) return full(c);
  const LocalRow& row = sys_.local.at(c.context).row(c);
  if (row.win > 0) return true;
  for (const auto& [t, p] : row.same)
    if (full(t)) return true;
  const Rule& r = index_->rule(c.context);
  for (const auto& [key, p] : row.right) {
    const auto& [h, child] = key;
    if (pos_[sys_.win_var(child)]) return true;
    const Hyperarc& x = r.rhs.arcs[h];
    for (unsigned l = 1; l <= x.vertices.size(); ++l)
      if (pos_[sys_.dec_var(child, l)] && full(CanonicalVertex{c.context, x.vertices[l - 1]})) return true;
  }
  for (const auto& [j, p] : row.left)
    if (inputs.at(j - 1)) return true;
  return false;
}

bool PositivityAnalysis::at(const VertexAddress& address) const {
  const VertexAddress a = index_->normalize(address);
  SymbolId ctx = index_->grammar().axiom;
  std::vector<bool> e;
  for (std::uint32_t h : a.path) {
    const Hyperarc& x = index_->rule(ctx).rhs.arcs[h];
    std::vector<bool> next;
    for (VertexId v : x.vertices) next.push_back(value(CanonicalVertex{ctx, v}, e));
    e = std::move(next);
    ctx = x.label;
  }
  return value(CanonicalVertex{ctx, a.vertex}, e);
}

Verdict PositivityAnalysis::at(const CanonicalVertex& c) const {
  std::vector<Verdict> vs;
  for (const auto& e : environments(c.context)) vs.push_back(value(c, e) ? Verdict::Holds : Verdict::Fails);
  return vs.empty() ? Verdict::Fails : agree(vs);
}

const std::set<std::vector<bool>>& PositivityAnalysis::environments(SymbolId context) const {
  static const std::set<std::vector<bool>> none;
  auto it = envs_.find(context);
  return it == envs_.end() ? none : it->second;
}

namespace {

// Every canonical vertex a step along `a` may land on: one for Same/Child targets, one
// per instantiation site for Parent targets.
std::vector<CanonicalVertex> possible_targets(const GrammarIndex& index, const CanonicalVertex& c, const OutArc& a) {
  switch (a.target.kind) {
    case Successor::Kind::Same: return {CanonicalVertex{c.context, a.target.vertex}};
    case Successor::Kind::Child:
      return {CanonicalVertex{index.rule(c.context).rhs.arcs[a.target.hyperarc].label, a.target.vertex}};
    case Successor::Kind::Parent: {
      std::vector<CanonicalVertex> out;
      for (const auto& [ctx, h] : index.sites(c.context)) {
        const VertexId v = index.rule(ctx).rhs.arcs[h].vertices[a.target.position - 1];
        if (!index.input_position(ctx, v)) out.push_back(CanonicalVertex{ctx, v});
      }
      return out;
    }
  }
  return {};
}

}  // namespace

CanonSet structurally_almost_sure(const GrammarIndex& index, const CanonSet& phi1, const CanonSet& phi2) {
  const auto& cs = index.canonical_vertices();
  const std::size_t n = cs.size();
  auto open = [&](std::size_t i) { return phi1[i] && !phi2[i]; };

  // Uniformly reaching: phi2, or some arc whose every possible target already is.
  std::vector<bool> reach(phi2);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (reach[i] || !open(i) || index.absorbing(cs[i])) continue;
      for (const OutArc& a : index.out_arcs(cs[i])) {
        const auto ts = possible_targets(index, cs[i], a);
        bool all = !ts.empty();
        for (const auto& t : ts) all = all && reach[index.canonical_index(t)];
        if (all) {
          reach[i] = changed = true;
          break;
        }
      }
    }
  }

  // Bad: open vertices that cannot uniformly reach phi2 or may step outside phi1 | phi2.
  std::vector<std::vector<std::size_t>> preds(n);
  std::deque<std::size_t> queue;
  std::vector<bool> bad(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!open(i)) continue;
    bool escapes = !reach[i];
    if (!index.absorbing(cs[i]))
      for (const OutArc& a : index.out_arcs(cs[i]))
        for (const auto& t : possible_targets(index, cs[i], a)) {
          const std::size_t ti = index.canonical_index(t);
          if (!phi1[ti] && !phi2[ti]) escapes = true;
          if (open(ti)) preds[ti].push_back(i);
        }
    if (escapes) {
      bad[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    for (std::size_t p : preds[t])
      if (!bad[p]) {
        bad[p] = true;
        queue.push_back(p);
      }
  }
  CanonSet out(n, false);
  for (std::size_t i = 0; i < n; ++i) out[i] = phi2[i] || (open(i) && !bad[i]);
  return out;
}

AlmostSureAnalysis::AlmostSureAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                       const CanonSet& phi2, const Rational& eps, const SolveOptions& opts)
    : index_(&index),
      phi1_(phi1),
      phi2_(phi2),
      quant_(index, mu, phi1, phi2, eps, opts),
      sure_(structurally_almost_sure(index, phi1, phi2)) {
  pos_ = quant_.system().poly.positive();
  envs_ = propagate_environments<Verdict>(index, [&](const CanonicalVertex& c, const std::vector<Verdict>& e) {
    return value(c, e);
  });
}

Verdict AlmostSureAnalysis::value(const CanonicalVertex& c, const std::vector<Verdict>& inputs) const {
  const std::size_t ci = index_->canonical_index(c);
  if (sure_[ci]) return Verdict::Holds;
  if (!phi1_[ci]) return Verdict::Fails;
  const UntilSystem& sys = quant_.system();

  auto attach = [&](const CanonicalVertex& s, const std::vector<Verdict>& in) {
    const std::size_t si = index_->canonical_index(s);
    if (sure_[si]) return Verdict::Holds;
    if (!phi1_[si]) return Verdict::Fails;
    const Interval w = quant_.win(s);
    if (w.lo == 1) return Verdict::Holds;
    Rational total_lo = w.lo, total_hi = w.hi;
    bool parents_yes = true, parent_no = false;
    for (unsigned j = 1; j <= in.size(); ++j) {
      const Interval d = quant_.dec(s, j);
      total_lo += d.lo;
      total_hi += d.hi;
      if (pos_[sys.dec_var(s, j)]) {
        parents_yes = parents_yes && in[j - 1] == Verdict::Holds;
        parent_no = parent_no || in[j - 1] == Verdict::Fails;
      }
    }
    if (total_hi < 1 || parent_no) return Verdict::Fails;
    if (total_lo >= 1 && parents_yes) return Verdict::Holds;
    return Verdict::Unknown;
  };
  if (sys.win.count(c)) return attach(c, inputs);

  const LocalRow& row = sys.local.at(c.context).row(c);
  if (row.lose > 0 || row.diverge > 0) return Verdict::Fails;
  Verdict v = Verdict::Holds;
  for (const auto& [t, p] : row.same) v = tri_and(v, attach(t, inputs));
  const Rule& r = index_->rule(c.context);
  for (const auto& [key, p] : row.right) {
    const auto& [h, child] = key;
    std::vector<Verdict> child_in;
    for (VertexId x : r.rhs.arcs[h].vertices) child_in.push_back(attach(CanonicalVertex{c.context, x}, inputs));
    v = tri_and(v, attach(child, child_in));
  }
  for (const auto& [j, p] : row.left) v = tri_and(v, inputs.at(j - 1));
  return v;
}

Verdict AlmostSureAnalysis::at(const VertexAddress& address) const {
  const VertexAddress a = index_->normalize(address);
  SymbolId ctx = index_->grammar().axiom;
  std::vector<Verdict> e;
  for (std::uint32_t h : a.path) {
    const Hyperarc& x = index_->rule(ctx).rhs.arcs[h];
    std::vector<Verdict> next;
    for (VertexId v : x.vertices) next.push_back(value(CanonicalVertex{ctx, v}, e));
    e = std::move(next);
    ctx = x.label;
  }
  return value(CanonicalVertex{ctx, a.vertex}, e);
}

Verdict AlmostSureAnalysis::at(const CanonicalVertex& c) const {
  auto it = envs_.find(c.context);
  if (it == envs_.end()) return Verdict::Fails;
  std::vector<Verdict> vs;
  for (const auto& e : it->second) vs.push_back(value(c, e));
  return agree(vs);
}

namespace {

// Successor canonical vertices of c with probabilities, for one instantiation site of
// c's context (ignored when c's successors stay inside the instance).
std::vector<std::pair<CanonicalVertex, Rational>> canonical_successors(
    const GrammarIndex& index, const ProbabilityMap& mu, const CanonicalVertex& c,
    const std::pair<SymbolId, std::size_t>* site) {
  std::vector<std::pair<CanonicalVertex, Rational>> out;
  if (index.absorbing(c)) {
    out.emplace_back(c, Rational(1));
    return out;
  }
  for (const OutArc& a : index.out_arcs(c)) {
    const Rational& p = probability(mu, index.grammar(), a.label);
    switch (a.target.kind) {
      case Successor::Kind::Same: out.emplace_back(CanonicalVertex{c.context, a.target.vertex}, p); break;
      case Successor::Kind::Child: {
        const SymbolId b = index.rule(c.context).rhs.arcs[a.target.hyperarc].label;
        out.emplace_back(CanonicalVertex{b, a.target.vertex}, p);
        break;
      }
      case Successor::Kind::Parent: {
        if (!site) throw Error("parent successor without an instantiation site");
        const VertexId v = index.rule(site->first).rhs.arcs[site->second].vertices[a.target.position - 1];
        if (index.input_position(site->first, v)) throw Error("grammar is not complete outside");
        out.emplace_back(CanonicalVertex{site->first, v}, p);
        break;
      }
    }
  }
  return out;
}

bool has_parent_successor(const GrammarIndex& index, const CanonicalVertex& c) {
  if (index.absorbing(c)) return false;
  for (const OutArc& a : index.out_arcs(c))
    if (a.target.kind == Successor::Kind::Parent) return true;
  return false;
}

}  // namespace

std::vector<Rational> next_values(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                                  const CanonicalVertex& c) {
  auto sum = [&](const std::vector<std::pair<CanonicalVertex, Rational>>& succ) {
    Rational acc = 0;
    for (const auto& [t, p] : succ)
      if (target[index.canonical_index(t)]) acc += p;
    return acc;
  };
  std::vector<Rational> out;
  if (!has_parent_successor(index, c)) {
    out.push_back(sum(canonical_successors(index, mu, c, nullptr)));
    return out;
  }
  for (const auto& site : index.sites(c.context)) out.push_back(sum(canonical_successors(index, mu, c, &site)));
  return out;
}

Rational next_value(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                    const VertexAddress& address) {
  const VertexAddress a = index.normalize(address);
  const CanonicalVertex c = index.canonical_of(a);
  if (!has_parent_successor(index, c)) return next_values(index, mu, target, c).front();
  auto parent = a.path;
  const std::uint32_t h = parent.back();
  parent.pop_back();
  const std::pair<SymbolId, std::size_t> site{index.context_of(parent), h};
  Rational acc = 0;
  for (const auto& [t, p] : canonical_successors(index, mu, c, &site))
    if (target[index.canonical_index(t)]) acc += p;
  return acc;
}

std::vector<Verdict> next_qualitative(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                                      QualitativeCmp cmp) {
  std::vector<Verdict> out;
  for (const CanonicalVertex& c : index.canonical_vertices()) {
    std::vector<Verdict> vs;
    for (const Rational& p : next_values(index, mu, target, c)) {
      bool holds = false;
      switch (cmp) {
        case QualitativeCmp::Zero: holds = p == 0; break;
        case QualitativeCmp::One: holds = p == 1; break;
        case QualitativeCmp::Positive: holds = p > 0; break;
        case QualitativeCmp::BelowOne: holds = p < 1; break;
      }
      vs.push_back(holds ? Verdict::Holds : Verdict::Fails);
    }
    out.push_back(vs.empty() ? Verdict::Fails : agree(vs));
  }
  return out;
}

std::vector<Verdict> until_positive(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                    const CanonSet& phi2) {
  PositivityAnalysis pa(index, mu, phi1, phi2);
  std::vector<Verdict> out;
  for (const CanonicalVertex& c : index.canonical_vertices()) out.push_back(pa.at(c));
  return out;
}

std::vector<Verdict> until_almost_sure(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                       const CanonSet& phi2, const Rational& eps) {
  AlmostSureAnalysis as(index, mu, phi1, phi2, eps);
  std::vector<Verdict> out;
  for (const CanonicalVertex& c : index.canonical_vertices()) out.push_back(as.at(c));
  return out;
}

}  // namespace pregma
