#include "pregma/fragment.hpp"

#include <deque>

#include "pregma/linear.hpp"

namespace pregma {

CanonSet canon_with_any(const GrammarIndex& index, const std::set<SymbolId>& colours) {
  const auto& cv = index.canonical_vertices();
  CanonSet out(cv.size(), false);
  for (std::size_t i = 0; i < cv.size(); ++i)
    for (SymbolId c : index.colours(cv[i]))
      if (colours.count(c)) {
        out[i] = true;
        break;
      }
  return out;
}

CanonSet canon_all(const GrammarIndex& index) { return CanonSet(index.canonical_vertices().size(), true); }
CanonSet canon_none(const GrammarIndex& index) { return CanonSet(index.canonical_vertices().size(), false); }

LocalFragment build_fragment(const GrammarIndex& index, SymbolId context) {
  const Grammar& g = index.grammar();
  const Rule& r = index.rule(context);
  LocalFragment f;
  f.context = context;

  for (VertexId v : r.rhs.vertices) {
    FragmentState s;
    if (auto j = index.input_position(context, v)) {
      s.kind = FragmentState::Kind::ParentInput;
      s.position = *j;
    } else {
      s.kind = index.attachments(context, v).empty() ? FragmentState::Kind::Interior : FragmentState::Kind::SameLevel;
      s.canonical = CanonicalVertex{context, v};
    }
    s.name = r.name_of(v);
    f.level0_[v] = f.states.size();
    f.states.push_back(s);
  }
  for (std::size_t h : index.nonterminal_arcs(context)) {
    const Hyperarc& x = r.rhs.arcs[h];
    const Rule& rb = index.rule(x.label);
    for (VertexId w : rb.rhs.vertices) {
      if (auto k = index.input_position(x.label, w)) {
        f.level1_[{h, w}] = f.level0_.at(x.vertices[*k - 1]);
        continue;
      }
      FragmentState s;
      s.kind = index.attachments(x.label, w).empty() ? FragmentState::Kind::Interior : FragmentState::Kind::ChildAttach;
      s.child = true;
      s.hyperarc = h;
      s.canonical = CanonicalVertex{x.label, w};
      s.name = std::to_string(h) + "/" + rb.name_of(w);
      f.level1_[{h, w}] = f.states.size();
      f.states.push_back(s);
    }
  }

  std::set<std::tuple<std::size_t, std::size_t, SymbolId>> seen;
  auto add = [&](std::size_t from, std::size_t to, SymbolId label) {
    if (seen.emplace(from, to, label).second) f.arcs.push_back(FragmentArc{from, to, label});
  };
  for (const Hyperarc& x : r.rhs.arcs)
    if (g.is_arc_label(x.label)) add(f.level0_.at(x.vertices[0]), f.level0_.at(x.vertices[1]), x.label);
  for (std::size_t h : index.nonterminal_arcs(context)) {
    const Rule& rb = index.rule(r.rhs.arcs[h].label);
    for (const Hyperarc& x : rb.rhs.arcs)
      if (g.is_arc_label(x.label)) add(f.level1_.at({h, x.vertices[0]}), f.level1_.at({h, x.vertices[1]}), x.label);
  }

  std::vector<bool> has_out(f.states.size(), false);
  for (const FragmentArc& a : f.arcs) has_out[a.from] = true;
  for (std::size_t s = 0; s < f.states.size(); ++s) {
    const FragmentState& st = f.states[s];
    if (st.kind == FragmentState::Kind::ParentInput || st.kind == FragmentState::Kind::ChildAttach) continue;
    if (!has_out[s] && index.absorbing(st.canonical)) f.self_loops.insert(s);
  }
  return f;
}

Rational LocalRow::total() const {
  Rational t = win + lose + diverge;
  for (const auto& [k, v] : left) t += v;
  for (const auto& [k, v] : same) t += v;
  for (const auto& [k, v] : right) t += v;
  return t;
}

const LocalRow& LocalProbs::row(const CanonicalVertex& c) const {
  auto it = rows.find(c);
  if (it == rows.end()) throw Error("no local row for this vertex");
  return it->second;
}

namespace {

void add_scaled(LocalRow& dst, const LocalRow& src, const Rational& p) {
  dst.win += p * src.win;
  dst.lose += p * src.lose;
  dst.diverge += p * src.diverge;
  for (const auto& [k, v] : src.left) dst.left[k] += p * v;
  for (const auto& [k, v] : src.same) dst.same[k] += p * v;
  for (const auto& [k, v] : src.right) dst.right[k] += p * v;
}

void prune_zeros(LocalRow& row) {
  std::erase_if(row.left, [](const auto& kv) { return kv.second == 0; });
  std::erase_if(row.same, [](const auto& kv) { return kv.second == 0; });
  std::erase_if(row.right, [](const auto& kv) { return kv.second == 0; });
}

}  // namespace

LocalProbs local_probs(const GrammarIndex& index, const ProbabilityMap& mu, const LocalFragment& frag,
                       const CanonSet& phi1, const CanonSet& phi2) {
  const Grammar& g = index.grammar();
  const std::size_t n = frag.states.size();
  auto in = [&](const CanonSet& set, const FragmentState& s) { return set[index.canonical_index(s.canonical)]; };

  std::vector<std::vector<std::pair<std::size_t, Rational>>> out(n);
  for (const FragmentArc& a : frag.arcs) out[a.from].emplace_back(a.to, probability(mu, g, a.label));
  for (std::size_t s : frag.self_loops) out[s].emplace_back(s, Rational(1));

  enum class Role { Boundary, Win, Lose, Transient };
  std::vector<Role> role(n, Role::Boundary);
  for (std::size_t s = 0; s < n; ++s) {
    const FragmentState& st = frag.states[s];
    if (st.boundary()) continue;
    if (in(phi2, st)) role[s] = Role::Win;
    else if (!in(phi1, st)) role[s] = Role::Lose;
    else role[s] = Role::Transient;
  }

  // Transient states that can reach some absorbing class; the others diverge.
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t s = 0; s < n; ++s)
    if (role[s] == Role::Transient)
      for (const auto& [t, p] : out[s])
        if (p > 0) pred[t].push_back(s);
  std::vector<bool> productive(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s)
    if (role[s] != Role::Transient) {
      productive[s] = true;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    std::size_t t = queue.front();
    queue.pop_front();
    for (std::size_t s : pred[t])
      if (!productive[s]) {
        productive[s] = true;
        queue.push_back(s);
      }
  }

  // Unit row of an absorbing (non-solved) state.
  auto unit = [&](std::size_t s) {
    LocalRow r;
    const FragmentState& st = frag.states[s];
    switch (role[s]) {
      case Role::Win: r.win = 1; return r;
      case Role::Lose: r.lose = 1; return r;
      case Role::Transient: r.diverge = 1; return r;
      case Role::Boundary: break;
    }
    switch (st.kind) {
      case FragmentState::Kind::ParentInput: r.left[st.position] = 1; break;
      case FragmentState::Kind::SameLevel: r.same[st.canonical] = 1; break;
      case FragmentState::Kind::ChildAttach: r.right[{st.hyperarc, st.canonical}] = 1; break;
      case FragmentState::Kind::Interior: break;
    }
    return r;
  };

  std::vector<std::size_t> unknowns;
  std::vector<long> col(n, -1);
  for (std::size_t s = 0; s < n; ++s)
    if (role[s] == Role::Transient && productive[s]) {
      col[s] = static_cast<long>(unknowns.size());
      unknowns.push_back(s);
    }

  // Right-hand sides: one column per absorbing class.
  std::vector<LocalRow> solved(n);
  if (!unknowns.empty()) {
    std::map<std::string, std::size_t> class_col;
    std::vector<LocalRow> class_unit;
    auto key_of = [&](std::size_t s) {
      const FragmentState& st = frag.states[s];
      if (role[s] == Role::Win) return std::string("win");
      if (role[s] == Role::Lose) return std::string("lose");
      if (role[s] == Role::Transient) return std::string("diverge");
      switch (st.kind) {
        case FragmentState::Kind::ParentInput: return "left" + std::to_string(st.position);
        case FragmentState::Kind::SameLevel: return "same" + std::to_string(index.canonical_index(st.canonical));
        default:
          return "right" + std::to_string(st.hyperarc) + ":" + std::to_string(index.canonical_index(st.canonical));
      }
    };
    for (std::size_t s = 0; s < n; ++s)
      if (col[s] < 0) {
        auto [it, fresh] = class_col.emplace(key_of(s), class_unit.size());
        if (fresh) class_unit.push_back(unit(s));
      }
    const std::size_t m = unknowns.size(), k = class_unit.size();
    Matrix a(m, std::vector<Rational>(m)), b(m, std::vector<Rational>(k));
    for (std::size_t i = 0; i < m; ++i) {
      a[i][i] += 1;
      for (const auto& [t, p] : out[unknowns[i]]) {
        if (col[t] >= 0) a[i][static_cast<std::size_t>(col[t])] -= p;
        else b[i][class_col.at(key_of(t))] += p;
      }
    }
    Matrix x = solve_linear(std::move(a), std::move(b));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < k; ++c)
        if (x[i][c] != 0) add_scaled(solved[unknowns[i]], class_unit[c], x[i][c]);
  }

  LocalProbs lp;
  lp.context = frag.context;
  for (const auto& [v, s] : frag.level0_) {
    const FragmentState& st = frag.states[s];
    if (st.kind == FragmentState::Kind::ParentInput) continue;
    LocalRow row;
    if (in(phi2, st)) {
      row.win = 1;
    } else if (!in(phi1, st)) {
      row.lose = 1;
    } else {
      for (const auto& [t, p] : out[s]) add_scaled(row, col[t] >= 0 ? solved[t] : unit(t), p);
    }
    prune_zeros(row);
    if (row.total() != 1)
      throw Error("local probabilities at " + index.describe(st.canonical) + " sum to " + to_fraction(row.total()) +
                  ", expected 1 (is the grammar probabilistic?)");
    lp.rows.emplace(st.canonical, std::move(row));
  }
  return lp;
}

}  // namespace pregma
