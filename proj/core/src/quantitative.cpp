#include "pregma/quantitative.hpp"

#include <algorithm>

namespace pregma {

std::size_t UntilSystem::win_var(const CanonicalVertex& c) const {
  auto it = win.find(c);
  if (it == win.end()) throw Error("no Win variable for this vertex");
  return it->second;
}

std::size_t UntilSystem::dec_var(const CanonicalVertex& c, unsigned j) const {
  auto it = dec.find({c, j});
  if (it == dec.end()) throw Error("no Dec variable for this vertex");
  return it->second;
}

std::string attachment_name(const GrammarIndex& index, const CanonicalVertex& c) {
  const Grammar& g = index.grammar();
  const Attachment a = index.attachment_of(c);
  const Rule& r = index.rule(c.context);
  const SymbolId b = r.rhs.arcs[a.hyperarc].label;
  std::size_t same_label = 0;
  for (std::size_t h : index.nonterminal_arcs(c.context))
    if (r.rhs.arcs[h].label == b) ++same_label;
  std::string out = g.name(b);
  if (same_label > 1) out += "#" + std::to_string(a.hyperarc);
  return out + "_" + std::to_string(a.position);
}

UntilSystem assemble_system(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                            const CanonSet& phi2) {
  const Grammar& g = index.grammar();
  UntilSystem s;
  for (SymbolId a : index.reachable()) s.local.emplace(a, local_probs(index, mu, build_fragment(index, a), phi1, phi2));

  std::vector<CanonicalVertex> starts;
  for (SymbolId a : index.reachable()) {
    const Rule& r = index.rule(a);
    for (VertexId u : r.rhs.vertices) {
      if (index.input_position(a, u) || index.attachments(a, u).empty()) continue;
      const CanonicalVertex c{a, u};
      starts.push_back(c);
      const std::string name = attachment_name(index, c);
      s.win[c] = s.poly.add_variable("Win(" + name + ")_" + g.name(a));
      for (unsigned j = 1; j <= r.iota.size(); ++j)
        s.dec[{c, j}] = s.poly.add_variable("Dec(" + name + "," + g.name(a) + "_" + std::to_string(j) + ")");
    }
  }

  for (const CanonicalVertex& c : starts) {
    const SymbolId a = c.context;
    const Rule& r = index.rule(a);
    const unsigned arity = static_cast<unsigned>(r.iota.size());
    const LocalRow& row = s.local.at(a).row(c);
    // Level-0 landing vertices of a descent out of the copy on hyperarc h.
    auto landing = [&](std::size_t h) {
      const Hyperarc& x = r.rhs.arcs[h];
      std::vector<CanonicalVertex> out;
      for (VertexId v : x.vertices) {
        if (index.input_position(a, v))
          throw Error("a descent from the copy on " + g.name(x.label) + " in " + g.name(a) +
                      " lands on an input vertex; the grammar must be complete outside");
        out.push_back(CanonicalVertex{a, v});
      }
      return out;
    };

    Polynomial& w = s.poly.rhs[s.win.at(c)];
    w.terms.push_back({row.win, {}});
    for (const auto& [t, p] : row.same) w.terms.push_back({p, {s.win.at(t)}});
    for (const auto& [key, p] : row.right) {
      const auto& [h, child] = key;
      const auto land = landing(h);
      w.terms.push_back({p, {s.win.at(child)}});
      for (unsigned l = 1; l <= land.size(); ++l)
        w.terms.push_back({p, {s.dec.at({child, l}), s.win.at(land[l - 1])}});
    }
    w.normalize();

    for (unsigned j = 1; j <= arity; ++j) {
      Polynomial& d = s.poly.rhs[s.dec.at({c, j})];
      if (auto it = row.left.find(j); it != row.left.end()) d.terms.push_back({it->second, {}});
      for (const auto& [t, p] : row.same) d.terms.push_back({p, {s.dec.at({t, j})}});
      for (const auto& [key, p] : row.right) {
        const auto& [h, child] = key;
        const auto land = landing(h);
        for (unsigned l = 1; l <= land.size(); ++l)
          d.terms.push_back({p, {s.dec.at({child, l}), s.dec.at({land[l - 1], j})}});
      }
      d.normalize();
    }
  }
  s.poly.simplify();
  return s;
}

Interval iadd(const Interval& a, const Interval& b) {
  return Interval{std::min(Rational(1), Rational(a.lo + b.lo)), std::min(Rational(1), Rational(a.hi + b.hi))};
}

Interval imul(const Interval& a, const Interval& b) { return Interval{a.lo * b.lo, a.hi * b.hi}; }

Interval iscale(const Rational& c, const Interval& a) { return Interval{c * a.lo, c * a.hi}; }

UntilAnalysis::UntilAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                             const CanonSet& phi2, const Rational& eps, const SolveOptions& opts)
    : index_(&index), sys_(assemble_system(index, mu, phi1, phi2)), opts_(opts), eps_(eps) {
  enc_ = solve_enclosure(sys_.poly, eps_, opts_);
  compute_input_bounds();
}

void UntilAnalysis::refine(const Rational& eps) {
  eps_ = eps;
  enc_ = solve_enclosure(sys_.poly, eps_, opts_);
  compute_input_bounds();
}

Interval UntilAnalysis::win(const CanonicalVertex& c) const { return enc_.at(sys_.win_var(c)); }

Interval UntilAnalysis::dec(const CanonicalVertex& c, unsigned j) const { return enc_.at(sys_.dec_var(c, j)); }

Interval UntilAnalysis::local_value(const CanonicalVertex& c, const std::vector<Interval>& inputs) const {
  auto full = [&](const CanonicalVertex& s, const std::vector<Interval>& in) {
    Interval v = win(s);
    for (unsigned j = 1; j <= in.size(); ++j) v = iadd(v, imul(dec(s, j), in[j - 1]));
    return v;
  };
  if (sys_.win.count(c)) return full(c, inputs);

  const LocalRow& row = sys_.local.at(c.context).row(c);
  const Rule& r = index_->rule(c.context);
  Interval v = Interval::point(row.win);
  for (const auto& [t, p] : row.same) v = iadd(v, iscale(p, full(t, inputs)));
  for (const auto& [key, p] : row.right) {
    const auto& [h, child] = key;
    const Hyperarc& x = r.rhs.arcs[h];
    Interval part = win(child);
    for (unsigned l = 1; l <= x.vertices.size(); ++l)
      part = iadd(part, imul(dec(child, l), full(CanonicalVertex{c.context, x.vertices[l - 1]}, inputs)));
    v = iadd(v, iscale(p, part));
  }
  for (const auto& [j, p] : row.left) v = iadd(v, iscale(p, inputs.at(j - 1)));
  return v;
}

Interval UntilAnalysis::at(const VertexAddress& address) const {
  const VertexAddress a = index_->normalize(address);
  SymbolId ctx = index_->grammar().axiom;
  std::vector<Interval> inputs;
  for (std::uint32_t h : a.path) {
    const Hyperarc& x = index_->rule(ctx).rhs.arcs[h];
    std::vector<Interval> next;
    for (VertexId v : x.vertices) next.push_back(local_value(CanonicalVertex{ctx, v}, inputs));
    inputs = std::move(next);
    ctx = x.label;
  }
  return local_value(CanonicalVertex{ctx, a.vertex}, inputs);
}

Interval UntilAnalysis::at(const CanonicalVertex& c) const { return local_value(c, input_bounds(c.context)); }

const std::vector<Interval>& UntilAnalysis::input_bounds(SymbolId context) const {
  auto it = inputs_.find(context);
  if (it == inputs_.end()) throw Error("no input bounds for this context");
  return it->second;
}

void UntilAnalysis::compute_input_bounds() {
  inputs_.clear();
  const Grammar& g = index_->grammar();
  for (const Rule& r : g.rules) inputs_[r.lhs] = std::vector<Interval>(r.iota.size(), Interval{0, 1});
  const unsigned bits = bits_for(eps_) + 16;
  for (unsigned round = 0; round < 1000; ++round) {
    bool changed = false;
    for (SymbolId a : index_->reachable()) {
      if (a == g.axiom) continue;
      auto& cur = inputs_[a];
      for (unsigned j = 1; j <= cur.size(); ++j) {
        std::optional<Interval> hull_all;
        for (const auto& [x, h] : index_->sites(a)) {
          const VertexId v = index_->rule(x).rhs.arcs[h].vertices[j - 1];
          Interval val = local_value(CanonicalVertex{x, v}, inputs_.at(x));
          hull_all = hull_all ? hull(*hull_all, val) : val;
        }
        if (!hull_all) continue;
        Interval next{std::max(cur[j - 1].lo, Rational(round_down(hull_all->lo, bits))),
                      std::min(cur[j - 1].hi, Rational(round_up(hull_all->hi, bits)))};
        if (next.lo > next.hi) next = cur[j - 1];  // cannot happen for sound bounds
        if (next.lo != cur[j - 1].lo || next.hi != cur[j - 1].hi) {
          cur[j - 1] = next;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
}

UntilResult until_probability(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                              const CanonSet& phi2, const VertexAddress& v0, const Rational& eps,
                              const SolveOptions& opts) {
  Rational inner = eps / 4;
  UntilAnalysis an(index, mu, phi1, phi2, inner, opts);
  Interval v = an.at(v0);
  for (int round = 0; round < 8 && an.converged() && v.width() > eps; ++round) {
    inner /= 16;
    an.refine(inner);
    v = an.at(v0);
  }
  return UntilResult{v, an.converged() && v.width() <= eps};
}

std::string_view comparison_text(Comparison c) {
  switch (c) {
    case Comparison::Less: return "<";
    case Comparison::LessEqual: return "<=";
    case Comparison::Greater: return ">";
    case Comparison::GreaterEqual: return ">=";
  }
  return "?";
}

std::string_view verdict_text(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

Verdict decide_threshold(const Interval& e, Comparison cmp, const Rational& rho) {
  switch (cmp) {
    case Comparison::Greater:
      if (e.lo > rho) return Verdict::Holds;
      if (e.hi <= rho) return Verdict::Fails;
      break;
    case Comparison::GreaterEqual:
      if (e.lo >= rho) return Verdict::Holds;
      if (e.hi < rho) return Verdict::Fails;
      break;
    case Comparison::Less:
      if (e.hi < rho) return Verdict::Holds;
      if (e.lo >= rho) return Verdict::Fails;
      break;
    case Comparison::LessEqual:
      if (e.hi <= rho) return Verdict::Holds;
      if (e.lo > rho) return Verdict::Fails;
      break;
  }
  return Verdict::Unknown;
}

}  // namespace pregma
