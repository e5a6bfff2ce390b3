#pragma once

// Independent reference computations shared by the unit tests and the acceptance run.

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "pregma/qualitative.hpp"
#include "pregma/quantitative.hpp"
#include "support.hpp"

namespace pregma::testing {

inline CanonSet colours(const GrammarIndex& index, const std::string& name) {
  if (name == "tt") return canon_all(index);
  return canon_with_any(index, {index.grammar().symbol(name)});
}

inline std::vector<bool> open_set(const CanonSet& phi1, const CanonSet& phi2) {
  std::vector<bool> open(phi1.size());
  for (std::size_t i = 0; i < open.size(); ++i) open[i] = phi1[i] && !phi2[i];
  return open;
}

/// Realized addresses per canonical vertex up to `depth`, shallowest first, at most
/// `per_vertex` of them.
inline std::map<CanonicalVertex, std::vector<VertexAddress>> realizations(const Grammar& g, unsigned depth,
                                                                         std::size_t per_vertex) {
  const Expansion ex = expand(g, depth);
  std::vector<const ConcreteVertex*> order;
  for (const auto& [id, v] : ex.vertices) order.push_back(&v);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->level < b->level; });
  std::map<CanonicalVertex, std::vector<VertexAddress>> out;
  for (const auto* v : order) {
    auto& list = out[v->canonical];
    if (list.size() < per_vertex) list.push_back(v->address);
  }
  return out;
}

/// Some path of length <= radius through phi1 reaches phi2.
inline bool reaches_within(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                           const CanonSet& phi2, const VertexAddress& from, unsigned radius) {
  std::set<VertexAddress> seen{index.normalize(from)};
  std::deque<std::pair<VertexAddress, unsigned>> queue{{index.normalize(from), 0}};
  while (!queue.empty()) {
    auto [a, d] = queue.front();
    queue.pop_front();
    const std::size_t c = index.canonical_index(index.canonical_of(a));
    if (phi2[c]) return true;
    if (!phi1[c] || d == radius) continue;
    for (const auto& [next, p] : address_successors(index, mu, a))
      if (p > 0 && seen.insert(next).second) queue.emplace_back(next, d + 1);
  }
  return false;
}

inline Rational next_oracle(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                            const VertexAddress& at) {
  Rational sum = 0;
  for (const auto& [next, p] : address_successors(index, mu, at))
    if (target[index.canonical_index(index.canonical_of(next))]) sum += p;
  return sum;
}

inline bool compare_qualitative(const Rational& p, QualitativeCmp cmp) {
  switch (cmp) {
    case QualitativeCmp::Zero: return p == 0;
    case QualitativeCmp::One: return p == 1;
    case QualitativeCmp::Positive: return p > 0;
    case QualitativeCmp::BelowOne: return p < 1;
  }
  return false;
}

inline Verdict from_bool(bool b) { return b ? Verdict::Holds : Verdict::Fails; }

/// Lines of hard_cases.txt: corpus entry, phi1 colour, phi2 colour, canonical vertex.
using HardCase = std::tuple<std::string, std::string, std::string, std::string>;

inline std::set<HardCase> hard_cases() {
  std::istringstream in(read_file(corpus("hard_cases.txt")));
  std::set<HardCase> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream words(line);
    HardCase h;
    words >> std::get<0>(h) >> std::get<1>(h) >> std::get<2>(h) >> std::get<3>(h);
    out.insert(h);
  }
  return out;
}

// 0.w1 read as a binary fraction.
inline Rational binary_fraction_with_one(const std::string& w) {
  mpz_class value = 0;
  for (char c : w) value = 2 * value + (c == '1' ? 1 : 0);
  value = 2 * value + 1;
  Rational q(value, mpz_class(1) << (w.size() + 1));
  q.canonicalize();
  return q;
}

/// Red probability of the s-vertex: 1/2 + (0.V1 - 0.U1) / 2, hence 1/2 exactly when U = V.
inline Rational red_oracle(const std::string& u, const std::string& v) {
  return Rational(1, 2) + (binary_fraction_with_one(v) - binary_fraction_with_one(u)) / 2;
}

/// Every index sequence of length 1..max_length over `pairs` pairs.
inline std::vector<std::vector<unsigned>> sequences(std::size_t pairs, std::size_t max_length) {
  std::vector<std::vector<unsigned>> out, level{{}};
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::vector<std::vector<unsigned>> next;
    for (const auto& s : level)
      for (unsigned i = 1; i <= pairs; ++i) {
        auto t = s;
        t.push_back(i);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

/// Exact bounded probability of tt U `colour` from the s-vertex, past the longest path.
inline Rational brute_force(const PcpGadget& gadget, const PcpInstance& p, const std::vector<unsigned>& seq,
                            const std::string& colour) {
  const Grammar& g = gadget.file.grammar;
  const GrammarIndex index(g);
  const VertexAddress from = s_address(g, p, seq);
  const CanonSet target = canon_with_any(index, {g.symbol(colour)});
  std::vector<bool> open(target.size());
  for (std::size_t i = 0; i < open.size(); ++i) open[i] = !target[i];
  const unsigned horizon = static_cast<unsigned>(concat_u(p, seq).size() + concat_v(p, seq).size() + 4);
  const FiniteMC mc = explore(index, gadget.file.mu, from, horizon, &open);
  return bounded_until(mc, {mc.all(), states_in(mc, index, target), horizon}, mc.state_at(from));
}

/// Every word of at most `max` symbols: stack symbols then one state.
inline std::set<Word> all_words(const PushdownSystem& p, std::size_t max) {
  std::set<Word> out;
  std::vector<Word> prefixes{Word{}};
  for (std::size_t len = 1; len <= max; ++len) {
    std::vector<Word> longer;
    for (const auto& prefix : prefixes) {
      for (const auto& s : p.states) {
        Word w = prefix;
        w.push_back(s);
        out.insert(w);
      }
      for (const auto& x : p.stack) {
        Word w = prefix;
        w.push_back(x);
        longer.push_back(w);
      }
    }
    prefixes = std::move(longer);
  }
  return out;
}

/// Suffix rewriting over words of at most `max` symbols, in canonical form; with `whole`
/// unset, only the weakly connected part around `start`.
inline std::string suffix_oracle(const PushdownSystem& p, const Word& start, std::size_t max, bool whole) {
  std::set<std::tuple<Word, std::string, Word>> arcs;
  std::map<Word, std::vector<Word>> adj;
  const std::set<Word> every = all_words(p, max);
  for (const auto& w : every)
    for (const auto& r : p.rules) {
      if (r.lhs.size() > w.size() || !std::equal(r.lhs.begin(), r.lhs.end(), w.end() - r.lhs.size())) continue;
      Word next(w.begin(), w.end() - r.lhs.size());
      next.insert(next.end(), r.rhs.begin(), r.rhs.end());
      if (next.size() > max) continue;
      arcs.emplace(w, r.label, next);
      adj[w].push_back(next);
      adj[next].push_back(w);
    }
  std::set<Word> words = every;
  if (!whole) {
    words = {start};
    std::deque<Word> queue{start};
    while (!queue.empty()) {
      const Word w = queue.front();
      queue.pop_front();
      for (const auto& v : adj[w])
        if (words.insert(v).second) queue.push_back(v);
    }
  }
  LabelledGraph g;
  for (const auto& w : words) g.vertices.insert(word_text(w));
  for (const auto& [a, l, b] : arcs)
    if (words.count(a)) g.arcs.emplace(word_text(a), l, word_text(b));
  return canonical_form(g);
}

inline LabelledGraph up_to(const PushdownSystem& p, const LabelledGraph& g, std::size_t max) {
  return induced(g, [&](const std::string& w) { return parse_word(p, w).size() <= max; });
}

}  // namespace pregma::testing
