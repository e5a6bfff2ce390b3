#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pregma/grammar.hpp"
#include "pregma/validation.hpp"

namespace pregma {

/// Membership over GrammarIndex::canonical_vertices(), by canonical_index.
using CanonSet = std::vector<bool>;

/// Canonical vertices carrying at least one of `colours`.
CanonSet canon_with_any(const GrammarIndex& index, const std::set<SymbolId>& colours);
CanonSet canon_all(const GrammarIndex& index);
CanonSet canon_none(const GrammarIndex& index);

/// A vertex of the two-level fragment of context A.
struct FragmentState {
  enum class Kind {
    ParentInput,  // iota_A(position)
    SameLevel,    // attachment vertex of H_A
    ChildAttach,  // attachment vertex of the copy of H_B on hyperarc `hyperarc`
    Interior,     // interior vertex, of H_A or of a child copy
  };
  Kind kind = Kind::Interior;
  unsigned position = 0;          // ParentInput
  std::size_t hyperarc = 0;       // copy index; only meaningful when `child`
  bool child = false;             // vertex of a child copy rather than of H_A
  CanonicalVertex canonical;      // undefined for ParentInput
  std::string name;

  bool boundary() const { return kind != Kind::Interior; }
};

struct FragmentArc {
  std::size_t from = 0;
  std::size_t to = 0;
  SymbolId label = kNoSymbol;
};

/// Terminal arcs of H_A plus, for each nonterminal hyperarc, those of a glued copy of
/// the rule it names. Boundary vertices are where the level structure is cut.
struct LocalFragment {
  SymbolId context = kNoSymbol;
  std::vector<FragmentState> states;
  std::vector<FragmentArc> arcs;
  /// Implicit self-loops of absorbing sinks.
  std::set<std::size_t> self_loops;

  /// State of a vertex of H_A (inputs map to ParentInput states).
  std::size_t level0(VertexId v) const { return level0_.at(v); }
  /// State of vertex `w` of the copy on hyperarc `h`.
  std::size_t level1(std::size_t h, VertexId w) const { return level1_.at({h, w}); }

  std::map<VertexId, std::size_t> level0_;
  std::map<std::pair<std::size_t, VertexId>, std::size_t> level1_;
};

LocalFragment build_fragment(const GrammarIndex& index, SymbolId context);

/// Where the first boundary hit (or absorption) of a walk lands.
struct LocalRow {
  Rational win{0};      // reached phi2 before any boundary
  Rational lose{0};     // reached a vertex outside phi1 and phi2 first
  Rational diverge{0};  // trapped in phi1\phi2 states that reach no absorbing class
  std::map<unsigned, Rational> left;           // first hit iota_A(j)
  std::map<CanonicalVertex, Rational> same;    // first hit a same-level attachment
  std::map<std::pair<std::size_t, CanonicalVertex>, Rational> right;  // first hit a child attachment

  Rational total() const;
};

/// First-hit probabilities from every non-input vertex of H_A.
struct LocalProbs {
  SymbolId context = kNoSymbol;
  std::map<CanonicalVertex, LocalRow> rows;

  const LocalRow& row(const CanonicalVertex& c) const;
};

/// Requires phi1/phi2 as canonical sets and a probabilistic grammar (finite degrees,
/// complete outside). Exact rational linear algebra; checks that every row sums to 1.
LocalProbs local_probs(const GrammarIndex& index, const ProbabilityMap& mu, const LocalFragment& frag,
                       const CanonSet& phi1, const CanonSet& phi2);

}  // namespace pregma
