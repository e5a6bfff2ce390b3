#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pregma/grammar.hpp"

namespace pregma {

/// mu: arc label -> probability.
using ProbabilityMap = std::map<SymbolId, Rational>;

struct CompleteOutsideViolation {
  enum class Kind {
    InputIsOutput,  // an input vertex also lies on a nonterminal hyperarc
    SharedOutput,   // an output vertex lies on several nonterminal hyperarcs
  };
  Kind kind;
  SymbolId rule = kNoSymbol;
  VertexId vertex = 0;

  std::string to_string(const Grammar& g) const;
};

std::vector<CompleteOutsideViolation> check_complete_outside(const Grammar& g);

struct DegreeCount {
  std::uint64_t count = 0;
  bool infinite = false;

  friend bool operator==(const DegreeCount&, const DegreeCount&) = default;
};

/// Out-degree per arc label of every canonical vertex of a reachable context.
struct DegreeProfile {
  std::map<CanonicalVertex, std::map<SymbolId, DegreeCount>> counts;

  /// Count of `label` arcs at `c` (zero when absent).
  DegreeCount at(const CanonicalVertex& c, SymbolId label) const;
  bool any_infinite(const CanonicalVertex& c) const;
  bool sink(const CanonicalVertex& c) const;
};

DegreeProfile degree_profile(const Grammar& g);

struct PhrFailure {
  enum class Kind {
    Structural,
    NotCompleteOutside,
    MissingProbability,
    ProbabilityRange,
    InfiniteDegree,
    Sink,
    Sum,
  };
  Kind kind;
  std::string canonical;  // describe() form, or the offending symbol/rule
  Rational sum{0};
  std::string message;

  /// `canonical=<c> sum=<p/q>` for per-vertex failures, `error=<message>` otherwise.
  std::string to_string() const;
};

/// Empty iff (g, mu) is a probabilistic grammar: complete outside, finite out-degrees,
/// and out-mass exactly 1 at every non-absorbing canonical vertex.
std::vector<PhrFailure> phr_check(const Grammar& g, const ProbabilityMap& mu);

/// Out-mass of one canonical vertex, counting the implicit absorbing self-loop.
Rational out_mass(const GrammarIndex& index, const ProbabilityMap& mu, const CanonicalVertex& c);

/// mu(label); throws Error if undefined.
const Rational& probability(const ProbabilityMap& mu, const Grammar& g, SymbolId label);

}  // namespace pregma
