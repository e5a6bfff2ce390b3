#pragma once

#include <map>
#include <set>
#include <vector>

#include "pregma/quantitative.hpp"

namespace pregma {

/// Combines per-instance verdicts: Holds/Fails when they all agree, Unknown otherwise.
Verdict agree(const std::vector<Verdict>& vs);
/// Three-valued conjunction.
Verdict tri_and(Verdict a, Verdict b);
Verdict tri_not(Verdict a);

/// Exact P(phi1 U phi2) > 0, from the boolean abstraction of the Win/Dec system.
class PositivityAnalysis {
 public:
  PositivityAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1, const CanonSet& phi2);

  bool at(const VertexAddress& address) const;
  /// Holds/fails when every instance agrees.
  Verdict at(const CanonicalVertex& c) const;
  /// Reachable positivity patterns at the inputs of `context`.
  const std::set<std::vector<bool>>& environments(SymbolId context) const;

  bool win_positive(const CanonicalVertex& c) const { return pos_[sys_.win_var(c)]; }
  bool dec_positive(const CanonicalVertex& c, unsigned j) const { return pos_[sys_.dec_var(c, j)]; }
  /// Number of rounds the boolean Kleene iteration needed to stabilize.
  std::size_t rounds() const { return rounds_; }
  std::size_t variables() const { return sys_.poly.size(); }

 private:
  bool value(const CanonicalVertex& c, const std::vector<bool>& inputs) const;

  const GrammarIndex* index_;
  UntilSystem sys_;
  std::vector<bool> pos_;
  std::size_t rounds_ = 0;
  std::map<SymbolId, std::set<std::vector<bool>>> envs_;
};

/// Canonical vertices from which P(phi1 U phi2) = 1 in every instance for a structural
/// reason: no vertex reachable through phi1 & !phi2 can leave phi1 | phi2, and each of
/// them reaches phi2 along a path whose shape, hence length and probability, does not
/// depend on the instance. Sound, not complete.
CanonSet structurally_almost_sure(const GrammarIndex& index, const CanonSet& phi1, const CanonSet& phi2);

/// P(phi1 U phi2) = 1, three-valued. Yes needs an exact lower bound of 1 or the structural
/// criterion above; no needs a certified upper bound below 1 or a positive-probability
/// descent into a "no" parent.
class AlmostSureAnalysis {
 public:
  AlmostSureAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1, const CanonSet& phi2,
                     const Rational& eps, const SolveOptions& opts = {});

  Verdict at(const VertexAddress& address) const;
  Verdict at(const CanonicalVertex& c) const;
  const UntilAnalysis& quantitative() const { return quant_; }

 private:
  Verdict value(const CanonicalVertex& c, const std::vector<Verdict>& inputs) const;

  const GrammarIndex* index_;
  CanonSet phi1_, phi2_;
  UntilAnalysis quant_;
  CanonSet sure_;
  std::vector<bool> pos_;
  std::map<SymbolId, std::set<std::vector<Verdict>>> envs_;
};

/// One-step probabilities of entering `target` from c, one entry per instantiation
/// site of c's context (a single entry when no successor lies in the parent).
std::vector<Rational> next_values(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                                  const CanonicalVertex& c);
/// Exact one-step probability at a concrete vertex.
Rational next_value(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                    const VertexAddress& address);

enum class QualitativeCmp { Zero, One, Positive, BelowOne };

/// Verdict per canonical vertex (index order) for P(X target) compared with 0 or 1.
std::vector<Verdict> next_qualitative(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& target,
                                      QualitativeCmp cmp);

/// Verdict per canonical vertex for P(phi1 U phi2) > 0.
std::vector<Verdict> until_positive(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                    const CanonSet& phi2);

/// Verdict per canonical vertex for P(phi1 U phi2) = 1.
std::vector<Verdict> until_almost_sure(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                                       const CanonSet& phi2, const Rational& eps);

}  // namespace pregma
