#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pregma/fragment.hpp"
#include "pregma/polysystem.hpp"

namespace pregma {

/// Win(B_i)_A / Dec(B_i,A_j) variables of one until query, together with the local
/// probabilities they were assembled from. Only contexts reachable from the axiom.
struct UntilSystem {
  PolySystem poly;
  std::map<SymbolId, LocalProbs> local;
  std::map<CanonicalVertex, std::size_t> win;
  /// Dec variable of attachment c towards parent input j (1-based).
  std::map<std::pair<CanonicalVertex, unsigned>, std::size_t> dec;

  std::size_t win_var(const CanonicalVertex& c) const;
  std::size_t dec_var(const CanonicalVertex& c, unsigned j) const;
};

/// `B_i` for attachment c (`B#h_i` when B labels several hyperarcs of its context).
std::string attachment_name(const GrammarIndex& index, const CanonicalVertex& c);

/// Builds the system and simplifies it (structural zeros and constants substituted).
UntilSystem assemble_system(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                            const CanonSet& phi2);

/// Non-negative interval helpers, results clipped to [0,1].
Interval iadd(const Interval& a, const Interval& b);
Interval imul(const Interval& a, const Interval& b);
Interval iscale(const Rational& c, const Interval& a);

/// Certified probabilities of phi1 U phi2 for one grammar and one pair of sets.
class UntilAnalysis {
 public:
  UntilAnalysis(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1, const CanonSet& phi2,
                const Rational& eps, const SolveOptions& opts = {});

  const GrammarIndex& index() const { return *index_; }
  const UntilSystem& system() const { return sys_; }
  const Enclosure& enclosure() const { return enc_; }
  bool converged() const { return enc_.converged; }

  Interval win(const CanonicalVertex& c) const;
  Interval dec(const CanonicalVertex& c, unsigned j) const;

  /// Probability at a concrete vertex, given bounds on the probabilities at the
  /// inputs of the instance containing it.
  Interval local_value(const CanonicalVertex& c, const std::vector<Interval>& inputs) const;
  /// Probability at a concrete vertex.
  Interval at(const VertexAddress& address) const;
  /// Hull over every concrete vertex with this canonical image.
  Interval at(const CanonicalVertex& c) const;
  /// Bounds on the probabilities at iota_A(j) over every instance of A.
  const std::vector<Interval>& input_bounds(SymbolId context) const;

  /// Re-solves with a smaller eps.
  void refine(const Rational& eps);

 private:
  void compute_input_bounds();

  const GrammarIndex* index_;
  UntilSystem sys_;
  SolveOptions opts_;
  Rational eps_;
  Enclosure enc_;
  std::map<SymbolId, std::vector<Interval>> inputs_;
};

/// Enclosure of P(v0 |= phi1 U phi2) with width <= eps when the solver converges.
struct UntilResult {
  Interval value;
  bool converged = false;
};
UntilResult until_probability(const GrammarIndex& index, const ProbabilityMap& mu, const CanonSet& phi1,
                              const CanonSet& phi2, const VertexAddress& v0, const Rational& eps,
                              const SolveOptions& opts = {});

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };
enum class Verdict { Holds, Fails, Unknown };

std::string_view comparison_text(Comparison c);
std::string_view verdict_text(Verdict v);

/// Holds/fails when every value in the enclosure gives the same answer.
Verdict decide_threshold(const Interval& enclosure, Comparison cmp, const Rational& rho);

}  // namespace pregma
