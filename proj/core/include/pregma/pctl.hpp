#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pregma/qualitative.hpp"

namespace pregma {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// PCTL state formula. `F` and `G` only appear before normalize().
struct Formula {
  enum class Kind { True, Atom, Not, And, Next, Until, Eventually, Globally };
  Kind kind = Kind::True;
  std::string atom;
  Comparison cmp = Comparison::GreaterEqual;
  Rational threshold{0};
  FormulaPtr left;   // Not/And/Until lhs, Next/F/G operand
  FormulaPtr right;  // And/Until rhs

  static FormulaPtr tt();
  static FormulaPtr make_atom(std::string name);
  static FormulaPtr negate(FormulaPtr f);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr next(Comparison cmp, Rational rho, FormulaPtr f);
  static FormulaPtr until(FormulaPtr a, Comparison cmp, Rational rho, FormulaPtr b);
  static FormulaPtr eventually(Comparison cmp, Rational rho, FormulaPtr f);
  static FormulaPtr globally(Comparison cmp, Rational rho, FormulaPtr f);
};

/// Concrete syntax, fully parenthesized where needed; parse_formula(to_string(f)) == f.
std::string to_string(const Formula& f);
bool equal(const Formula& a, const Formula& b);

class FormulaError : public Error {
 public:
  FormulaError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// `tt`, identifiers, `!`, `&`, `X[>=1/2] f`, `f U[>2/3] g`, `F[..] f`, `G[..] f` and
/// parentheses. `U` binds weakest and associates to the right. A bracket may also hold
/// `=rho`, read as the conjunction of `>=rho` and `<=rho`.
/// F and G are desugared unless `keep_sugar`.
FormulaPtr parse_formula(std::string_view text, bool keep_sugar = false);

/// Rewrites F[~p] f into tt U[~p] f and G[~p] f into tt U[~'1-p] !f.
FormulaPtr normalize(const FormulaPtr& f);

/// Satisfaction sets per canonical vertex: `under` certainly satisfies, `over` may.
struct TriSet {
  CanonSet under;
  CanonSet over;

  Verdict at(std::size_t i) const {
    if (under[i]) return Verdict::Holds;
    return over[i] ? Verdict::Unknown : Verdict::Fails;
  }
  bool exact() const { return under == over; }
};

enum class CheckMode { Approximate, QualitativeOnly };

struct CheckOptions {
  CheckMode mode = CheckMode::Approximate;
  Rational eps{1, 1000000};
  /// Extra rounds (eps / 16 each) spent on a threshold the enclosure does not separate.
  unsigned refinements = 3;
  SolveOptions solve;
};

/// Verdict at one vertex with the probability enclosure of the outermost probabilistic
/// operator, when there is one (the leftmost under a conjunction).
struct PointVerdict {
  Verdict verdict = Verdict::Unknown;
  std::optional<Interval> enclosure;
};

/// Bottom-up labelling of canonical vertices. Results are cached per subformula node.
class Checker {
 public:
  Checker(const GrammarIndex& index, const ProbabilityMap& mu, CheckOptions opts = {});

  /// Satisfaction set of a normalized formula.
  const TriSet& label(const FormulaPtr& f);
  /// Enclosure per canonical vertex of a Next/Until node (empty optional elsewhere).
  std::vector<std::optional<Interval>> enclosures(const FormulaPtr& f);
  /// Evaluation at a concrete vertex; subformulae below the outermost operator are
  /// taken from their canonical labelling.
  PointVerdict at(const FormulaPtr& f, const VertexAddress& address);

  /// Copy of the grammar where every subformula k (post-order) adds colours `phi<k>`
  /// (holds) and `phi<k>_unknown` on the canonical vertices concerned.
  Grammar coloured(const FormulaPtr& f);

 private:
  struct Node {
    TriSet sat;
    std::vector<std::optional<Interval>> enclosure;
  };
  const Node& node(const FormulaPtr& f);
  Node compute(const Formula& f);
  Node next_node(const Formula& f);
  Node until_node(const Formula& f);
  void check_mode(const Formula& f) const;
  UntilAnalysis& analysis(const CanonSet& phi1, const CanonSet& phi2);

  const GrammarIndex* index_;
  const ProbabilityMap* mu_;
  CheckOptions opts_;
  std::map<const Formula*, Node> cache_;
  std::vector<FormulaPtr> keep_alive_;
  std::map<std::pair<CanonSet, CanonSet>, std::unique_ptr<UntilAnalysis>> analyses_;
};

struct Labelling {
  Grammar grammar;
  std::vector<Verdict> verdicts;  // per canonical vertex
  std::vector<std::optional<Interval>> enclosures;
};

/// Colours the grammar with every subformula and returns the top-level verdicts.
/// Throws Error for a threshold outside {0,1} in qualitative-only mode.
Labelling label_formula(const GrammarIndex& index, const ProbabilityMap& mu, const FormulaPtr& f,
                        const CheckOptions& opts = {});

}  // namespace pregma
