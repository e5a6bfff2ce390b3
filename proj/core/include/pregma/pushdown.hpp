#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pregma/grammar_io.hpp"

namespace pregma {

/// Stack word, bottom first; the control state is the last symbol.
using Word = std::vector<std::string>;

std::string word_text(const Word& w);

/// lhs -label-> rhs, applied to suffixes of configurations.
struct SuffixRule {
  Word lhs;
  std::string label;
  Word rhs;
};

struct PushdownSystem {
  std::vector<std::string> stack;
  std::vector<std::string> states;
  std::vector<SuffixRule> rules;
  std::map<std::string, Rational> mu;
  std::optional<Word> start;
  /// Configurations without a rule become absorbing sinks.
  bool absorbing = false;

  bool is_stack(std::string_view s) const;
  bool is_state(std::string_view s) const;
  /// Arc labels in order of first use.
  std::vector<std::string> labels() const;
};

/// Text format, one directive per line (`#` starts a comment):
///
///     stack A B
///     states r r' p
///     rule r a Br'
///     prob a 1/2
///     start r
///     absorbing
///
/// Words are split by longest match against the declared symbols and must be a
/// (possibly empty) stack word followed by one state.
PushdownSystem parse_pds(std::string_view text);
PushdownSystem load_pds(const std::string& path);
Word parse_word(const PushdownSystem& p, std::string_view text);

enum class PdsConstruction {
  /// One rule over the strict suffixes of the rule sides. Small, not complete outside.
  Figure,
  /// Height windows: X instances cover every configuration whose length above the
  /// instance prefix lies in a fixed band. Complete outside, so every engine accepts it.
  CompleteOutside,
};

/// Grammar generating the configuration graph. Vertex names are configuration words,
/// relative to the instance prefix; every vertex is coloured `st_<state>`.
GrammarFile to_grammar(const PushdownSystem& p, PdsConstruction construction = PdsConstruction::Figure);

/// Configuration word of a generated vertex of a to_grammar result.
std::string configuration_word(const GrammarIndex& index, const VertexAddress& address);

/// Directed graph with named vertices and labelled arcs (from, label, to).
struct LabelledGraph {
  std::set<std::string> vertices;
  std::set<std::tuple<std::string, std::string, std::string>> arcs;

  friend bool operator==(const LabelledGraph&, const LabelledGraph&) = default;
};

/// Configurations of at most `max_length` symbols and the rule steps between them,
/// built by direct suffix rewriting.
LabelledGraph configuration_graph(const PushdownSystem& p, std::size_t max_length);
/// Expansion read back as configurations (binary terminal arcs only).
LabelledGraph expansion_graph(const GrammarIndex& index, const Expansion& ex);
/// Subgraph induced by the vertices `keep` accepts.
template <typename Pred>
LabelledGraph induced(const LabelledGraph& g, Pred keep) {
  LabelledGraph out;
  for (const auto& v : g.vertices)
    if (keep(v)) out.vertices.insert(v);
  for (const auto& a : g.arcs)
    if (out.vertices.count(std::get<0>(a)) && out.vertices.count(std::get<2>(a))) out.arcs.insert(a);
  return out;
}
/// Weakly connected component of `start`.
LabelledGraph component(const LabelledGraph& g, const std::string& start);
/// Sorted `from -label-> to` lines; equal strings mean equal graphs under the
/// configuration naming.
std::string canonical_form(const LabelledGraph& g);

/// Sub-hypergraph of expand(g, depth) induced by the vertices joined to the axiom
/// vertex `start` by binary terminal arcs, in either direction.
Hypergraph reachable_component(const Grammar& g, const std::string& start, unsigned depth);

}  // namespace pregma
