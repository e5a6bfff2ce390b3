#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pregma/rational.hpp"

namespace pregma {

using VertexId = std::uint32_t;
using SymbolId = std::uint32_t;

inline constexpr SymbolId kNoSymbol = static_cast<SymbolId>(-1);

enum class SymbolKind { Nonterminal, Terminal };

struct RankedSymbol {
  std::string name;
  unsigned arity = 0;
  SymbolKind kind = SymbolKind::Terminal;
};

/// `label v1 ... vn`. Arity-1 terminal hyperarcs are colours, arity-2 ones are arcs.
struct Hyperarc {
  SymbolId label = kNoSymbol;
  std::vector<VertexId> vertices;

  friend bool operator==(const Hyperarc&, const Hyperarc&) = default;
  friend auto operator<=>(const Hyperarc&, const Hyperarc&) = default;
};

/// Finite hypergraph. Vertices and hyperarcs keep insertion order; both are sets.
struct Hypergraph {
  std::vector<VertexId> vertices;
  std::vector<Hyperarc> arcs;

  bool has_vertex(VertexId v) const;
  void add_vertex(VertexId v);
  /// Adds the hyperarc (and its vertices). Returns false if it was already present.
  bool add_arc(Hyperarc arc);
};

/// Rewriting rule (H_A, iota_A). Vertices of `rhs` are local ids 0..vertex_names.size()-1.
struct Rule {
  SymbolId lhs = kNoSymbol;
  Hypergraph rhs;
  std::vector<VertexId> iota;
  std::vector<std::string> vertex_names;

  const std::string& name_of(VertexId v) const { return vertex_names.at(v); }
  std::optional<VertexId> find_vertex(std::string_view name) const;
};

/// Deterministic HR-grammar plus the sink declarations used by the probabilistic layer.
struct Grammar {
  std::vector<RankedSymbol> symbols;
  SymbolId axiom = kNoSymbol;
  std::vector<Rule> rules;
  /// Zero out-degree vertices carrying one of these colours get an implicit
  /// probability-1 self-loop.
  std::set<SymbolId> absorbing_colours;
  /// Same, for every zero out-degree vertex.
  bool absorbing_sinks = false;

  std::optional<SymbolId> find_symbol(std::string_view name) const;
  /// Throws Error for unknown names.
  SymbolId symbol(std::string_view name) const;
  const RankedSymbol& info(SymbolId s) const { return symbols.at(s); }
  const std::string& name(SymbolId s) const { return symbols.at(s).name; }

  bool is_nonterminal(SymbolId s) const;
  bool is_colour(SymbolId s) const;
  bool is_arc_label(SymbolId s) const;

  std::vector<SymbolId> nonterminals() const;
  std::vector<SymbolId> colours() const;
  std::vector<SymbolId> arc_labels() const;

  /// First rule whose lhs is `nonterminal`; throws Error if there is none.
  const Rule& rule(SymbolId nonterminal) const;
  Rule& rule(SymbolId nonterminal);

  SymbolId add_symbol(std::string name, unsigned arity, SymbolKind kind);
};

// ---------------------------------------------------------------------------
// Structural validation

struct StructuralError {
  enum class Kind {
    DuplicateSymbol,
    TerminalArity,
    MissingAxiom,
    AxiomArity,
    DuplicateRule,
    MissingRule,
    RuleForTerminal,
    IotaArity,
    NonInjectiveIota,
    UnknownVertex,
    UndeclaredLabel,
    ArityMismatch,
    DuplicateHyperarc,
  };
  Kind kind;
  std::string location;
  std::string message;

  /// `Kind(location)`, e.g. `DuplicateRule(A)`.
  std::string to_string() const;
};

std::string_view kind_name(StructuralError::Kind kind);

std::vector<StructuralError> validate_grammar(const Grammar& g);

// ---------------------------------------------------------------------------
// Rewriting

/// Deterministic fresh-vertex counter.
class IdSupplier {
 public:
  explicit IdSupplier(VertexId start = 0, VertexId stride = 1) : next_(start), stride_(stride) {}
  VertexId next() {
    VertexId v = next_;
    next_ += stride_;
    return v;
  }
  /// Never hand out ids at or below `v` again.
  void skip_past(VertexId v) {
    while (next_ <= v) next_ += stride_;
  }

 private:
  VertexId next_;
  VertexId stride_;
};

/// Replaces hyperarc `target` of `m` by a fresh copy of `rule.rhs` glued along iota.
/// Throws Error when `target` is out of range or not labelled `rule.lhs`.
Hypergraph rewrite_one(const Hypergraph& m, std::size_t target, const Rule& rule, IdSupplier& fresh);

/// Complete parallel rewriting: every nonterminal hyperarc replaced simultaneously.
Hypergraph parallel_rewrite(const Hypergraph& m, const Grammar& g, IdSupplier& fresh);

/// Canonical image of a generated vertex: the non-input vertex of H_context it copies.
/// Whether it is interior or an attachment (B,i)_A is derived through GrammarIndex.
struct CanonicalVertex {
  SymbolId context = kNoSymbol;
  VertexId vertex = 0;

  friend bool operator==(const CanonicalVertex&, const CanonicalVertex&) = default;
  friend auto operator<=>(const CanonicalVertex&, const CanonicalVertex&) = default;
};

/// Position of a generated vertex: the chain of hyperarc indices followed from the
/// axiom rule down to the rule instance that created it, plus the local vertex there.
struct VertexAddress {
  std::vector<std::uint32_t> path;
  VertexId vertex = 0;

  friend bool operator==(const VertexAddress&, const VertexAddress&) = default;
  friend auto operator<=>(const VertexAddress&, const VertexAddress&) = default;
};

struct ConcreteVertex {
  VertexId id = 0;
  unsigned level = 0;
  CanonicalVertex canonical;
  VertexAddress address;
};

struct Expansion {
  Hypergraph graph;
  std::map<VertexId, ConcreteVertex> vertices;
  /// Instance path of every remaining nonterminal hyperarc, keyed by index in graph.arcs.
  std::map<std::size_t, std::vector<std::uint32_t>> pending;
  std::map<VertexAddress, VertexId> by_address;

  /// Vertex created at `address`; throws Error if it is not materialized.
  VertexId vertex_at(const VertexAddress& address) const;
  /// Vertices lying on a remaining nonterminal hyperarc (their out-arcs may be incomplete).
  std::set<VertexId> frontier() const;
};

/// H_depth: the axiom rule rhs rewritten `depth` times, with Lev/Can annotations.
Expansion expand(const Grammar& g, unsigned depth, IdSupplier& fresh);
Expansion expand(const Grammar& g, unsigned depth);

/// Nonterminal labels occurring in H_a. Throws Error for unknown/terminal `a`.
std::set<SymbolId> succ_nonterminals(const Grammar& g, SymbolId a);

// ---------------------------------------------------------------------------
// Static index over the rules: inputs, attachments, canonical vertices.

struct Attachment {
  std::size_t hyperarc = 0;  // index into rule.rhs.arcs
  unsigned position = 0;     // 1-based
  friend bool operator==(const Attachment&, const Attachment&) = default;
};

/// One terminal out-arc of a canonical vertex, resolved relative to its context A.
struct Successor {
  enum class Kind {
    Same,    // another vertex created in the same instance of H_A
    Parent,  // iota_A(position): a vertex of the parent instance
    Child,   // a vertex created in the copy of H_B glued on hyperarc `hyperarc`
  };
  Kind kind = Kind::Same;
  VertexId vertex = 0;      // Same: vertex of H_A; Child: vertex of H_B
  unsigned position = 0;    // Parent
  std::size_t hyperarc = 0; // Child

  friend bool operator==(const Successor&, const Successor&) = default;
  friend auto operator<=>(const Successor&, const Successor&) = default;
};

struct OutArc {
  SymbolId label = kNoSymbol;
  Successor target;
};

class GrammarIndex {
 public:
  explicit GrammarIndex(const Grammar& g);

  const Grammar& grammar() const { return *g_; }
  const Rule& rule(SymbolId a) const { return g_->rule(a); }

  /// 1-based position of `u` in iota_A, if `u` is an input.
  std::optional<unsigned> input_position(SymbolId a, VertexId u) const;
  /// Every (hyperarc, position) of a nonterminal hyperarc of H_A containing `u`.
  const std::vector<Attachment>& attachments(SymbolId a, VertexId u) const;
  /// Indices of nonterminal hyperarcs of H_A.
  const std::vector<std::size_t>& nonterminal_arcs(SymbolId a) const;
  /// Nonterminals reachable from the axiom through Succ, in BFS order (axiom first).
  const std::vector<SymbolId>& reachable() const { return reachable_; }
  bool is_reachable(SymbolId a) const;

  /// Non-input vertices of every rule rhs (reachable contexts first).
  const std::vector<CanonicalVertex>& canonical_vertices() const { return canonical_; }
  std::size_t canonical_index(const CanonicalVertex& c) const;
  bool is_attachment(const CanonicalVertex& c) const;
  /// First attachment of an attachment vertex; throws for interior vertices.
  Attachment attachment_of(const CanonicalVertex& c) const;

  /// Colours of every concrete vertex with this canonical image.
  const std::set<SymbolId>& colours(const CanonicalVertex& c) const;
  /// Terminal out-arcs (colours excluded) of every concrete vertex with this canonical image.
  const std::vector<OutArc>& out_arcs(const CanonicalVertex& c) const;
  /// True when the vertex has no out-arc and is declared absorbing.
  bool absorbing(const CanonicalVertex& c) const;

  /// `A:v` for interior vertices, `B,i@A` for attachments (`B#h,i@A` when B labels
  /// several hyperarcs of H_A).
  std::string describe(const CanonicalVertex& c) const;
  /// Sites where `a` is instantiated: (context X, hyperarc index in H_X), reachable X only.
  const std::vector<std::pair<SymbolId, std::size_t>>& sites(SymbolId a) const;

  /// Canonical image of a concrete address (inputs resolved to the parent instance).
  CanonicalVertex canonical_of(const VertexAddress& address) const;
  /// Rewrites an address naming an input vertex into the parent's address of that vertex.
  VertexAddress normalize(const VertexAddress& address) const;
  /// Nonterminal whose rule instance an address path denotes.
  SymbolId context_of(const std::vector<std::uint32_t>& path) const;

 private:
  struct RuleInfo {
    std::vector<std::optional<unsigned>> input_pos;
    std::vector<std::vector<Attachment>> attach;
    std::vector<std::size_t> nonterminal_arcs;
  };
  const RuleInfo& info(SymbolId a) const;

  const Grammar* g_;
  std::map<SymbolId, RuleInfo> rules_;
  std::vector<SymbolId> reachable_;
  std::vector<CanonicalVertex> canonical_;
  std::map<CanonicalVertex, std::size_t> canonical_pos_;
  std::vector<std::set<SymbolId>> colours_;
  std::vector<std::vector<OutArc>> out_arcs_;
  std::map<SymbolId, std::vector<std::pair<SymbolId, std::size_t>>> sites_;
};

/// Parses an address written `h1.h2.h3/vertex` (path of hyperarc indices, then a vertex
/// name of the innermost rule) or just `vertex` for the axiom rule.
VertexAddress parse_address(const GrammarIndex& index, std::string_view text);
std::string format_address(const GrammarIndex& index, const VertexAddress& address);

}  // namespace pregma
