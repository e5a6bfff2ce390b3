#include <gtest/gtest.h>

#include <algorithm>

#include "pregma/grammar_io.hpp"
#include "support.hpp"

namespace pregma {
namespace {

using testing::corpus_entries;
using testing::load_corpus;

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  if (at != std::string::npos) text.replace(at, from.size(), to);
  return text;
}

TEST(GrammarText, RunningExampleShape) {
  const GrammarFile f = load_corpus("running.gg");
  const Grammar& g = f.grammar;
  EXPECT_EQ(g.name(g.axiom), "Z");
  const SymbolId a = g.symbol("A");
  EXPECT_TRUE(g.is_nonterminal(a));
  EXPECT_EQ(g.info(a).arity, 2u);
  EXPECT_TRUE(g.is_arc_label(g.symbol("a")));
  EXPECT_TRUE(g.is_colour(g.symbol("V2")));
  EXPECT_EQ(f.mu.at(g.symbol("a")), Rational(1, 2));
  EXPECT_EQ(f.mu.at(g.symbol("d")), Rational(1, 4));
  const Rule& r = g.rule(a);
  ASSERT_EQ(r.iota.size(), 2u);
  EXPECT_EQ(r.name_of(r.iota[0]), "s");
  EXPECT_EQ(r.name_of(r.iota[1]), "t");
  EXPECT_TRUE(validate_grammar(g).empty());
  EXPECT_EQ(succ_nonterminals(g, g.axiom), std::set<SymbolId>{a});
  EXPECT_EQ(succ_nonterminals(g, a), std::set<SymbolId>{a});
}

TEST(GrammarText, DefaultColourAndAxiomVertexColours) {
  const GrammarFile f = load_corpus("running.gg");
  const GrammarIndex index(f.grammar);
  const Grammar& g = f.grammar;
  const auto v0 = index.canonical_of(parse_address(index, "v0"));
  EXPECT_TRUE(index.colours(v0).count(g.symbol("V1")));
  EXPECT_TRUE(index.colours(v0).count(g.symbol("v0")));
  const CanonicalVertex n{g.symbol("A"), *g.rule(g.symbol("A")).find_vertex("n")};
  EXPECT_TRUE(index.colours(n).count(g.symbol("nV1")));
  EXPECT_FALSE(index.colours(n).count(g.symbol("V1")));
}

TEST(GrammarText, RoundTripIsStable) {
  std::vector<GrammarFile> files;
  for (auto& e : corpus_entries()) files.push_back(std::move(e.file));
  for (const char* pcp : {"pcp_solvable_1.pcp", "pcp_unsolvable_3.pcp"}) files.push_back(testing::pcp_grammar(pcp));
  files.push_back(to_grammar(load_pds(testing::corpus("ex23.pds")), PdsConstruction::Figure));
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    files.push_back(to_grammar(testing::random_pds(seed), PdsConstruction::CompleteOutside));
  // Parsing adds the axiom-vertex colours once; from then on the text is a fixpoint.
  for (const GrammarFile& f : files) {
    const GrammarFile first = parse_grammar(serialize_grammar(f.grammar, f.mu));
    const std::string once = serialize_grammar(first.grammar, first.mu);
    const GrammarFile back = parse_grammar(once);
    EXPECT_EQ(serialize_grammar(back.grammar, back.mu), once);
    EXPECT_EQ(back.grammar.rules.size(), f.grammar.rules.size());
    EXPECT_EQ(back.mu, f.mu);
  }
}

TEST(GrammarText, ErrorsCarryLineNumbers) {
  const std::string good = read_file(testing::corpus("running.gg"));
  try {
    parse_grammar(replace(good, "prob d 1/4", "prob d 1/0"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 12"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_grammar(replace(good, "terminal a 2", "terminal a")), Error);
  EXPECT_THROW(parse_grammar(replace(good, "axiom Z", "frobnicate Z")), Error);
}

TEST(Structure, ValidateReportsEachKind) {
  const std::string good = read_file(testing::corpus("running.gg"));
  auto kinds = [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& e : validate_grammar(parse_grammar(text).grammar)) out.emplace_back(kind_name(e.kind));
    return out;
  };
  auto has = [&](const std::string& text, const std::string& kind) {
    const auto ks = kinds(text);
    return std::find(ks.begin(), ks.end(), kind) != ks.end();
  };
  EXPECT_TRUE(kinds(good).empty());
  EXPECT_THROW(parse_grammar(replace(good, "  hyperarc A r q", "  hyperarc A r")), Error);
  EXPECT_TRUE(has(replace(good, "rule A inputs s t", "rule A inputs s"), "IotaArity"));
  EXPECT_TRUE(has(replace(good, "rule A inputs s t", "rule A inputs s s"), "NonInjectiveIota"));
  EXPECT_TRUE(has(replace(good, "axiom Z", "axiom A"), "AxiomArity"));

  // Mutations the text parser would refuse.
  GrammarFile f = parse_grammar(good);
  Rule& a = f.grammar.rule(f.grammar.symbol("A"));
  for (Hyperarc& h : a.rhs.arcs)
    if (f.grammar.is_nonterminal(h.label)) h.vertices.pop_back();
  auto errors = validate_grammar(f.grammar);
  ASSERT_FALSE(errors.empty());
  EXPECT_EQ(errors.front().kind, StructuralError::Kind::ArityMismatch);

  f = parse_grammar(good);
  f.grammar.rules.push_back(f.grammar.rule(f.grammar.symbol("A")));
  errors = validate_grammar(f.grammar);
  ASSERT_FALSE(errors.empty());
  EXPECT_EQ(errors.front().kind, StructuralError::Kind::DuplicateRule);
  EXPECT_EQ(errors.front().to_string().rfind("DuplicateRule(", 0), 0u);
}

TEST(Structure, CompleteOutsideViolations) {
  const std::string good = read_file(testing::corpus("running.gg"));
  EXPECT_TRUE(check_complete_outside(parse_grammar(good).grammar).empty());
  // An input that also lies on the nonterminal hyperarc.
  const auto bad = check_complete_outside(parse_grammar(replace(good, "hyperarc A r q", "hyperarc A s q")).grammar);
  ASSERT_FALSE(bad.empty());
  EXPECT_EQ(bad.front().kind, CompleteOutsideViolation::Kind::InputIsOutput);
}

// Vertex and arc counts of the running example grow by one rule copy per step.
TEST(Expansion, RunningExampleGrowsLinearly) {
  const GrammarFile f = load_corpus("running.gg");
  const Grammar& g = f.grammar;
  for (unsigned depth = 0; depth <= 8; ++depth) {
    const Expansion ex = expand(g, depth);
    EXPECT_EQ(ex.graph.vertices.size(), 2 + 4 * depth);
    std::size_t arcs = 0, pending = 0;
    for (const Hyperarc& h : ex.graph.arcs) {
      if (g.is_arc_label(h.label)) ++arcs;
      if (g.is_nonterminal(h.label)) ++pending;
    }
    EXPECT_EQ(arcs, 5u * depth);
    EXPECT_EQ(pending, 1u);
    EXPECT_EQ(ex.pending.size(), 1u);
    for (const auto& [id, v] : ex.vertices) EXPECT_LE(v.level, depth);
  }
}

TEST(Expansion, IsDeterministic) {
  const GrammarFile f = load_corpus("branch.gg");
  const Expansion a = expand(f.grammar, 5), b = expand(f.grammar, 5);
  EXPECT_EQ(a.graph.vertices, b.graph.vertices);
  EXPECT_EQ(a.graph.arcs, b.graph.arcs);
}

// Every realized vertex: address text round-trips, the canonical image recorded by the
// expansion agrees with the static index, and the level equals the path length.
TEST(Expansion, AnnotationsAgreeWithIndex) {
  for (const auto& e : corpus_entries()) {
    const GrammarIndex index(e.file.grammar);
    const Expansion ex = expand(e.file.grammar, 4);
    for (const auto& [id, v] : ex.vertices) {
      EXPECT_EQ(index.canonical_of(v.address), v.canonical) << e.name;
      EXPECT_EQ(v.address.path.size(), v.level) << e.name;
      const std::string text = format_address(index, v.address);
      EXPECT_EQ(parse_address(index, text), v.address) << e.name << " " << text;
      EXPECT_EQ(ex.vertex_at(v.address), id);
    }
  }
}

// Terminal out-arcs of a realized, non-frontier vertex are exactly the canonical out-arcs.
TEST(Expansion, OutDegreeMatchesCanonicalArcs) {
  for (const auto& e : corpus_entries()) {
    const Grammar& g = e.file.grammar;
    const GrammarIndex index(g);
    const Expansion ex = expand(g, 5);
    const auto frontier = ex.frontier();
    std::map<VertexId, std::size_t> degree;
    for (const Hyperarc& h : ex.graph.arcs)
      if (g.is_arc_label(h.label)) ++degree[h.vertices[0]];
    for (const auto& [id, v] : ex.vertices) {
      if (frontier.count(id)) continue;
      EXPECT_EQ(degree[id], index.out_arcs(v.canonical).size()) << e.name << " " << index.describe(v.canonical);
    }
  }
}

TEST(Index, DescribesRunningExampleVertices) {
  const GrammarFile f = load_corpus("running.gg");
  const GrammarIndex index(f.grammar);
  std::vector<std::string> names;
  for (const auto& c : index.canonical_vertices()) names.push_back(index.describe(c));
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"A,1@A", "A,1@Z", "A,2@A", "A,2@Z", "A:ap", "A:n"}));
  const auto r = index.canonical_of(parse_address(index, "0/r"));
  EXPECT_TRUE(index.is_attachment(r));
  EXPECT_EQ(index.attachment_of(r).position, 1u);
}

TEST(Index, NormalizeMovesInputsToTheirOwner) {
  const GrammarFile f = load_corpus("running.gg");
  const GrammarIndex index(f.grammar);
  // Input s of the first A copy is v0 of the axiom rule.
  VertexAddress a = parse_address(index, "0/r");
  a.vertex = *f.grammar.rule(f.grammar.symbol("A")).find_vertex("s");
  EXPECT_EQ(index.normalize(a), parse_address(index, "v0"));
}

}  // namespace
}  // namespace pregma
