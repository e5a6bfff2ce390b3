#include <gtest/gtest.h>

#include "oracles.hpp"

namespace pregma {
namespace {

TEST(PdsText, ParsesDirectivesAndWords) {
  const PushdownSystem p = load_pds(testing::corpus("ex23.pds"));
  EXPECT_EQ(p.stack, (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(p.states, (std::vector<std::string>{"r", "r'", "p"}));
  ASSERT_EQ(p.rules.size(), 4u);
  EXPECT_EQ(p.rules[0].rhs, (Word{"B", "r'"}));
  EXPECT_EQ(p.rules[3].lhs, (Word{"B", "A", "p"}));
  EXPECT_TRUE(p.absorbing);
  ASSERT_TRUE(p.start);
  EXPECT_EQ(*p.start, Word{"r"});
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(parse_word(p, "BAr'"), (Word{"B", "A", "r'"}));
  EXPECT_EQ(word_text(parse_word(p, "ABr")), "ABr");
  EXPECT_THROW(parse_word(p, "AB"), Error);
  EXPECT_THROW(parse_word(p, "rA"), Error);
  EXPECT_THROW(parse_word(p, "Cr"), Error);
  EXPECT_THROW(parse_pds("stack A\nstates p\nrule p a Aq\n"), Error);
  EXPECT_THROW(parse_pds("stack A\nstates p\nfrobnicate\n"), Error);
}

using testing::all_words;
using testing::up_to;

std::string oracle(const PushdownSystem& p, const Word& start, std::size_t max, bool whole) {
  return testing::suffix_oracle(p, start, max, whole);
}

TEST(FigureConstruction, ComponentOfStartMatchesSuffixRewriting) {
  const PushdownSystem p = load_pds(testing::corpus("ex23.pds"));
  const GrammarFile f = to_grammar(p, PdsConstruction::Figure);
  const GrammarIndex index(f.grammar);
  const LabelledGraph generated = expansion_graph(index, expand(f.grammar, 5));
  const std::string got = canonical_form(component(up_to(p, generated, 5), "r"));
  EXPECT_EQ(got, oracle(p, Word{"r"}, 5, false));
  EXPECT_EQ(got, canonical_form(component(configuration_graph(p, 5), "r")));
  EXPECT_NE(got.find("r -a-> Br'"), std::string::npos) << got;
}

TEST(FigureConstruction, ReachableComponentHypergraph) {
  const PushdownSystem p = load_pds(testing::corpus("ex23.pds"));
  const GrammarFile f = to_grammar(p, PdsConstruction::Figure);
  const Hypergraph h = reachable_component(f.grammar, "r", 4);
  EXPECT_FALSE(h.vertices.empty());
  for (const Hyperarc& a : h.arcs) EXPECT_TRUE(f.grammar.is_arc_label(a.label) || f.grammar.is_colour(a.label));
}

TEST(WindowConstruction, MatchesEveryConfigurationUpToLengthSix) {
  const PushdownSystem p = load_pds(testing::corpus("ex23_prob.pds"));
  const GrammarFile f = to_grammar(p, PdsConstruction::CompleteOutside);
  EXPECT_TRUE(check_complete_outside(f.grammar).empty());
  const GrammarIndex index(f.grammar);
  const LabelledGraph generated = expansion_graph(index, expand(f.grammar, 3));
  EXPECT_EQ(canonical_form(up_to(p, generated, 6)), oracle(p, Word{"r"}, 6, true));
}

TEST(WindowConstruction, RandomSystemsMatchSuffixRewriting) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const PushdownSystem p = testing::random_pds(seed);
    const GrammarFile f = to_grammar(p, PdsConstruction::CompleteOutside);
    EXPECT_TRUE(phr_check(f.grammar, f.mu).empty()) << "seed " << seed;
    const GrammarIndex index(f.grammar);
    const LabelledGraph generated = expansion_graph(index, expand(f.grammar, 3));
    EXPECT_EQ(canonical_form(up_to(p, generated, 5)), oracle(p, Word{"A", "p"}, 5, true)) << "seed " << seed;
  }
}

TEST(WindowConstruction, ConfigurationWordsAreStateColoured) {
  const PushdownSystem p = load_pds(testing::corpus("ex23_prob.pds"));
  const GrammarFile f = to_grammar(p, PdsConstruction::CompleteOutside);
  const GrammarIndex index(f.grammar);
  const Expansion ex = expand(f.grammar, 2);
  for (const auto& [id, v] : ex.vertices) {
    const Word w = parse_word(p, configuration_word(index, v.address));
    EXPECT_TRUE(index.colours(v.canonical).count(f.grammar.symbol("st_" + w.back())));
  }
}

}  // namespace
}  // namespace pregma
