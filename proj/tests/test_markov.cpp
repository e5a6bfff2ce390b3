#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "pregma/fragment.hpp"
#include "support.hpp"

namespace pregma {
namespace {

using testing::load_corpus;

struct RunningQuery {
  GrammarFile file = load_corpus("running.gg");
  SymbolId v1 = file.grammar.symbol("V1");
  SymbolId v2 = file.grammar.symbol("V2");

  PathQuery query(const FiniteMC& mc, unsigned horizon) const {
    return {mc.with_any({v1}), mc.with_any({v2}), horizon};
  }
};

// Independent recursion on the one-step until recurrence, memoized per (state, steps).
Rational recurrence(const FiniteMC& mc, const PathQuery& q, std::size_t s, unsigned k,
                    std::map<std::pair<std::size_t, unsigned>, Rational>& memo) {
  if (q.phi2[s]) return 1;
  if (!q.phi1[s] || k == 0) return 0;
  if (auto it = memo.find({s, k}); it != memo.end()) return it->second;
  Rational sum = 0;
  for (const auto& [to, p] : mc.succ[s]) sum += p * recurrence(mc, q, to, k - 1, memo);
  memo[{s, k}] = sum;
  return sum;
}

// Sum over accepting paths, enumerated one by one.
Rational enumerate_paths(const FiniteMC& mc, const PathQuery& q, std::size_t s, unsigned k, const Rational& weight) {
  if (q.phi2[s]) return weight;
  if (!q.phi1[s] || k == 0) return 0;
  Rational sum = 0;
  for (const auto& [to, p] : mc.succ[s]) sum += enumerate_paths(mc, q, to, k - 1, weight * p);
  return sum;
}

// Chain explored around the entry's start vertex, and that vertex's state.
std::pair<FiniteMC, std::size_t> around(const testing::CorpusEntry& e, unsigned radius) {
  const GrammarIndex index(e.file.grammar);
  const VertexAddress start = parse_address(index, e.start);
  FiniteMC mc = explore(index, e.file.mu, start, radius);
  const std::size_t s = mc.state_at(index.normalize(start));
  return {std::move(mc), s};
}

TEST(Truncate, RunningExampleSize) {
  const RunningQuery r;
  for (unsigned depth : {0u, 1u, 5u, 12u}) {
    const FiniteMC mc = truncate(r.file.grammar, r.file.mu, depth);
    EXPECT_EQ(mc.size(), 2 + 4 * depth);
    std::size_t frontier = 0;
    for (std::size_t s = 0; s < mc.size(); ++s) frontier += mc.frontier[s];
    EXPECT_EQ(frontier, 2u);  // the two vertices on the pending hyperarc
  }
}

TEST(Explore, NonFrontierRowsAreStochastic) {
  for (const auto& e : testing::corpus_entries()) {
    const FiniteMC mc = around(e, 6).first;
    for (std::size_t s = 0; s < mc.size(); ++s) {
      if (mc.frontier[s]) continue;
      Rational sum = 0;
      for (const auto& [to, p] : mc.succ[s]) sum += p;
      EXPECT_EQ(sum, Rational(1)) << e.name << " state " << s;
    }
  }
}

TEST(BoundedUntil, TrivialCases) {
  const RunningQuery r;
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 6);
  for (std::size_t s = 0; s < mc.size(); ++s) {
    if (mc.frontier[s]) continue;
    EXPECT_EQ(bounded_until(mc, {mc.all(), mc.all(), 7}, s), Rational(1));
    EXPECT_EQ(bounded_until(mc, {mc.none(), mc.none(), 7}, s), Rational(0));
  }
}

// v0 -a-> r -a-> q -a-> ap is the only accepting path of length 3 (1/8); the next one,
// v0 -> r -> r' -> q' -> ap', adds 1/16.
TEST(BoundedUntil, RunningExampleShortHorizons) {
  const RunningQuery r;
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 8);
  const GrammarIndex index(r.file.grammar);
  const std::size_t v0 = mc.state_at(parse_address(index, "v0"));
  EXPECT_EQ(bounded_until(mc, r.query(mc, 2), v0), Rational(0));
  EXPECT_EQ(bounded_until(mc, r.query(mc, 3), v0), Rational(1, 8));
  EXPECT_EQ(bounded_until(mc, r.query(mc, 4), v0), Rational(3, 16));
  EXPECT_EQ(bounded_until(mc, r.query(mc, 3), v0), enumerate_paths(mc, r.query(mc, 3), v0, 3, 1));
}

TEST(BoundedUntil, AgreesWithRecurrenceAndIsMonotone) {
  for (const auto& e : testing::corpus_entries()) {
    const auto [mc, from] = around(e, 8);
    for (const auto& c1 : e.colours)
      for (const auto& c2 : e.colours) {
        PathQuery q{mc.with_any({e.file.grammar.symbol(c1)}), mc.with_any({e.file.grammar.symbol(c2)}), 0};
        std::map<std::pair<std::size_t, unsigned>, Rational> memo;
        Rational previous = -1;
        for (unsigned k = 0; k <= 8; ++k) {
          q.horizon = k;
          const Rational value = bounded_until(mc, q, from);
          EXPECT_EQ(value, recurrence(mc, q, from, k, memo)) << e.name << " " << c1 << " U " << c2;
          EXPECT_GE(value, previous);
          EXPECT_LE(value, Rational(1));
          previous = value;
        }
      }
  }
}

TEST(BoundedUntil, RefusesToLeaveTheFrontier) {
  const RunningQuery r;
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 3);
  const GrammarIndex index(r.file.grammar);
  const std::size_t v0 = mc.state_at(parse_address(index, "v0"));
  EXPECT_NO_THROW(bounded_until(mc, r.query(mc, 3), v0));
  EXPECT_THROW(bounded_until(mc, {mc.all(), mc.none(), 40}, v0), Error);
}

TEST(Explore, MatchesTruncation) {
  for (const auto& e : testing::corpus_entries()) {
    if (e.name == "ex23_prob.pds" || e.name == "pcp_solvable_2.pcp") continue;  // truncations too wide
    const GrammarIndex index(e.file.grammar);
    const FiniteMC deep = truncate(e.file.grammar, e.file.mu, 10);
    const auto [local, start] = around(e, 6);
    const std::size_t from = deep.state_at(local.states[start].address);
    for (const auto& c1 : e.colours)
      for (const auto& c2 : e.colours) {
        const auto a = e.file.grammar.symbol(c1), b = e.file.grammar.symbol(c2);
        for (unsigned k : {0u, 3u, 6u}) {
          const Rational x = bounded_until(local, {local.with_any({a}), local.with_any({b}), k}, start);
          const Rational y = bounded_until(deep, {deep.with_any({a}), deep.with_any({b}), k}, from);
          EXPECT_EQ(x, y) << e.name << " " << c1 << " U " << c2 << " k=" << k;
        }
      }
  }
}

// tt U red from a blue vertex: red vertices need no successors.
TEST(Explore, OpenSetStopsExpansion) {
  const GrammarFile f = load_corpus("branch.gg");
  const GrammarIndex index(f.grammar);
  const auto from = parse_address(index, "0/b");
  const CanonSet red = canon_with_any(index, {f.grammar.symbol("red")});
  std::vector<bool> open(red.size());
  for (std::size_t i = 0; i < open.size(); ++i) open[i] = !red[i];
  const FiniteMC full = explore(index, f.mu, from, 12);
  const FiniteMC pruned = explore(index, f.mu, from, 12, &open);
  EXPECT_LT(pruned.size(), full.size());
  for (unsigned k : {5u, 10u, 12u}) {
    const PathQuery a{pruned.all(), pruned.with_any({f.grammar.symbol("red")}), k};
    const PathQuery b{full.all(), full.with_any({f.grammar.symbol("red")}), k};
    EXPECT_EQ(bounded_until(pruned, a, pruned.state_at(from)), bounded_until(full, b, full.state_at(from)));
  }
}

TEST(Next, OneStepProbabilities) {
  const RunningQuery r;
  const GrammarIndex index(r.file.grammar);
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 4);
  const std::size_t q = mc.state_at(parse_address(index, "0/q"));
  EXPECT_EQ(next_probability(mc, mc.with_any({r.v2}), q), Rational(1, 2));
  EXPECT_EQ(next_probability(mc, mc.with_any({r.file.grammar.symbol("nV1")}), q), Rational(1, 4));
  EXPECT_EQ(next_probability(mc, mc.all(), q), Rational(1));
  std::size_t frontier = 0;
  while (!mc.frontier[frontier]) ++frontier;
  EXPECT_THROW(next_probability(mc, mc.all(), frontier), Error);
}

TEST(Random, SplitMixReferenceStream) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
  SplitMix64 u(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_EQ(worker_seed(9, 0), 9u);
  EXPECT_NE(worker_seed(9, 1), worker_seed(9, 2));
}

TEST(Sampling, TrivialQueries) {
  const RunningQuery r;
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 10);
  const auto all = sample_until(mc, {mc.all(), mc.all(), 5}, 0, 500, 1);
  EXPECT_EQ(all.hits, 500u);
  const auto none = sample_until(mc, {mc.none(), mc.none(), 5}, 0, 500, 1);
  EXPECT_EQ(none.hits, 0u);
  EXPECT_EQ(none.escapes, 0u);
  EXPECT_THROW(sample_until(mc, {mc.all(), mc.all(), 5}, 0, 0, 1), Error);
}

TEST(Sampling, DeterministicPerSeedAndWorkers) {
  const RunningQuery r;
  const GrammarIndex index(r.file.grammar);
  const FiniteMC mc = truncate(r.file.grammar, r.file.mu, 30);
  const auto q = r.query(mc, 25);
  const std::size_t v0 = mc.state_at(parse_address(index, "v0"));
  const auto a = sample_until(mc, q, v0, 20000, 5), b = sample_until(mc, q, v0, 20000, 5);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.escapes, b.escapes);
  const auto c = sample_until(mc, q, v0, 20000, 5, 4), d = sample_until(mc, q, v0, 20000, 5, 4);
  EXPECT_EQ(c.hits, d.hits);
  EXPECT_EQ(c.n, 20000u);
  EXPECT_NE(a.hits, sample_until(mc, q, v0, 20000, 6).hits);
}

// The estimate lands within four standard deviations of the exact bounded value.
TEST(Sampling, EstimateMatchesExactValue) {
  for (const auto& e : testing::corpus_entries()) {
    const auto [mc, from] = around(e, 8);
    const auto& g = e.file.grammar;
    for (const auto& colour : e.colours) {
      const PathQuery q{mc.all(), mc.with_any({g.symbol(colour)}), 6};
      const double p = bounded_until(mc, q, from).get_d();
      const std::uint64_t n = 20000;
      const auto res = sample_until(mc, q, from, n, 1234, 2);
      EXPECT_EQ(res.escapes, 0u) << e.name;
      const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
      EXPECT_NEAR(static_cast<double>(res.hits) / n, p, 4 * sigma + 1e-9) << e.name << " " << colour;
    }
  }
}

}  // namespace
}  // namespace pregma
