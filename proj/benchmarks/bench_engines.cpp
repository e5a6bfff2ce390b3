#include <benchmark/benchmark.h>

#include "pregma/markov.hpp"
#include "pregma/grammar_io.hpp"
#include "pregma/pcp.hpp"
#include "pregma/pushdown.hpp"

namespace pregma {
namespace {

std::string corpus(const std::string& name) { return std::string(PREGMA_CORPUS_DIR) + "/" + name; }

const GrammarFile& running() {
  static const GrammarFile f = load_grammar(corpus("running.gg"));
  return f;
}

void BM_PhrCheck(benchmark::State& state) {
  const GrammarFile& f = running();
  for (auto _ : state) benchmark::DoNotOptimize(phr_check(f.grammar, f.mu));
}
BENCHMARK(BM_PhrCheck);

void BM_Expand(benchmark::State& state) {
  const GrammarFile f = load_grammar(corpus("branch.gg"));
  for (auto _ : state) benchmark::DoNotOptimize(expand(f.grammar, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_Expand)->Arg(4)->Arg(6)->Arg(8);

// Headline query, eps = 2^-range.
void BM_UntilProbability(benchmark::State& state) {
  const GrammarFile& f = running();
  const GrammarIndex index(f.grammar);
  const Grammar& g = f.grammar;
  const CanonSet phi1 = canon_with_any(index, {g.symbol("V1")}), phi2 = canon_with_any(index, {g.symbol("V2")});
  const VertexAddress v0 = parse_address(index, "v0");
  const Rational eps(mpz_class(1), mpz_class(1) << state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(until_probability(index, f.mu, phi1, phi2, v0, eps));
}
BENCHMARK(BM_UntilProbability)->Arg(20)->Arg(30)->Arg(60);

void BM_PushdownSystem(benchmark::State& state) {
  const GrammarFile f = to_grammar(load_pds(corpus("ex23_prob.pds")), PdsConstruction::CompleteOutside);
  const GrammarIndex index(f.grammar);
  const CanonSet all = canon_all(index), target = canon_with_any(index, {f.grammar.symbol("st_p")});
  for (auto _ : state) benchmark::DoNotOptimize(UntilAnalysis(index, f.mu, all, target, Rational(1, 1000000)));
}
BENCHMARK(BM_PushdownSystem);

void BM_CheckPcpGadget(benchmark::State& state) {
  const PcpInstance p = load_pcp(corpus("pcp_solvable_2.pcp"));
  const PcpGadget gadget = encode(p);
  const GrammarIndex index(gadget.file.grammar);
  const VertexAddress at = s_address(gadget.file.grammar, p, {1, 2});
  for (auto _ : state) {
    Checker checker(index, gadget.file.mu);
    benchmark::DoNotOptimize(checker.at(gadget.formula, at));
  }
}
BENCHMARK(BM_CheckPcpGadget);

void BM_Sample(benchmark::State& state) {
  const GrammarFile& f = running();
  const GrammarIndex index(f.grammar);
  const FiniteMC mc = truncate(f.grammar, f.mu, 45);
  const PathQuery q{mc.with_any({f.grammar.symbol("V1")}), mc.with_any({f.grammar.symbol("V2")}), 40};
  const std::size_t from = mc.state_at(parse_address(index, "v0"));
  for (auto _ : state) benchmark::DoNotOptimize(sample_until(mc, q, from, 10000, 1));
}
BENCHMARK(BM_Sample);

}  // namespace
}  // namespace pregma

BENCHMARK_MAIN();
