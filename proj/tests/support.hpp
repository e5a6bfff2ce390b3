#pragma once

#include <string>
#include <vector>

#include "pregma/grammar_io.hpp"
#include "pregma/markov.hpp"
#include "pregma/pcp.hpp"
#include "pregma/pushdown.hpp"

namespace pregma::testing {

inline std::string corpus(const std::string& name) { return std::string(PREGMA_CORPUS_DIR) + "/" + name; }

inline GrammarFile load_corpus(const std::string& name) { return load_grammar(corpus(name)); }

/// The probabilistic pushdown example in its complete-outside form.
inline GrammarFile pushdown_grammar() {
  return to_grammar(load_pds(corpus("ex23_prob.pds")), PdsConstruction::CompleteOutside);
}

inline GrammarFile pcp_grammar(const std::string& instance) { return encode(load_pcp(corpus(instance))).file; }

/// A corpus grammar together with the colours worth querying and a vertex to start from.
struct CorpusEntry {
  std::string name;
  GrammarFile file;
  std::vector<std::string> colours;
  std::string start;
};

/// s-vertex of the gadget for `seq`, as address text.
inline std::string pcp_start(const std::string& instance, const std::vector<unsigned>& seq) {
  const PcpGadget gadget = encode(load_pcp(corpus(instance)));
  const GrammarIndex index(gadget.file.grammar);
  return format_address(index, s_address(gadget.file.grammar, load_pcp(corpus(instance)), seq));
}

/// Running example, pushdown conversion, the two hand-built grammars and one gadget.
inline std::vector<CorpusEntry> corpus_entries() {
  return {
      {"running.gg", load_corpus("running.gg"), {"V1", "V2", "nV1"}, "v0"},
      {"ex23_prob.pds", pushdown_grammar(), {"st_r", "st_r'", "st_p"}, "r"},
      {"walk.gg", load_corpus("walk.gg"), {"zero", "halt", "pos"}, "0/q"},
      {"branch.gg", load_corpus("branch.gg"), {"root", "red", "blue"}, "0/a"},
      {"pcp_solvable_2.pcp", pcp_grammar("pcp_solvable_2.pcp"), {"s", "green", "red"},
       pcp_start("pcp_solvable_2.pcp", {1, 2})},
  };
}

/// Chain states whose canonical vertex lies in `set`.
inline StateSet states_in(const FiniteMC& mc, const GrammarIndex& index, const std::vector<bool>& set) {
  StateSet out(mc.size(), false);
  for (std::size_t i = 0; i < mc.size(); ++i) out[i] = set[index.canonical_index(mc.states[i].canonical)];
  return out;
}

/// Random probabilistic pushdown system: every rule reads a stack symbol and a state,
/// configurations without stack are absorbing. Labels are unique per rule.
inline PushdownSystem random_pds(std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng.next() % n); };
  PushdownSystem p;
  p.stack = {"A", "B"};
  p.states = {"p", "q"};
  p.absorbing = true;
  std::size_t label = 0;
  for (const auto& x : p.stack)
    for (const auto& s : p.states) {
      const std::size_t rules = 1 + pick(2);
      // Weights 1..3, normalized.
      std::vector<unsigned> weights;
      unsigned total = 0;
      for (std::size_t k = 0; k < rules; ++k) total += weights.emplace_back(1 + pick(3));
      for (std::size_t k = 0; k < rules; ++k) {
        Word rhs;
        const std::size_t push = pick(3);  // 0: pop, 1: replace, 2: push
        for (std::size_t j = 0; j < push; ++j) rhs.push_back(p.stack[pick(2)]);
        rhs.push_back(p.states[pick(2)]);
        const std::string name = "r" + std::to_string(++label);
        p.rules.push_back({{x, s}, name, rhs});
        Rational q(weights[k], total);
        q.canonicalize();
        p.mu[name] = q;
      }
    }
  p.start = Word{"A", "p"};
  return p;
}

}  // namespace pregma::testing
