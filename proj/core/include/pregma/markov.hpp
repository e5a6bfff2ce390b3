#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "pregma/grammar.hpp"
#include "pregma/validation.hpp"

namespace pregma {

using StateSet = std::vector<bool>;

/// Finite piece of the generated Markov chain. States are dense indices.
struct FiniteMC {
  std::vector<ConcreteVertex> states;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> succ;
  std::vector<std::set<SymbolId>> labels;
  /// Out-arcs of these states may be missing.
  StateSet frontier;
  std::map<VertexAddress, std::size_t> by_address;
  std::map<VertexId, std::size_t> by_id;

  std::size_t size() const { return states.size(); }
  /// Throws Error when no state has this address.
  std::size_t state_at(const VertexAddress& address) const;
  std::size_t state_of(VertexId id) const;
  /// States carrying at least one of `colours`.
  StateSet with_any(const std::set<SymbolId>& colours) const;
  StateSet all() const { return StateSet(size(), true); }
  StateSet none() const { return StateSet(size(), false); }
};

/// expand(g, depth) read as a chain, absorbing sinks given their self-loop.
FiniteMC truncate(const Grammar& g, const ProbabilityMap& mu, unsigned depth);

/// States within `radius` steps of `from`, built from canonical out-arcs address by
/// address. States at distance `radius` are frontier, and so are states whose canonical
/// vertex is outside `open` when it is given (pass phi1 & !phi2 for an until query).
FiniteMC explore(const GrammarIndex& index, const ProbabilityMap& mu, const VertexAddress& from, unsigned radius,
                 const std::vector<bool>* open = nullptr);

/// Concrete successors of a (normalized) address with their probabilities.
std::vector<std::pair<VertexAddress, Rational>> address_successors(const GrammarIndex& index,
                                                                   const ProbabilityMap& mu,
                                                                   const VertexAddress& address);

struct PathQuery {
  StateSet phi1;
  StateSet phi2;
  unsigned horizon = 0;
};

/// Exact probability of phi1 U phi2 within `horizon` steps. Throws Error when a
/// frontier state would have to be left before the horizon.
Rational bounded_until(const FiniteMC& mc, const PathQuery& q, std::size_t from);

/// Exact one-step probability of moving into `target`. Throws Error at frontier states.
Rational next_probability(const FiniteMC& mc, const StateSet& target, std::size_t from);

/// splitmix64; the stream is fully determined by the seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform double in [0,1): top 53 bits of next() times 2^-53.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Seed of worker `worker` derived from a run seed.
std::uint64_t worker_seed(std::uint64_t seed, unsigned worker);

struct SampleResult {
  std::uint64_t hits = 0;
  std::uint64_t escapes = 0;
  std::uint64_t n = 0;
};

/// Monte-Carlo estimate of phi1 U phi2 within the horizon. A trajectory that needs a
/// step from a frontier state is an escape, never a hit or a miss.
SampleResult sample_until(const FiniteMC& mc, const PathQuery& q, std::size_t from, std::uint64_t n,
                          std::uint64_t seed, unsigned workers = 1);

}  // namespace pregma
