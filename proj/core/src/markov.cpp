#include "pregma/markov.hpp"

#include <deque>
#include <thread>

namespace pregma {

std::size_t FiniteMC::state_at(const VertexAddress& address) const {
  auto it = by_address.find(address);
  if (it == by_address.end()) throw Error("no state at this address");
  return it->second;
}

std::size_t FiniteMC::state_of(VertexId id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw Error("no state with this vertex id");
  return it->second;
}

StateSet FiniteMC::with_any(const std::set<SymbolId>& colours) const {
  StateSet out(size(), false);
  for (std::size_t s = 0; s < size(); ++s)
    for (SymbolId c : labels[s])
      if (colours.count(c)) {
        out[s] = true;
        break;
      }
  return out;
}

FiniteMC truncate(const Grammar& g, const ProbabilityMap& mu, unsigned depth) {
  Expansion ex = expand(g, depth);
  FiniteMC mc;
  for (VertexId v : ex.graph.vertices) {
    mc.by_id[v] = mc.states.size();
    mc.by_address[ex.vertices.at(v).address] = mc.states.size();
    mc.states.push_back(ex.vertices.at(v));
  }
  const std::size_t n = mc.size();
  mc.succ.resize(n);
  mc.labels.resize(n);
  mc.frontier.assign(n, false);
  for (VertexId v : ex.frontier()) mc.frontier[mc.by_id.at(v)] = true;
  for (const Hyperarc& h : ex.graph.arcs) {
    if (g.is_colour(h.label)) mc.labels[mc.by_id.at(h.vertices[0])].insert(h.label);
    if (g.is_arc_label(h.label))
      mc.succ[mc.by_id.at(h.vertices[0])].emplace_back(mc.by_id.at(h.vertices[1]), probability(mu, g, h.label));
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (!mc.succ[s].empty() || mc.frontier[s]) continue;
    bool absorbing = g.absorbing_sinks;
    for (SymbolId c : mc.labels[s]) absorbing = absorbing || g.absorbing_colours.count(c) > 0;
    if (absorbing) mc.succ[s].emplace_back(s, Rational(1));
  }
  return mc;
}

std::vector<std::pair<VertexAddress, Rational>> address_successors(const GrammarIndex& index,
                                                                   const ProbabilityMap& mu,
                                                                   const VertexAddress& address) {
  const VertexAddress a = index.normalize(address);
  const CanonicalVertex c{index.context_of(a.path), a.vertex};
  std::vector<std::pair<VertexAddress, Rational>> out;
  if (index.absorbing(c)) {
    out.emplace_back(a, Rational(1));
    return out;
  }
  for (const OutArc& arc : index.out_arcs(c)) {
    VertexAddress t;
    switch (arc.target.kind) {
      case Successor::Kind::Same: t = VertexAddress{a.path, arc.target.vertex}; break;
      case Successor::Kind::Parent:
        t = index.normalize(VertexAddress{a.path, index.rule(c.context).iota[arc.target.position - 1]});
        break;
      case Successor::Kind::Child: {
        t.path = a.path;
        t.path.push_back(static_cast<std::uint32_t>(arc.target.hyperarc));
        t.vertex = arc.target.vertex;
        break;
      }
    }
    out.emplace_back(std::move(t), probability(mu, index.grammar(), arc.label));
  }
  return out;
}

FiniteMC explore(const GrammarIndex& index, const ProbabilityMap& mu, const VertexAddress& from, unsigned radius,
                 const std::vector<bool>* open) {
  FiniteMC mc;
  std::vector<unsigned> dist;
  auto add = [&](const VertexAddress& a, unsigned d) {
    auto [it, fresh] = mc.by_address.emplace(a, mc.states.size());
    if (fresh) {
      const CanonicalVertex c = index.canonical_of(a);
      const VertexId id = static_cast<VertexId>(mc.states.size());
      mc.states.push_back(ConcreteVertex{id, static_cast<unsigned>(a.path.size()), c, a});
      mc.by_id[id] = id;
      mc.labels.push_back(index.colours(c));
      mc.succ.emplace_back();
      mc.frontier.push_back(true);
      dist.push_back(d);
    }
    return it->second;
  };
  std::deque<std::size_t> queue{add(index.normalize(from), 0)};
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    if (dist[s] >= radius) continue;
    if (open && !(*open)[index.canonical_index(mc.states[s].canonical)]) continue;
    mc.frontier[s] = false;
    const VertexAddress a = mc.states[s].address;
    for (auto& [t, p] : address_successors(index, mu, a)) {
      const std::size_t before = mc.size();
      const std::size_t ts = add(t, dist[s] + 1);
      if (ts == before) queue.push_back(ts);
      mc.succ[s].emplace_back(ts, p);
    }
  }
  return mc;
}

Rational bounded_until(const FiniteMC& mc, const PathQuery& q, std::size_t from) {
  const std::size_t n = mc.size();
  if (from >= n) throw Error("state out of range");
  std::vector<Rational> p(n);
  std::vector<bool> tainted(n, false);
  for (std::size_t s = 0; s < n; ++s) p[s] = q.phi2[s] ? 1 : 0;
  for (unsigned k = 0; k < q.horizon; ++k) {
    std::vector<Rational> next(n);
    std::vector<bool> next_taint(n, false);
    for (std::size_t s = 0; s < n; ++s) {
      if (q.phi2[s]) {
        next[s] = 1;
        continue;
      }
      if (!q.phi1[s]) continue;
      bool t = mc.frontier[s];
      Rational acc = 0;
      for (const auto& [to, pr] : mc.succ[s]) {
        acc += pr * p[to];
        t = t || tainted[to];
      }
      next[s] = acc;
      next_taint[s] = t;
    }
    p = std::move(next);
    tainted = std::move(next_taint);
  }
  if (tainted[from]) throw Error("horizon exceeds the safe bound of this truncation");
  return p[from];
}

Rational next_probability(const FiniteMC& mc, const StateSet& target, std::size_t from) {
  if (mc.frontier.at(from)) throw Error("next-step probability requested at a frontier state");
  Rational acc = 0;
  for (const auto& [to, pr] : mc.succ[from])
    if (target[to]) acc += pr;
  return acc;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t worker_seed(std::uint64_t seed, unsigned worker) {
  if (worker == 0) return seed;
  SplitMix64 mix(seed ^ (0xd1b54a32d192ed03ULL * worker));
  return mix.next();
}

namespace {

SampleResult run_worker(const FiniteMC& mc, const std::vector<std::vector<double>>& cumulative, const PathQuery& q,
                        std::size_t from, std::uint64_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  SampleResult r;
  r.n = n;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::size_t s = from;
    for (unsigned step = 0;; ++step) {
      if (q.phi2[s]) {
        ++r.hits;
        break;
      }
      if (!q.phi1[s] || step == q.horizon) break;
      if (mc.frontier[s]) {
        ++r.escapes;
        break;
      }
      const auto& cum = cumulative[s];
      if (cum.empty()) break;  // dead end: no mass leaves, the path fails
      const double u = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < cum.size() && u >= cum[k]) ++k;
      if (u >= cum[k]) break;  // substochastic remainder: path dies
      s = mc.succ[s][k].first;
    }
  }
  return r;
}

}  // namespace

SampleResult sample_until(const FiniteMC& mc, const PathQuery& q, std::size_t from, std::uint64_t n,
                          std::uint64_t seed, unsigned workers) {
  if (n == 0) throw Error("sample count must be at least 1");
  if (from >= mc.size()) throw Error("state out of range");
  if (workers == 0) workers = 1;
  std::vector<std::vector<double>> cumulative(mc.size());
  for (std::size_t s = 0; s < mc.size(); ++s) {
    Rational acc = 0;
    for (const auto& [to, p] : mc.succ[s]) {
      acc += p;
      cumulative[s].push_back(acc.get_d());
    }
  }
  std::vector<SampleResult> parts(workers);
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t share = n / workers + (w < n % workers ? 1 : 0);
    auto job = [&, w, share] { parts[w] = run_worker(mc, cumulative, q, from, share, worker_seed(seed, w)); };
    if (workers == 1) job();
    else threads.emplace_back(job);
  }
  for (auto& t : threads) t.join();
  SampleResult total;
  for (const auto& p : parts) {
    total.hits += p.hits;
    total.escapes += p.escapes;
    total.n += p.n;
  }
  return total;
}

}  // namespace pregma
