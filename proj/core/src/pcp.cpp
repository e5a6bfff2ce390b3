#include "pregma/pcp.hpp"

#include <sstream>

namespace pregma {

PcpInstance parse_pcp(std::string_view text) {
  PcpInstance p;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const auto words = split_words(raw);
    if (words.empty()) continue;
    auto fail = [&](const std::string& msg) { throw Error("line " + std::to_string(number) + ": " + msg); };
    if (words[0] != "pair" || words.size() != 3) fail("expected 'pair <u> <v>'");
    for (std::size_t k = 1; k <= 2; ++k)
      if (words[k].find_first_not_of("01") != std::string::npos) fail("words must be over {0,1}: '" + words[k] + "'");
    p.pairs.emplace_back(words[1], words[2]);
  }
  if (p.pairs.empty()) throw Error("instance has no pairs");
  return p;
}

PcpInstance load_pcp(const std::string& path) { return parse_pcp(read_file(path)); }

namespace {

struct Builder {
  Rule rule;

  VertexId vertex(const std::string& name) {
    if (auto v = rule.find_vertex(name)) return *v;
    const auto v = static_cast<VertexId>(rule.vertex_names.size());
    rule.vertex_names.push_back(name);
    rule.rhs.add_vertex(v);
    return v;
  }
  void arc(SymbolId label, const std::vector<std::string>& names) {
    Hyperarc h{label, {}};
    for (const auto& n : names) h.vertices.push_back(vertex(n));
    rule.rhs.add_arc(std::move(h));
  }
};

std::string new_name(std::size_t i) { return "New" + std::to_string(i + 1); }

}  // namespace

PcpGadget encode(const PcpInstance& p) {
  PcpGadget out;
  Grammar& g = out.file.grammar;
  const SymbolId z = g.add_symbol("Z", 0, SymbolKind::Nonterminal);
  std::vector<SymbolId> news;
  for (std::size_t i = 0; i < p.pairs.size(); ++i) news.push_back(g.add_symbol(new_name(i), 2, SymbolKind::Nonterminal));
  const SymbolId a = g.add_symbol("a", 2, SymbolKind::Terminal);
  const SymbolId b = g.add_symbol("b", 2, SymbolKind::Terminal);
  const SymbolId s = g.add_symbol("s", 1, SymbolKind::Terminal);
  const SymbolId green = g.add_symbol("green", 1, SymbolKind::Terminal);
  const SymbolId red = g.add_symbol("red", 1, SymbolKind::Terminal);
  g.axiom = z;
  out.file.mu[a] = Rational(1, 2);
  out.file.mu[b] = Rational(1);

  auto leaf = [&](Builder& r, const std::string& name, bool is_green) {
    r.arc(is_green ? green : red, {name});
    r.arc(b, {name, name});
  };
  // One connector pair per pair index so every output sits on a single hyperarc.
  auto connectors = [&](Builder& r, const std::string& upper, const std::string& lower) {
    for (std::size_t j = 0; j < news.size(); ++j) {
      const std::string up = "up" + std::to_string(j + 1), low = "low" + std::to_string(j + 1);
      r.arc(b, {up, upper});
      r.arc(b, {low, lower});
      r.arc(news[j], {up, low});
    }
  };

  Builder top;
  top.rule.lhs = z;
  for (const std::string side : {"top_v", "top_u"}) {
    top.arc(a, {side, side + "_green"});
    top.arc(a, {side, side + "_red"});
    leaf(top, side + "_green", true);
    leaf(top, side + "_red", false);
  }
  connectors(top, "top_v", "top_u");
  g.rules.push_back(std::move(top.rule));

  for (std::size_t i = 0; i < p.pairs.size(); ++i) {
    const auto& [u, v] = p.pairs[i];
    Builder r;
    r.rule.lhs = news[i];
    r.rule.iota = {r.vertex("in_v"), r.vertex("in_u")};
    r.arc(s, {"s"});
    auto chain = [&](const std::string& word, const std::string& tag, const std::string& exit, char green_bit) {
      r.arc(a, {"s", tag + "1"});
      for (std::size_t k = 1; k <= word.size(); ++k) {
        const std::string cell = tag + std::to_string(k);
        const std::string next = k == word.size() ? exit : tag + std::to_string(k + 1);
        r.arc(a, {cell, next});
        r.arc(a, {cell, cell + "_leaf"});
        leaf(r, cell + "_leaf", word[k - 1] == green_bit);
      }
    };
    chain(v, "v", "in_v", '0');
    chain(u, "u", "in_u", '1');
    connectors(r, "v1", "u1");
    g.rules.push_back(std::move(r.rule));
  }

  out.formula = parse_formula("s & (tt U[=1/2] green)");
  return out;
}

VertexAddress s_address(const Grammar& gadget, const PcpInstance& p, const std::vector<unsigned>& seq) {
  if (seq.empty()) throw Error("empty index sequence");
  VertexAddress addr;
  SymbolId ctx = gadget.axiom;
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    if (*it < 1 || *it > p.pairs.size()) throw Error("pair index " + std::to_string(*it) + " out of range");
    const SymbolId label = gadget.symbol(new_name(*it - 1));
    const auto& arcs = gadget.rule(ctx).rhs.arcs;
    std::size_t h = 0;
    while (h < arcs.size() && arcs[h].label != label) ++h;
    if (h == arcs.size()) throw Error("grammar is not a PCP gadget");
    addr.path.push_back(static_cast<std::uint32_t>(h));
    ctx = label;
  }
  const auto v = gadget.rule(ctx).find_vertex("s");
  if (!v) throw Error("grammar is not a PCP gadget");
  addr.vertex = *v;
  return addr;
}

namespace {

std::string concat(const PcpInstance& p, const std::vector<unsigned>& seq, bool upper) {
  std::string out;
  for (unsigned i : seq) {
    if (i < 1 || i > p.pairs.size()) throw Error("pair index " + std::to_string(i) + " out of range");
    out += upper ? p.pairs[i - 1].second : p.pairs[i - 1].first;
  }
  return out;
}

Rational pow2_neg(std::size_t k) {
  mpz_class d = 1;
  d <<= static_cast<mp_bitcnt_t>(k);
  return Rational(mpz_class(1), d);
}

}  // namespace

std::string concat_u(const PcpInstance& p, const std::vector<unsigned>& seq) { return concat(p, seq, false); }
std::string concat_v(const PcpInstance& p, const std::vector<unsigned>& seq) { return concat(p, seq, true); }

Rational dyadic_mass(const std::string& word, char bit) {
  Rational m = 0;
  for (std::size_t k = 0; k < word.size(); ++k)
    if (word[k] == bit) m += pow2_neg(k + 1);
  return m;
}

Rational closed_form(const PcpInstance& p, const std::vector<unsigned>& seq) {
  const std::string u = concat_u(p, seq), v = concat_v(p, seq);
  Rational r = (dyadic_mass(u, '0') + dyadic_mass(v, '1')) / 2 + (pow2_neg(u.size()) + pow2_neg(v.size())) / 4;
  r.canonicalize();
  return r;
}

}  // namespace pregma
