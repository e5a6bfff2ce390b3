#include "pregma/pctl.hpp"

#include <cctype>
#include <functional>
#include <set>

namespace pregma {

FormulaPtr Formula::tt() { return std::make_shared<Formula>(); }

FormulaPtr Formula::make_atom(std::string name) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Atom;
  f->atom = std::move(name);
  return f;
}

FormulaPtr Formula::negate(FormulaPtr g) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Not;
  f->left = std::move(g);
  return f;
}

FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::And;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

namespace {

FormulaPtr unary(Formula::Kind kind, Comparison cmp, Rational rho, FormulaPtr g) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  f->cmp = cmp;
  f->threshold = std::move(rho);
  f->left = std::move(g);
  return f;
}

}  // namespace

FormulaPtr Formula::next(Comparison cmp, Rational rho, FormulaPtr g) {
  return unary(Kind::Next, cmp, std::move(rho), std::move(g));
}

FormulaPtr Formula::until(FormulaPtr a, Comparison cmp, Rational rho, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = Kind::Until;
  f->cmp = cmp;
  f->threshold = std::move(rho);
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

FormulaPtr Formula::eventually(Comparison cmp, Rational rho, FormulaPtr g) {
  return unary(Kind::Eventually, cmp, std::move(rho), std::move(g));
}

FormulaPtr Formula::globally(Comparison cmp, Rational rho, FormulaPtr g) {
  return unary(Kind::Globally, cmp, std::move(rho), std::move(g));
}

namespace {

std::string bracket(const Formula& f) {
  return "[" + std::string(comparison_text(f.cmp)) + to_fraction(f.threshold) + "]";
}

bool is_binary(const Formula& f) { return f.kind == Formula::Kind::And || f.kind == Formula::Kind::Until; }

std::string wrap_if(bool cond, const std::string& s) { return cond ? "(" + s + ")" : s; }

}  // namespace

std::string to_string(const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::True: return "tt";
    case K::Atom: return f.atom;
    case K::Not: return "!" + wrap_if(is_binary(*f.left), to_string(*f.left));
    case K::And:
      return wrap_if(f.left->kind == K::Until, to_string(*f.left)) + " & " +
             wrap_if(is_binary(*f.right), to_string(*f.right));
    case K::Next: return "X" + bracket(f) + " " + wrap_if(is_binary(*f.left), to_string(*f.left));
    case K::Eventually: return "F" + bracket(f) + " " + wrap_if(is_binary(*f.left), to_string(*f.left));
    case K::Globally: return "G" + bracket(f) + " " + wrap_if(is_binary(*f.left), to_string(*f.left));
    case K::Until:
      return wrap_if(f.left->kind == K::Until, to_string(*f.left)) + " U" + bracket(f) + " " + to_string(*f.right);
  }
  return "?";
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind || a.atom != b.atom) return false;
  using K = Formula::Kind;
  const bool probabilistic = a.kind == K::Next || a.kind == K::Until || a.kind == K::Eventually || a.kind == K::Globally;
  if (probabilistic && (a.cmp != b.cmp || a.threshold != b.threshold)) return false;
  if (bool(a.left) != bool(b.left) || bool(a.right) != bool(b.right)) return false;
  if (a.left && !equal(*a.left, *b.left)) return false;
  if (a.right && !equal(*a.right, *b.right)) return false;
  return true;
}

FormulaError::FormulaError(std::size_t position, const std::string& message)
    : Error("position " + std::to_string(position) + ": " + message), position_(position) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  FormulaPtr run() {
    FormulaPtr f = until();
    skip();
    if (i_ < s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw FormulaError(i_ + 1, msg); }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool peek(char c) {
    skip();
    return i_ < s_.size() && s_[i_] == c;
  }

  // An operator letter counts only when a bracket follows it.
  bool peek_operator(char letter) {
    skip();
    if (i_ >= s_.size() || s_[i_] != letter) return false;
    std::size_t j = i_ + 1;
    while (j < s_.size() && std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
    return j < s_.size() && s_[j] == '[';
  }

  struct Bound {
    std::optional<Comparison> cmp;  // empty for `=`
    Rational rho;
  };

  Bound bound() {
    skip();
    if (!peek('[')) fail("expected '['");
    ++i_;
    skip();
    Bound b;
    auto take = [&](std::string_view op) {
      if (s_.substr(i_, op.size()) != op) return false;
      i_ += op.size();
      return true;
    };
    if (take(">=")) b.cmp = Comparison::GreaterEqual;
    else if (take("<=")) b.cmp = Comparison::LessEqual;
    else if (take(">")) b.cmp = Comparison::Greater;
    else if (take("<")) b.cmp = Comparison::Less;
    else if (!take("=")) fail("expected a comparison (<, <=, >, >=, =)");
    skip();
    const std::size_t start = i_;
    while (i_ < s_.size() && s_[i_] != ']' && !std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    const std::string text(s_.substr(start, i_ - start));
    try {
      b.rho = parse_rational(text);
    } catch (const Error&) {
      throw FormulaError(start + 1, "malformed threshold '" + text + "'");
    }
    if (b.rho < 0 || b.rho > 1) throw FormulaError(start + 1, "threshold out of range: " + text);
    skip();
    if (!peek(']')) fail("expected ']'");
    ++i_;
    return b;
  }

  template <typename Make>
  FormulaPtr with_bound(const Bound& b, Make make) {
    if (b.cmp) return make(*b.cmp);
    return Formula::conj(make(Comparison::GreaterEqual), make(Comparison::LessEqual));
  }

  FormulaPtr until() {
    FormulaPtr lhs = conjunction();
    if (!peek_operator('U')) return lhs;
    ++i_;
    const Bound b = bound();
    FormulaPtr rhs = until();
    return with_bound(b, [&](Comparison c) { return Formula::until(lhs, c, b.rho, rhs); });
  }

  FormulaPtr conjunction() {
    FormulaPtr f = primary();
    while (peek('&')) {
      ++i_;
      f = Formula::conj(f, primary());
    }
    return f;
  }

  FormulaPtr primary() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end of formula");
    if (peek('!')) {
      ++i_;
      return Formula::negate(primary());
    }
    if (peek('(')) {
      ++i_;
      FormulaPtr f = until();
      if (!peek(')')) fail("expected ')'");
      ++i_;
      return f;
    }
    for (char op : {'X', 'F', 'G'}) {
      if (!peek_operator(op)) continue;
      ++i_;
      const Bound b = bound();
      FormulaPtr g = primary();
      return with_bound(b, [&](Comparison c) {
        if (op == 'X') return Formula::next(c, b.rho, g);
        if (op == 'F') return Formula::eventually(c, b.rho, g);
        return Formula::globally(c, b.rho, g);
      });
    }
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '\'' ||
                              s_[i_] == '.' || s_[i_] == '#'))
      ++i_;
    if (i_ == start) fail("expected a formula");
    std::string name(s_.substr(start, i_ - start));
    if (name == "tt") return Formula::tt();
    return Formula::make_atom(std::move(name));
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

Comparison flip(Comparison c) {
  switch (c) {
    case Comparison::Less: return Comparison::Greater;
    case Comparison::LessEqual: return Comparison::GreaterEqual;
    case Comparison::Greater: return Comparison::Less;
    case Comparison::GreaterEqual: return Comparison::LessEqual;
  }
  return c;
}

}  // namespace

FormulaPtr normalize(const FormulaPtr& f) {
  using K = Formula::Kind;
  switch (f->kind) {
    case K::True:
    case K::Atom: return f;
    case K::Not: return Formula::negate(normalize(f->left));
    case K::And: return Formula::conj(normalize(f->left), normalize(f->right));
    case K::Next: return Formula::next(f->cmp, f->threshold, normalize(f->left));
    case K::Until: return Formula::until(normalize(f->left), f->cmp, f->threshold, normalize(f->right));
    case K::Eventually: return Formula::until(Formula::tt(), f->cmp, f->threshold, normalize(f->left));
    case K::Globally:
      return Formula::until(Formula::tt(), flip(f->cmp), 1 - f->threshold, Formula::negate(normalize(f->left)));
  }
  return f;
}

FormulaPtr parse_formula(std::string_view text, bool keep_sugar) {
  FormulaPtr f = Parser(text).run();
  return keep_sugar ? f : normalize(f);
}

Checker::Checker(const GrammarIndex& index, const ProbabilityMap& mu, CheckOptions opts)
    : index_(&index), mu_(&mu), opts_(std::move(opts)) {}

const TriSet& Checker::label(const FormulaPtr& f) { return node(f).sat; }

std::vector<std::optional<Interval>> Checker::enclosures(const FormulaPtr& f) { return node(f).enclosure; }

const Checker::Node& Checker::node(const FormulaPtr& f) {
  auto it = cache_.find(f.get());
  if (it != cache_.end()) return it->second;
  Node n = compute(*f);
  keep_alive_.push_back(f);
  return cache_.emplace(f.get(), std::move(n)).first->second;
}

void Checker::check_mode(const Formula& f) const {
  if (opts_.mode == CheckMode::QualitativeOnly && f.threshold != 0 && f.threshold != 1)
    throw Error("threshold " + to_fraction(f.threshold) + " in '" + to_string(f) +
                "' needs the quantitative engine; qualitative-only mode accepts 0 and 1");
}

UntilAnalysis& Checker::analysis(const CanonSet& phi1, const CanonSet& phi2) {
  auto& slot = analyses_[{phi1, phi2}];
  if (!slot) slot = std::make_unique<UntilAnalysis>(*index_, *mu_, phi1, phi2, opts_.eps, opts_.solve);
  return *slot;
}

Checker::Node Checker::compute(const Formula& f) {
  using K = Formula::Kind;
  const std::size_t n = index_->canonical_vertices().size();
  Node out;
  out.enclosure.resize(n);
  switch (f.kind) {
    case K::True: out.sat = {canon_all(*index_), canon_all(*index_)}; return out;
    case K::Atom: {
      const auto s = index_->grammar().find_symbol(f.atom);
      if (!s || !index_->grammar().is_colour(*s)) throw Error("unknown atom '" + f.atom + "': not a colour of the grammar");
      const CanonSet set = canon_with_any(*index_, {*s});
      out.sat = {set, set};
      return out;
    }
    case K::Not: {
      const TriSet& a = label(f.left);
      out.sat = {CanonSet(n), CanonSet(n)};
      for (std::size_t i = 0; i < n; ++i) {
        out.sat.under[i] = !a.over[i];
        out.sat.over[i] = !a.under[i];
      }
      return out;
    }
    case K::And: {
      const TriSet a = label(f.left);
      const TriSet& b = label(f.right);
      out.sat = {CanonSet(n), CanonSet(n)};
      for (std::size_t i = 0; i < n; ++i) {
        out.sat.under[i] = a.under[i] && b.under[i];
        out.sat.over[i] = a.over[i] && b.over[i];
      }
      return out;
    }
    case K::Next: return next_node(f);
    case K::Until: return until_node(f);
    case K::Eventually:
    case K::Globally: throw Error("F/G must be normalized before evaluation");
  }
  return out;
}

namespace {

void set_verdict(TriSet& t, std::size_t i, Verdict v) {
  t.under[i] = v == Verdict::Holds;
  t.over[i] = v != Verdict::Fails;
}

}  // namespace

Checker::Node Checker::next_node(const Formula& f) {
  check_mode(f);
  const TriSet target = label(f.left);
  const auto& canon = index_->canonical_vertices();
  Node out;
  out.sat = {CanonSet(canon.size()), CanonSet(canon.size())};
  out.enclosure.resize(canon.size());
  for (std::size_t i = 0; i < canon.size(); ++i) {
    const auto lo = next_values(*index_, *mu_, target.under, canon[i]);
    const auto hi = next_values(*index_, *mu_, target.over, canon[i]);
    std::vector<Verdict> vs;
    std::optional<Interval> enc;
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const Interval e{lo[k], hi[k]};
      vs.push_back(decide_threshold(e, f.cmp, f.threshold));
      enc = enc ? hull(*enc, e) : e;
    }
    set_verdict(out.sat, i, vs.empty() ? Verdict::Fails : agree(vs));
    out.enclosure[i] = enc;
  }
  return out;
}

namespace {

enum class QualitativeUntil { All, None, Positive, NotPositive, AlmostSure, NotAlmostSure };

std::optional<QualitativeUntil> qualitative_kind(Comparison cmp, const Rational& rho) {
  if (rho == 0) {
    switch (cmp) {
      case Comparison::Greater: return QualitativeUntil::Positive;
      case Comparison::GreaterEqual: return QualitativeUntil::All;
      case Comparison::Less: return QualitativeUntil::None;
      case Comparison::LessEqual: return QualitativeUntil::NotPositive;
    }
  }
  if (rho == 1) {
    switch (cmp) {
      case Comparison::Greater: return QualitativeUntil::None;
      case Comparison::GreaterEqual: return QualitativeUntil::AlmostSure;
      case Comparison::Less: return QualitativeUntil::NotAlmostSure;
      case Comparison::LessEqual: return QualitativeUntil::All;
    }
  }
  return std::nullopt;
}

}  // namespace

Checker::Node Checker::until_node(const Formula& f) {
  check_mode(f);
  const TriSet a = label(f.left);
  const TriSet b = label(f.right);
  const auto& canon = index_->canonical_vertices();
  const std::size_t n = canon.size();
  Node out;
  out.sat = {CanonSet(n), CanonSet(n)};
  out.enclosure.resize(n);

  if (auto q = qualitative_kind(f.cmp, f.threshold)) {
    switch (*q) {
      case QualitativeUntil::All: out.sat = {canon_all(*index_), canon_all(*index_)}; break;
      case QualitativeUntil::None: out.sat = {canon_none(*index_), canon_none(*index_)}; break;
      case QualitativeUntil::Positive:
      case QualitativeUntil::NotPositive: {
        PositivityAnalysis lo(*index_, *mu_, a.under, b.under);
        PositivityAnalysis hi(*index_, *mu_, a.over, b.over);
        for (std::size_t i = 0; i < n; ++i) {
          Verdict v = Verdict::Unknown;
          if (lo.at(canon[i]) == Verdict::Holds) v = Verdict::Holds;
          else if (hi.at(canon[i]) == Verdict::Fails) v = Verdict::Fails;
          set_verdict(out.sat, i, *q == QualitativeUntil::Positive ? v : tri_not(v));
        }
        break;
      }
      case QualitativeUntil::AlmostSure:
      case QualitativeUntil::NotAlmostSure: {
        AlmostSureAnalysis lo(*index_, *mu_, a.under, b.under, opts_.eps, opts_.solve);
        AlmostSureAnalysis hi(*index_, *mu_, a.over, b.over, opts_.eps, opts_.solve);
        for (std::size_t i = 0; i < n; ++i) {
          Verdict v = Verdict::Unknown;
          if (lo.at(canon[i]) == Verdict::Holds) v = Verdict::Holds;
          else if (hi.at(canon[i]) == Verdict::Fails) v = Verdict::Fails;
          set_verdict(out.sat, i, *q == QualitativeUntil::AlmostSure ? v : tri_not(v));
        }
        break;
      }
    }
    return out;
  }

  UntilAnalysis& lo = analysis(a.under, b.under);
  UntilAnalysis& hi = analysis(a.over, b.over);
  Rational eps = opts_.eps;
  for (unsigned round = 0;; ++round) {
    bool undecided = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!index_->is_reachable(canon[i].context)) {
        set_verdict(out.sat, i, Verdict::Fails);
        continue;
      }
      const Interval e{lo.at(canon[i]).lo, hi.at(canon[i]).hi};
      const Verdict v = decide_threshold(e, f.cmp, f.threshold);
      set_verdict(out.sat, i, v);
      out.enclosure[i] = e;
      undecided = undecided || v == Verdict::Unknown;
    }
    if (!undecided || round >= opts_.refinements || !lo.converged() || !hi.converged()) break;
    eps /= 16;
    lo.refine(eps);
    if (&hi != &lo) hi.refine(eps);
  }
  return out;
}

PointVerdict Checker::at(const FormulaPtr& fp, const VertexAddress& address) {
  using K = Formula::Kind;
  const Formula& f = *fp;
  const VertexAddress addr = index_->normalize(address);
  switch (f.kind) {
    case K::True:
    case K::Atom: return {label(fp).at(index_->canonical_index(index_->canonical_of(addr))), std::nullopt};
    case K::Not: {
      const PointVerdict a = at(f.left, addr);
      return {tri_not(a.verdict), a.enclosure};
    }
    case K::And: {
      const PointVerdict a = at(f.left, addr);
      const PointVerdict b = at(f.right, addr);
      return {tri_and(a.verdict, b.verdict), a.enclosure ? a.enclosure : b.enclosure};
    }
    case K::Next: {
      check_mode(f);
      const TriSet target = label(f.left);
      const Interval e{next_value(*index_, *mu_, target.under, addr), next_value(*index_, *mu_, target.over, addr)};
      return {decide_threshold(e, f.cmp, f.threshold), e};
    }
    case K::Until: {
      check_mode(f);
      const TriSet a = label(f.left);
      const TriSet b = label(f.right);
      if (auto q = qualitative_kind(f.cmp, f.threshold)) {
        Verdict v = Verdict::Unknown;
        switch (*q) {
          case QualitativeUntil::All: return {Verdict::Holds, std::nullopt};
          case QualitativeUntil::None: return {Verdict::Fails, std::nullopt};
          case QualitativeUntil::Positive:
          case QualitativeUntil::NotPositive:
            if (PositivityAnalysis(*index_, *mu_, a.under, b.under).at(addr)) v = Verdict::Holds;
            else if (!PositivityAnalysis(*index_, *mu_, a.over, b.over).at(addr)) v = Verdict::Fails;
            return {*q == QualitativeUntil::Positive ? v : tri_not(v), std::nullopt};
          case QualitativeUntil::AlmostSure:
          case QualitativeUntil::NotAlmostSure:
            if (AlmostSureAnalysis(*index_, *mu_, a.under, b.under, opts_.eps, opts_.solve).at(addr) == Verdict::Holds)
              v = Verdict::Holds;
            else if (AlmostSureAnalysis(*index_, *mu_, a.over, b.over, opts_.eps, opts_.solve).at(addr) ==
                     Verdict::Fails)
              v = Verdict::Fails;
            return {*q == QualitativeUntil::AlmostSure ? v : tri_not(v), std::nullopt};
        }
      }
      UntilAnalysis& lo = analysis(a.under, b.under);
      UntilAnalysis& hi = analysis(a.over, b.over);
      Rational eps = opts_.eps;
      for (unsigned round = 0;; ++round) {
        const Interval e{lo.at(addr).lo, hi.at(addr).hi};
        const Verdict v = decide_threshold(e, f.cmp, f.threshold);
        if (v != Verdict::Unknown || round >= opts_.refinements || !lo.converged() || !hi.converged())
          return {v, e};
        eps /= 16;
        lo.refine(eps);
        if (&hi != &lo) hi.refine(eps);
      }
    }
    case K::Eventually:
    case K::Globally: throw Error("F/G must be normalized before evaluation");
  }
  return {};
}

Grammar Checker::coloured(const FormulaPtr& f) {
  Grammar g = index_->grammar();
  std::vector<FormulaPtr> order;
  std::set<const Formula*> seen;
  std::function<void(const FormulaPtr&)> visit = [&](const FormulaPtr& x) {
    if (!x || seen.count(x.get())) return;
    visit(x->left);
    visit(x->right);
    seen.insert(x.get());
    order.push_back(x);
  };
  visit(f);
  auto fresh = [&](std::string name) {
    while (g.find_symbol(name)) name += "_";
    return g.add_symbol(name, 1, SymbolKind::Terminal);
  };
  const auto& canon = index_->canonical_vertices();
  for (std::size_t k = 0; k < order.size(); ++k) {
    const TriSet& sat = label(order[k]);
    const SymbolId holds = fresh("phi" + std::to_string(k + 1));
    const SymbolId unknown = fresh("phi" + std::to_string(k + 1) + "_unknown");
    for (std::size_t i = 0; i < canon.size(); ++i) {
      const Verdict v = sat.at(i);
      if (v == Verdict::Fails) continue;
      g.rule(canon[i].context).rhs.add_arc(Hyperarc{v == Verdict::Holds ? holds : unknown, {canon[i].vertex}});
    }
  }
  return g;
}

Labelling label_formula(const GrammarIndex& index, const ProbabilityMap& mu, const FormulaPtr& f,
                        const CheckOptions& opts) {
  Checker checker(index, mu, opts);
  const FormulaPtr nf = normalize(f);
  Labelling out;
  const TriSet& sat = checker.label(nf);
  for (std::size_t i = 0; i < sat.under.size(); ++i) out.verdicts.push_back(sat.at(i));
  out.enclosures = checker.enclosures(nf);
  out.grammar = checker.coloured(nf);
  return out;
}

}  // namespace pregma
