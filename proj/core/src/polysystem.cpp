#include "pregma/polysystem.hpp"

#include "pregma/linear.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace pregma {

void Polynomial::normalize() {
  std::map<std::vector<std::size_t>, Rational> merged;
  for (Monomial& m : terms) {
    std::sort(m.vars.begin(), m.vars.end());
    merged[m.vars] += m.coeff;
  }
  terms.clear();
  for (auto& [vars, c] : merged)
    if (c != 0) terms.push_back(Monomial{c, vars});
  std::stable_sort(terms.begin(), terms.end(), [](const Monomial& a, const Monomial& b) {
    if (a.vars.size() != b.vars.size()) return a.vars.size() < b.vars.size();
    return a.vars < b.vars;
  });
}

bool Polynomial::constant() const {
  return std::all_of(terms.begin(), terms.end(), [](const Monomial& m) { return m.vars.empty(); });
}

Rational Polynomial::constant_term() const {
  Rational c = 0;
  for (const Monomial& m : terms)
    if (m.vars.empty()) c += m.coeff;
  return c;
}

std::size_t PolySystem::add_variable(std::string name) {
  names.push_back(std::move(name));
  rhs.emplace_back();
  fixed.emplace_back();
  return names.size() - 1;
}

std::optional<std::size_t> PolySystem::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

std::vector<Rational> PolySystem::apply(const std::vector<Rational>& x) const {
  std::vector<Rational> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (fixed[i]) {
      out[i] = *fixed[i];
      continue;
    }
    Rational acc = 0;
    for (const Monomial& m : rhs[i].terms) {
      Rational t = m.coeff;
      for (std::size_t v : m.vars) t *= fixed[v] ? *fixed[v] : x[v];
      acc += t;
    }
    out[i] = acc;
  }
  return out;
}

std::vector<bool> PolySystem::positive() const {
  std::vector<bool> pos(size(), false);
  for (std::size_t i = 0; i < size(); ++i) pos[i] = fixed[i] && *fixed[i] > 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (pos[i] || fixed[i]) continue;
      for (const Monomial& m : rhs[i].terms) {
        if (m.coeff <= 0) continue;
        if (std::all_of(m.vars.begin(), m.vars.end(), [&](std::size_t v) { return bool(pos[v]); })) {
          pos[i] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return pos;
}

void PolySystem::simplify() {
  for (bool changed = true; changed;) {
    changed = false;
    const auto pos = positive();
    for (std::size_t i = 0; i < size(); ++i) {
      if (fixed[i]) continue;
      if (!pos[i]) {
        fixed[i] = Rational(0);
        changed = true;
      } else if (rhs[i].constant()) {
        fixed[i] = rhs[i].constant_term();
        changed = true;
      }
    }
    for (std::size_t i = 0; i < size(); ++i) {
      if (fixed[i]) {
        rhs[i].terms.clear();
        continue;
      }
      for (Monomial& m : rhs[i].terms) {
        std::vector<std::size_t> keep;
        for (std::size_t v : m.vars) {
          if (fixed[v]) m.coeff *= *fixed[v];
          else keep.push_back(v);
        }
        m.vars = std::move(keep);
      }
      rhs[i].normalize();
    }
  }
}

std::string format_polynomial(const PolySystem& sys, const Polynomial& p) {
  if (p.terms.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const Monomial& m : p.terms) {
    if (!first) out << " + ";
    first = false;
    bool need_star = false;
    if (m.vars.empty() || m.coeff != 1) {
      out << to_fraction(m.coeff);
      need_star = true;
    }
    for (std::size_t i = 0; i < m.vars.size();) {
      std::size_t j = i;
      while (j < m.vars.size() && m.vars[j] == m.vars[i]) ++j;
      if (need_star) out << '*';
      out << sys.names[m.vars[i]];
      if (j - i > 1) out << '^' << (j - i);
      need_star = true;
      i = j;
    }
  }
  return out.str();
}

std::string PolySystem::to_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < size(); ++i) {
    out << names[i] << " = ";
    if (fixed[i]) out << to_fraction(*fixed[i]);
    else out << format_polynomial(*this, rhs[i]);
    out << '\n';
  }
  return out.str();
}

Rational Enclosure::width() const {
  Rational w = 0;
  for (std::size_t i = 0; i < lo.size(); ++i) w = std::max(w, Rational(hi[i] - lo[i]));
  return w;
}

bool is_post_fixpoint(const PolySystem& sys, const std::vector<Rational>& x) {
  const auto fx = sys.apply(x);
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys.fixed[i]) continue;
    if (x[i] >= 1) continue;
    if (fx[i] > x[i]) return false;
  }
  return true;
}

namespace {

// Solves (I - F'(x)) Y = rhs over the free variables. Empty unless I - F'(x) is an
// invertible M-matrix, i.e. its inverse exists and is nonnegative.
std::optional<Matrix> solve_jacobian(const PolySystem& sys, const std::vector<Rational>& x,
                                     const std::vector<std::size_t>& free_vars, const Matrix& rhs) {
  const std::size_t m = free_vars.size();
  std::vector<std::size_t> column(sys.size(), 0);
  for (std::size_t r = 0; r < m; ++r) column[free_vars[r]] = r;
  auto value = [&](std::size_t v) { return sys.fixed[v] ? *sys.fixed[v] : x[v]; };
  const std::size_t k = rhs.empty() ? 0 : rhs.front().size();

  Matrix a(m, std::vector<Rational>(m, Rational(0)));
  Matrix b(m, std::vector<Rational>(m + k, Rational(0)));
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = free_vars[r];
    a[r][r] = 1;
    b[r][r] = 1;
    for (std::size_t c = 0; c < k; ++c) b[r][m + c] = rhs[r][c];
    for (const Monomial& mono : sys.rhs[i].terms)
      for (std::size_t p = 0; p < mono.vars.size(); ++p) {
        if (sys.fixed[mono.vars[p]]) continue;
        Rational d = mono.coeff;
        for (std::size_t q = 0; q < mono.vars.size(); ++q)
          if (q != p) d *= value(mono.vars[q]);
        a[r][column[mono.vars[p]]] -= d;
      }
  }
  Matrix sol;
  try {
    sol = solve_linear(std::move(a), std::move(b));
  } catch (const Error&) {
    return std::nullopt;
  }
  Matrix out(m, std::vector<Rational>(k));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c)
      if (sol[r][c] < 0) return std::nullopt;
    for (std::size_t c = 0; c < k; ++c) out[r][c] = sol[r][m + c];
  }
  return out;
}

std::vector<std::size_t> free_variables(const PolySystem& sys) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sys.size(); ++i)
    if (!sys.fixed[i]) out.push_back(i);
  return out;
}

// Positive direction v with F'(x) v < v, scaled to max 1: v = (I - F'(x))^-1 1.
std::optional<std::vector<Rational>> contraction_direction(const PolySystem& sys, const std::vector<Rational>& x,
                                                           unsigned bits) {
  const auto free_vars = free_variables(sys);
  if (free_vars.empty()) return std::nullopt;
  auto sol = solve_jacobian(sys, x, free_vars, Matrix(free_vars.size(), std::vector<Rational>(1, Rational(1))));
  if (!sol) return std::nullopt;
  Rational top = 0;
  for (const auto& row : *sol) top = std::max(top, row[0]);
  std::vector<Rational> v(sys.size(), Rational(0));
  for (std::size_t r = 0; r < free_vars.size(); ++r) v[free_vars[r]] = round_up((*sol)[r][0] / top, bits);
  return v;
}

}  // namespace

std::optional<std::vector<Rational>> newton_step(const PolySystem& sys, const std::vector<Rational>& x) {
  const auto free_vars = free_variables(sys);
  if (free_vars.empty()) return std::nullopt;
  const auto fx = sys.apply(x);
  Matrix rhs(free_vars.size(), std::vector<Rational>(1));
  for (std::size_t r = 0; r < free_vars.size(); ++r) rhs[r][0] = fx[free_vars[r]] - x[free_vars[r]];
  auto sol = solve_jacobian(sys, x, free_vars, rhs);
  if (!sol) return std::nullopt;
  std::vector<Rational> out = x;
  for (std::size_t r = 0; r < free_vars.size(); ++r) out[free_vars[r]] = x[free_vars[r]] + (*sol)[r][0];
  return out;
}

namespace {

// x <= F(x) on the free variables.
bool below_its_image(const PolySystem& sys, const std::vector<Rational>& x) {
  const auto fx = sys.apply(x);
  for (std::size_t i = 0; i < sys.size(); ++i)
    if (!sys.fixed[i] && x[i] > fx[i]) return false;
  return true;
}

// Smallest power of two >= q (q > 0), as a rational.
Rational pow2_ceil(const Rational& q) {
  Rational p = 1;
  while (p < q) p *= 2;
  while (p / 2 >= q) p /= 2;
  return p;
}

}  // namespace

Enclosure solve_enclosure(const PolySystem& sys, const Rational& eps, const SolveOptions& opts) {
  if (eps <= 0) throw Error("eps must be positive");
  const std::size_t n = sys.size();
  Enclosure e;
  e.lo.assign(n, Rational(0));
  e.hi.assign(n, Rational(1));
  for (std::size_t i = 0; i < n; ++i)
    if (sys.fixed[i]) e.lo[i] = e.hi[i] = *sys.fixed[i];

  unsigned work_bits = bits_for(eps) + 40;
  const Rational delta_max = pow2_ceil(eps) == eps ? eps : pow2_ceil(eps) / 2;  // largest 2^-k <= eps
  Rational trigger = eps / 4;
  std::size_t fixed_count = 0;
  for (std::size_t i = 0; i < n; ++i) fixed_count += sys.fixed[i] ? 1 : 0;

  for (;;) {
    if (e.iterations >= opts.max_iterations || work_bits > opts.max_work_bits) {
      for (std::size_t i = 0; i < n; ++i)
        if (!sys.fixed[i]) e.hi[i] = 1;
      e.converged = false;
      return e;
    }
    auto next = sys.apply(e.lo);
    ++e.iterations;
    bool same = true;
    Rational inc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sys.fixed[i]) continue;
      if (next[i] > 1) next[i] = 1;
      if (next[i] < e.lo[i]) throw Error("Kleene iteration is not monotone (internal error)");
      if (next[i] != e.lo[i]) same = false;
      inc = std::max(inc, Rational(next[i] - e.lo[i]));
      if (denominator_bits(next[i]) > 2 * work_bits + opts.rounding_slack)
        next[i] = std::max(e.lo[i], round_down(next[i], work_bits));
    }
    if (same) {
      e.hi = e.lo;
      e.converged = true;
      return e;
    }
    if (opts.newton_limit > 0 && n - fixed_count <= opts.newton_limit) {
      // Newton from a post-fixpoint below the least fixpoint stays below it; the
      // rounded point is kept only if it is still a post-fixpoint.
      if (auto nt = newton_step(sys, e.lo)) {
        std::vector<Rational> y = next;
        for (std::size_t i = 0; i < n; ++i)
          if (!sys.fixed[i]) y[i] = std::max(next[i], std::min(Rational(1), round_down((*nt)[i], work_bits)));
        if (y != next && below_its_image(sys, y)) {
          for (std::size_t i = 0; i < n; ++i)
            if (!sys.fixed[i]) inc = std::max(inc, Rational(y[i] - e.lo[i]));
          next = std::move(y);
        }
      }
    }
    e.lo = std::move(next);
    if (inc >= trigger) continue;

    // Post-fixpoint search around the current iterate, first along the contraction
    // direction of the Jacobian, then uniformly.
    std::vector<std::vector<Rational>> directions;
    if (opts.newton_limit > 0 && n - fixed_count <= opts.newton_limit)
      if (auto v = contraction_direction(sys, e.lo, work_bits)) directions.push_back(std::move(*v));
    directions.emplace_back(n, Rational(1));
    std::optional<std::vector<Rational>> best;
    for (const auto& dir : directions) {
      Rational delta = std::min(delta_max, std::max(Rational(delta_max / 2), inc > 0 ? pow2_ceil(4 * inc) : Rational(0)));
      auto candidate = [&](const Rational& d) {
        std::vector<Rational> hi = e.lo;
        for (std::size_t i = 0; i < n; ++i)
          if (!sys.fixed[i]) hi[i] = std::min(Rational(1), round_up(Rational(e.lo[i] + d * dir[i]), work_bits));
        return hi;
      };
      for (unsigned attempt = 0; attempt < 64; ++attempt) {
        auto hi = candidate(delta);
        ++e.certificate_attempts;
        if (is_post_fixpoint(sys, hi)) {
          best = std::move(hi);
          if (delta <= eps / 1024) break;
          delta /= 2;
        } else if (best) {
          break;
        } else {
          delta *= 2;
          if (delta > delta_max) break;
        }
      }
      if (best) break;
    }
    if (best) {
      e.hi = std::move(*best);
      bool tight = true;
      for (std::size_t i = 0; i < n; ++i) tight = tight && e.hi[i] - e.lo[i] <= eps;
      if (tight) {
        e.converged = true;
        return e;
      }
    }
    trigger = inc / 2;
    work_bits += 8;
  }
}

}  // namespace pregma
