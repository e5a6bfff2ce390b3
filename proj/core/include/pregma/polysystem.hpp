#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pregma/rational.hpp"

namespace pregma {

/// coeff * x[vars[0]] * x[vars[1]] * ...  (vars sorted, repeats allowed)
struct Monomial {
  Rational coeff{0};
  std::vector<std::size_t> vars;
};

struct Polynomial {
  std::vector<Monomial> terms;

  /// Merges equal monomials, drops zero coefficients, sorts by (degree, vars).
  void normalize();
  bool constant() const;
  Rational constant_term() const;
};

/// x = F(x) with F monotone on [0,1]^n. Fixed variables are known constants that no
/// longer occur in any right-hand side.
struct PolySystem {
  std::vector<std::string> names;
  std::vector<Polynomial> rhs;
  std::vector<std::optional<Rational>> fixed;

  std::size_t size() const { return names.size(); }
  std::size_t add_variable(std::string name);
  std::optional<std::size_t> find(const std::string& name) const;

  /// F(x), free variables only (fixed entries of x are ignored).
  std::vector<Rational> apply(const std::vector<Rational>& x) const;
  /// Variables whose least-fixpoint value is positive (boolean Kleene iteration).
  std::vector<bool> positive() const;
  /// Repeatedly replaces structurally zero and constant variables by their values.
  void simplify();

  /// One `name = polynomial` line per variable, in index order.
  std::string to_text() const;
};

std::string format_polynomial(const PolySystem& sys, const Polynomial& p);

struct SolveOptions {
  std::size_t max_iterations = 200000;
  /// Kleene iterates are rounded down once their denominators exceed this many bits
  /// beyond twice the working precision.
  unsigned rounding_slack = 64;
  /// Newton steps (exact linear solves) accelerate the lower bound on systems with at
  /// most this many free variables; 0 disables them.
  std::size_t newton_limit = 160;
  /// Each failed certificate round adds 8 bits of working precision; past this the
  /// solver gives up with hi = 1.
  unsigned max_work_bits = 1024;
};

struct Enclosure {
  std::vector<Rational> lo;
  std::vector<Rational> hi;
  bool converged = false;
  std::size_t iterations = 0;
  /// Number of post-fixpoint candidates tested.
  std::size_t certificate_attempts = 0;

  Interval at(std::size_t i) const { return Interval{lo[i], hi[i]}; }
  Rational width() const;
};

/// lo: Kleene/Newton iterates from 0 (possibly rounded down); hi: a vector with F(hi) <= hi
/// checked exactly. On success hi - lo <= eps componentwise.
Enclosure solve_enclosure(const PolySystem& sys, const Rational& eps, const SolveOptions& opts = {});

/// True iff F(x) <= x componentwise, x treated as clipped to [0,1].
/// Newton step x + (I - F'(x))^-1 (F(x) - x) on the free variables, returned only when
/// I - F'(x) is an invertible M-matrix (nonnegative inverse).
std::optional<std::vector<Rational>> newton_step(const PolySystem& sys, const std::vector<Rational>& x);

bool is_post_fixpoint(const PolySystem& sys, const std::vector<Rational>& x);

}  // namespace pregma
