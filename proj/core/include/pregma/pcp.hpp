#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pregma/grammar_io.hpp"
#include "pregma/pctl.hpp"

namespace pregma {

/// Pairs (u_i, v_i) of nonempty words over {0,1}.
struct PcpInstance {
  std::vector<std::pair<std::string, std::string>> pairs;
};

/// One `pair <u> <v>` line per pair; `#` starts a comment.
PcpInstance parse_pcp(std::string_view text);
PcpInstance load_pcp(const std::string& path);

struct PcpGadget {
  GrammarFile file;
  /// s & (tt U[=1/2] green), the equality expanded into two thresholds.
  FormulaPtr formula;
};

/// Gadget grammar: Z plus one arity-2 nonterminal New<i> per pair. Each New<i> copy
/// holds an s-vertex that moves with probability 1/2 onto the first cell of a v_i
/// chain (upper) and of a u_i chain (lower). A cell passes on with 1/2 and drops into
/// a coloured leaf with 1/2; u-cells are green for 1, v-cells green for 0. The last
/// cell continues at the instance input, i.e. the parent's first cell; at the top the
/// lower and upper ends each split 1/2 green, 1/2 red. Leaves loop on `b`.
PcpGadget encode(const PcpInstance& p);

/// Address of the s-vertex whose path to the top spells u_{seq[0]} u_{seq[1]} ...
/// (indices 1-based). Throws Error for an empty sequence or an index out of range.
VertexAddress s_address(const Grammar& gadget, const PcpInstance& p, const std::vector<unsigned>& seq);

std::string concat_u(const PcpInstance& p, const std::vector<unsigned>& seq);
std::string concat_v(const PcpInstance& p, const std::vector<unsigned>& seq);

/// Sum of 2^-k over positions k (1-based) where the word has `bit`.
Rational dyadic_mass(const std::string& word, char bit);

/// Exact P(s-vertex |= tt U red): half the red leaf mass of each side plus the red
/// half of each terminator, i.e.
///   1/2 (mass(U,'0') + mass(V,'1')) + 1/4 (2^-|U| + 2^-|V|).
Rational closed_form(const PcpInstance& p, const std::vector<unsigned>& seq);

}  // namespace pregma
