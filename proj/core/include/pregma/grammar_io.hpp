#pragma once

#include <string>
#include <string_view>

#include "pregma/grammar.hpp"
#include "pregma/validation.hpp"

namespace pregma {

struct GrammarFile {
  Grammar grammar;
  ProbabilityMap mu;
};

/// Line-based grammar text. Directives:
///
///     nonterminal <name> <arity>      terminal <name> <arity>     colour <name>
///     prob <terminal> <p/q>           axiom <name>
///     default-colour <colour>         absorbing <colour> | absorbing *
///     rule <name> [inputs v1 ... vk]
///       vertex <v> ...
///       arc <label> <v> <w>
///       hyperarc <label> <v1> ... <vk>
///       colour <colour> <v>
///
/// A rule body is its indented lines; it ends at a blank or unindented line.
/// `default-colour` is applied to non-input vertices that end up with no colour, then
/// every axiom-rule vertex whose name is not a declared symbol gets a colour of that name.
/// Throws Error("line N: ...") on malformed input.
GrammarFile parse_grammar(std::string_view text);
GrammarFile load_grammar(const std::string& path);

/// Declares and attaches a colour named after each axiom-rule vertex, skipping names
/// that are already symbols.
void add_axiom_vertex_colours(Grammar& g);

/// Canonical text form; parse_grammar(serialize_grammar(x)) reproduces x.
std::string serialize_grammar(const Grammar& g, const ProbabilityMap& mu);

/// Graphviz rendering of an expansion. Tooltips carry `Lev/Can`.
std::string to_dot(const GrammarIndex& index, const Expansion& ex);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Splits on ASCII whitespace.
std::vector<std::string> split_words(std::string_view line);

}  // namespace pregma
