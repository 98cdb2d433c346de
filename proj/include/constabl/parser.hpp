#pragma once

// Concrete .cstl syntax:
//
//   model      := "statechart" ID "{" [eventdecl] vardecl* statebody "}"
//   eventdecl  := "events" ID ("," ID)* ";"
//   statebody  := ["entry" block] ["exit" block] state* ["init" ID ("," ID)* ";"] transition*
//   state      := "state" ID [":" "shell"] "{" vardecl* statebody "}"
//   vardecl    := ("static"|"local"|"param") ID ":" ("int"|"bool") "=" expr ";"
//   transition := "transition" ID ":" qid "->" qid "on" ID ["[" expr "]"] ["/" block] ";"
//   qid        := ID ("." ID)*
//   block      := "{" stmt* "}"
//   stmt       := ID ":=" expr ";" | "skip" ";" | "while" "(" expr ")" block
//               | "if" "(" expr ")" block ["else" (block | if-stmt)]
//
// Expressions support the usual boolean operators (`or`/`||` and friends)
// plus comparisons and integer arithmetic. Builtins: min max abs. Comments are `// ...` and `/* ... */`.

#include <optional>
#include <string>
#include <string_view>

#include "constabl/diagnostic.hpp"
#include "constabl/model.hpp"

namespace constabl {

struct ParseResult {
  std::optional<Model> model;
  Diagnostics diagnostics;

  bool ok() const { return model.has_value(); }
};

ParseResult parse_model(std::string_view text, std::string file = "<input>");

/// Reads and parses a file. A missing file yields a single P000 diagnostic.
ParseResult parse_file(const std::string& path);

/// Parses a standalone expression. When `predicate` is set, dotted variable
/// names (`State.var`) and the `in(State)` membership test are accepted.
std::optional<Expr> parse_expression(std::string_view text, Diagnostics& diags,
                                     bool predicate = false);

std::string pretty_print(const Model& model);
std::string to_source(const Expr& e);
std::string to_source(const Stmt& s);

}  // namespace constabl
