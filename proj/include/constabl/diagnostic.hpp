#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "constabl/model.hpp"

namespace constabl {

enum class Severity { error, warning };

/// A located message with a stable code (P001, T1, V-scope, ...).
struct Diagnostic {
  Severity severity = Severity::error;
  std::string file;
  SourceLocation location;
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

/// `file:line:col: severity[code]: message`
std::string format(const Diagnostic& d);

bool has_errors(const Diagnostics& ds);

void print(std::ostream& os, const Diagnostics& ds);

}  // namespace constabl
