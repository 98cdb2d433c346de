#include "constabl/diagnostic.hpp"

#include <ostream>
#include <sstream>

namespace constabl {

std::string format(const Diagnostic& d) {
  std::ostringstream os;
  os << d.file << ':' << d.location.line << ':' << d.location.column << ": "
     << (d.severity == Severity::error ? "error" : "warning") << '[' << d.code << "]: " << d.message;
  return os.str();
}

bool has_errors(const Diagnostics& ds) {
  for (const auto& d : ds) {
    if (d.severity == Severity::error) return true;
  }
  return false;
}

void print(std::ostream& os, const Diagnostics& ds) {
  for (const auto& d : ds) os << format(d) << '\n';
}

}  // namespace constabl
