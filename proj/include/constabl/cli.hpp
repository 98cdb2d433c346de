#pragma once

#include <iostream>

namespace constabl {

/// Entry point of the `constabl` tool. Returns 0 on success and 2 on usage
/// errors. Any diagnostic, finding or failed step gives 1.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
             std::istream& in = std::cin);

}  // namespace constabl
