#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace devalign::cli {

// Exit codes: 0 success, 2 validation or usage failure, 1 internal error.
// Failures print one `ERR<TAB>code<TAB>detail` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace devalign::cli
