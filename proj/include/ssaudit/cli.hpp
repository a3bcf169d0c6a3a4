#pragma once

#include <iosfwd>

namespace ssaudit {

/// The `ssaudit` command line. Returns the process exit status:
/// 0 fully compliant, 1 some NO verdict, 2 some file failed to load,
/// 3 usage or configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssaudit
