#pragma once

#include <ostream>

namespace s2p {

/// Entry point of the s2p tool. Returns 0 on success, 1 on a runtime failure
/// and 2 on a usage error (synopsis written to `err`).
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace s2p
