#pragma once

#include <iosfwd>

namespace sensprune {

/// Entry point of the `sensprune` tool. Returns 0 on success, 1 on a
/// validation error, 2 on a runtime error. With --json, errors go to `err`
/// as {"error": <code>, "message": <text>}.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sensprune
