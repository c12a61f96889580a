#pragma once

namespace ndf::cli {

/// Subcommands: verify, decompose, envelope, flow, demo.
/// Returns 0 when every check passed, 1 on a violation, 2 on a usage or
/// config error.
int run(int argc, const char* const* argv);

}  // namespace ndf::cli
