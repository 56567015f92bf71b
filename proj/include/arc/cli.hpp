// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace arc {

// Entry point of the `arc` tool. Returns a process exit code (see ExitCode).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arc
