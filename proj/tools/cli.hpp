// Copyright 2026 The muse authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "muse/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace muse::cli {

enum ExitCode : int { Ok = 0, ConfigError = 2, DataError = 3, NumericalError = 4 };

/// Exit code for a library error kind.
int exit_code(ErrorKind kind) noexcept;

/// Runs one command line (args excludes the program name). Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace muse::cli
