// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors
//
// Batch certification front end. Exit codes: 0 verdict true, 1 verdict false (the report
// carries witnesses), 2 input or spec error.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwl/io.hpp"

namespace qwl::cli {

inline constexpr int kExitTrue = 0;
inline constexpr int kExitFalse = 1;
inline constexpr int kExitError = 2;

struct Command {
  std::string verb;
  std::vector<std::string> inputs;
  std::optional<std::string> t_grid;  // start:stop:log:count
  std::optional<double> eps_psd;
  std::optional<double> eps_eq;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string output;  // file, or a directory for `reduce`
};

struct Outcome {
  int exit_code = kExitError;
  io::Json report;
};

const std::vector<std::string>& verbs();

/// "start:stop:log:count" (or lin) as a strictly decreasing grid. Throws ParseError.
TGrid parse_grid(const std::string& text);

/// Never throws; library errors become exit 2 with {"error": kind, "message": ...}.
Outcome run(const Command& cmd);

/// JSON text, or one "path = value" line per leaf for format "text". Throws ParseError on an
/// unknown format.
std::string render(const io::Json& report, const std::string& format);

/// Full entry point: flag parsing, dispatch and output.
int main(int argc, char** argv);

}  // namespace qwl::cli
