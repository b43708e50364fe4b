// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/cli.hpp"

int main(int argc, char** argv) { return qwl::cli::main(argc, argv); }
