// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "arc/cli.hpp"

int main(int argc, char** argv) { return arc::run_cli(argc, argv, std::cout, std::cerr); }
