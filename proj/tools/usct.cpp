// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "usct/cli.hpp"

int main(int argc, char** argv) { return usct::cli::run(argc, argv, std::cout, std::cerr); }
