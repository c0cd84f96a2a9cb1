#include <iostream>

#include "mkvldp/cli.hpp"

int main(int argc, char** argv) { return mkvldp::cli::run_cli(argc, argv, std::cout, std::cerr); }
