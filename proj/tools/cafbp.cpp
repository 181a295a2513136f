#include <iostream>

#include "cafbp/cli.hpp"

int main(int argc, char** argv) { return cafbp::run_cli(argc, argv, std::cout, std::cerr); }
