#include <iostream>

#include "tbandit/cli.hpp"

int main(int argc, char** argv) { return tbandit::run_cli(argc, argv, std::cout, std::cerr); }
