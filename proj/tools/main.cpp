#include <iostream>

#include "clustinfo/cli.hpp"

int main(int argc, char** argv) { return clustinfo::run_cli(argc, argv, std::cout, std::cerr); }
