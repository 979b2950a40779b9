#include <iostream>

#include "skillshift/cli.hpp"

int main(int argc, char** argv) { return skillshift::cli::run(argc, argv, std::cout, std::cerr); }
