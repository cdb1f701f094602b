#include <iostream>

#include "itercert/cli.hpp"

int main(int argc, char** argv) { return itercert::cli::run(argc, argv, std::cout, std::cerr); }
