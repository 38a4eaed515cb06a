#include <iostream>

#include "factuality/cli.hpp"

int main(int argc, char** argv) { return factuality::cli::run(argc, argv, std::cout, std::cerr); }
