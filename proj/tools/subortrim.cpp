#include <iostream>

#include "subortrim/cli.hpp"

int main(int argc, char** argv) { return subortrim::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
