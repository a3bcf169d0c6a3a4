#include "ssaudit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ssaudit::cli_main(argc, argv, std::cout, std::cerr); }
