#include <iostream>

#include "obsmix_cli/app.hpp"

int main(int argc, char **argv) { return obsmix::cli::run(argc, argv, std::cout, std::cerr); }
