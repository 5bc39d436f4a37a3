#include <iostream>

#include "lindley/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lindley::cli::run(args, std::cout, std::cerr);
}
