#include <iostream>

#include "aopbip/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aopbip::run_cli(args, std::cout, std::cerr);
}
