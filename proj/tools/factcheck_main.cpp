#include <iostream>
#include <string>
#include <vector>

#include "factcheck/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return factcheck::run_cli(args, std::cout, std::cerr);
}
