#include <iostream>
#include <string>
#include <vector>

#include "fairpool/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fairpool::cli::run(args, std::cout, std::cerr);
}
