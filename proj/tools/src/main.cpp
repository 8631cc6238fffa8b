#include <iostream>
#include <string>
#include <vector>

#include "bankrun/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return bankrun::cli::run_cli(args, std::cout, std::cerr);
}
