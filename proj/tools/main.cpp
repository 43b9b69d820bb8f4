#include <iostream>
#include <string>
#include <vector>

#include "combagg/cli.hpp"

int main(int argc, char** argv) {
    combagg::cli::configure_logging();
    std::vector<std::string> args(argv + 1, argv + argc);
    return combagg::cli::run_cli(args, std::cout, std::cerr);
}
