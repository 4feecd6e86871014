#include <string>
#include <vector>

#include "rtk/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rtk::run_cli(args);
}
