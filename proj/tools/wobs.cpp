#include <string>
#include <vector>

#include "wobs/cli.hpp"

int main(int argc, char** argv) {
    return wobs::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
