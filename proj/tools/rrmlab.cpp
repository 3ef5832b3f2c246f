#include <string>
#include <vector>

#include "rrmlab/harness.hpp"

int main(int argc, char** argv) {
    return rrm::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
