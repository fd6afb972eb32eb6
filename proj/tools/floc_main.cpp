#include "floc/cli.hpp"

int main(int argc, char** argv) {
    return floc::run_cli({argv + 1, argv + argc});
}
