#include "sdv/cli.hpp"
#include "sdv/ndmath.hpp"

int main(int argc, char** argv) {
    sdv::tune_allocator();
    return sdv::cli::run_cli(argc, argv);
}
