#include "nbarrier/cli.hpp"

int main(int argc, char** argv) { return nbarrier::cli::run_main(argc, argv); }
