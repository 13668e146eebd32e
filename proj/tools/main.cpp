#include "beamloc/cli.hpp"

int main(int argc, char** argv) { return beamloc::cli::run_cli(argc, argv); }
