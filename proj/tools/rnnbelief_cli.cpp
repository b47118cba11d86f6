#include "rnnbelief/cli/cli.hpp"

int main(int argc, char** argv) { return rnnbelief::cli::run_cli(argc, argv); }
