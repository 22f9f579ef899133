#include "ajscc/cli.hpp"

int main(int argc, char** argv) { return ajscc::cli::run_cli(argc, argv); }
