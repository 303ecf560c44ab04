#include "cli.hpp"

int main(int argc, char** argv) { return framefinder::cli::run_cli(argc, argv); }
