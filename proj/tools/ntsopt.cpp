#include "ntsopt/cli.hpp"

int main(int argc, char** argv) { return ntsopt::cli::run(argc, argv); }
