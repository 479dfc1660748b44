#include "forgetbench/cli/cli.hpp"

int main(int argc, char** argv) { return forgetbench::cli::parse_and_dispatch(argc, argv); }
