#include "vssqn/harness/cli.hpp"

int main(int argc, char** argv) { return vssqn::cli_run(argc, argv); }
