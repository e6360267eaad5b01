#include "snnopt/cli.hpp"

int main(int argc, char** argv) { return snnopt::run_cli(argc, argv); }
