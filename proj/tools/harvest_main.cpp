#include "harvest/cli.hpp"

int main(int argc, char **argv) { return harvest::cli::run(argc, argv); }
