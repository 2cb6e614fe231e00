#include "permez/cli.hpp"

int main(int argc, char** argv) { return permez::cli::run(argc, argv); }
