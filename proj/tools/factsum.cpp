#include "factsum/cli.hpp"

int main(int argc, char** argv) { return factsum::cli::run(argc, argv); }
