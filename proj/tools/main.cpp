#include "cqs/cli.hpp"

int main(int argc, char** argv) { return cqs::cli::main(argc, argv); }
