#include "mglab/cli.hpp"

int main(int argc, char** argv) { return mglab::cli::run(argc, argv); }
