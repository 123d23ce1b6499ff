#include "bloch/cli.hpp"

int main(int argc, char** argv) { return bloch::cli::run(argc, argv); }
