#include "specdiff/cli.hpp"

int main(int argc, char** argv) { return specdiff::cli::run(argc, argv); }
