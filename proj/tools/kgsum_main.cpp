#include "kgsum/cli.hpp"

int main(int argc, char** argv) { return kgsum::cli::run(argc, argv); }
