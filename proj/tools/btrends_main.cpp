#include "bt/cli.hpp"

int main(int argc, char** argv) { return bt::cli::run(argc, argv); }
