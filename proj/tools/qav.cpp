#include "cli.hpp"

int main(int argc, char** argv) { return qav::cli::run(argc, argv); }
