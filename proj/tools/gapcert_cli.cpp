#include "cli.hpp"

int main(int argc, char** argv) { return gapcert::cli::run(argc, argv); }
