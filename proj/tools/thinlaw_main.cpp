#include "thinlaw/cli.hpp"

int main(int argc, char** argv) { return thinlaw::cli::main_entry(argc, argv); }
