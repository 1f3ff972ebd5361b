#include "commands.hpp"

int main(int argc, char** argv) { return pavoc::cli::run(argc, argv); }
