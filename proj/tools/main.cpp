#include "commands.hpp"

int main(int argc, char** argv) { return hvacd::cli::run(argc, argv); }
