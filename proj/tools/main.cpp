#include "commands.hpp"

int main(int argc, char** argv) { return cavem::cli::run(argc, argv); }
