#include "commands.hpp"

int main(int argc, char** argv) { return econoscale::cli::run_main(argc, argv); }
