#include "altbm/cli.hpp"

int main(int argc, char** argv) { return altbm::cli::main(argc, argv); }
