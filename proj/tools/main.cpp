#include "entangled/harness.hpp"

int main(int argc, char** argv) { return entangled::cli_main(argc, argv); }
