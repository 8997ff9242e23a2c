#include "sctree/cli.hpp"

int main(int argc, char** argv) { return sctree::run_cli(argc, argv); }
