#include "twinforge/cli.hpp"

int main(int argc, char** argv) { return twinforge::run(argc, argv); }
