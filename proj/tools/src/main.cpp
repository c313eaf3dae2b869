#include "pixmotion/cli.hpp"

int main(int argc, char** argv) { return pixmotion::run_cli(argc, argv); }
