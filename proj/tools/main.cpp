#include "ecodec/cli.hpp"

int main(int argc, char** argv) { return ecodec::run_cli(argc, argv); }
