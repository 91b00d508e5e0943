#include "aet/cli.hpp"

int main(int argc, char** argv) { return aet::cli_main(argc, argv); }
