#include "riskformer/cli.hpp"

int main(int argc, char** argv) { return riskformer::cli_main(argc, argv); }
