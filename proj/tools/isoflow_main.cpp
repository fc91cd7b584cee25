#include "isoflow/experiments.hpp"

int main(int argc, char** argv) { return isoflow::cli_main(argc, argv); }
