#include "pragrad/cli.hpp"

int main(int argc, char** argv) { return pragrad::run_main(argc, argv); }
