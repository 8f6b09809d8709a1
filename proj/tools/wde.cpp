#include "wde/cli.hpp"

int main(int argc, char** argv) { return wde::run(argc, argv); }
