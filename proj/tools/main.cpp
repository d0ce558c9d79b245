#include "landau/cli.hpp"

int main(int argc, char** argv) { return landau::run_cli(argc, argv); }
