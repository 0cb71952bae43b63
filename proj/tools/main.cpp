#include "evtaxi/cli.hpp"

int main(int argc, char** argv) { return evtaxi::run_cli(argc, argv); }
