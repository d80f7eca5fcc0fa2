#include <collab/cli.hpp>

int main(int argc, char** argv) { return collab::cli_main(argc, argv); }
