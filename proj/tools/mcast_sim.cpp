#include "mcastsim/cli.hpp"

int main(int argc, char** argv) { return mcast::cli_main(argc, argv); }
