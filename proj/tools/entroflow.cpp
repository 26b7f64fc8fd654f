#include "entroflow/cli.hpp"

int main(int argc, char** argv) { return entroflow::parse_and_dispatch(argc, argv); }
