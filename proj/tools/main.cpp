#include "esglab/cli.hpp"

int main(int argc, char** argv) { return esglab::command_dispatch(argc, argv); }
