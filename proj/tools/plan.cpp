#include "windplan/cli.hpp"

int main(int argc, char** argv) { return windplan::dispatch(argc, argv); }
