#include "sdns/config.hpp"

#include <iostream>

int main(int argc, char** argv) { return sdns::run_cli(argc, argv, std::cout, std::cerr); }
