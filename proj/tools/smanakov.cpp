#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv) {
  return smanakov::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
