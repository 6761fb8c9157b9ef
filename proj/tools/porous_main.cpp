#include "porous/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  try {
    return porous::cli::dispatch(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return porous::cli::kExitRuntime;
  }
}
