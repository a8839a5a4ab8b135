// Regenerates the frozen sweep family: make_family <out.json> [seed]
#include <cstdlib>
#include <iostream>

#include "nhg/test_function.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_family <out.json> [seed]\n";
    return 2;
  }
  const unsigned long long seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  const nhg::GroupParams G({1, 1}, {0.5, 1.0});
  nhg::save_family(argv[1], nhg::generate_family(G, 32, seed));
  return 0;
}
