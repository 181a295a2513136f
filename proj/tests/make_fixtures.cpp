// Regenerates the committed fixture files under tests/data.
#include <iostream>

#include "fixtures.hpp"

int main() {
  using namespace cafbp;
  using namespace cafbp::fixtures;
  write_file(data_path("fixture_clean.y4m"), serialize_y4m(clean_sequence()));
  write_file(data_path("fixture_noisy.y4m"), serialize_y4m(noisy_sequence()));
  std::cout << "wrote fixtures to " << CAFBP_TEST_DATA << "\n";
  return 0;
}
