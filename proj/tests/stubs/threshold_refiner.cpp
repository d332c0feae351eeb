// Minimal external refiner: thresholds the similarity map at 0.5.
// Usage: threshold_refiner <image> <similarity.otf> <mask.png>

#include <cstdio>
#include <exception>

#include "otas/otf.hpp"
#include "otas/png_io.hpp"
#include "otas/refinement.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: threshold_refiner <image> <similarity.otf> <mask.png>\n");
    return 2;
  }
  try {
    const otas::TokenMatrix s = otas::as_matrix(otas::read_otf(argv[2]));
    otas::BinaryMask mask(s.rows, s.cols);
    for (std::size_t i = 0; i < s.data.size(); ++i) mask.data[i] = s.data[i] >= 0.5f ? 1 : 0;
    otas::write_png_mask(argv[3], mask);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "threshold_refiner: %s\n", e.what());
    return 1;
  }
  return 0;
}
