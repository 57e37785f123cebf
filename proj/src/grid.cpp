#include "llg/grid.hpp"

namespace llg {

std::vector<MultiIndex> multi_indices(int k, bool homogeneous) {
  if (k < 0 || k > 2)
    throw std::invalid_argument("multi_indices: k > 2 unsupported");
  std::vector<MultiIndex> out;
  const int lo = homogeneous ? k : 0;
  for (int order = lo; order <= k; ++order) {
    for (int p1 = order; p1 >= 0; --p1) {
      for (int m1 = order - p1; m1 >= 0; --m1) {
        for (int p2 = order - p1 - m1; p2 >= 0; --p2) {
          const int m2 = order - p1 - m1 - p2;
          out.push_back(MultiIndex{p1, m1, p2, m2});
        }
      }
    }
  }
  return out;
}

}  // namespace llg
