#include "bloch/presets.hpp"

#include <stdexcept>

namespace bloch {

LindbladSystem figure_system(int figure) {
  switch (figure) {
    case 1: return LindbladSystem::from_diagonal(Vec3(100, 57, 39), Vec3(29, 67, 61));
    case 2: return LindbladSystem::from_diagonal(Vec3(100, 10, 10), Vec3(0, 32, -26));
    case 3: return LindbladSystem::from_diagonal(Vec3(100, 50, 10), Vec3(23, 0, -14));
    case 4: return LindbladSystem::from_diagonal(Vec3(100, 16, 11), Vec3(-3, -8, 68));
    default: throw std::out_of_range("figure must be 1, 2, 3 or 4");
  }
}

std::vector<int> figure_ids() { return {1, 2, 3, 4}; }

}  // namespace bloch
