#include "derivelog/point_set.hpp"

namespace derivelog {

std::string PointSet::to_string() const {
  std::string out = "{";
  bool first_item = true;
  for_each([&](Point p) {
    if (!first_item) out += ',';
    out += std::to_string(p);
    first_item = false;
  });
  out += '}';
  return out;
}

PointSet preimage(const std::vector<Point>& map, const PointSet& target) {
  PointSet out;
  for (std::size_t x = 0; x < map.size(); ++x) {
    if (target.contains(map[x])) out.insert(static_cast<Point>(x));
  }
  return out;
}

PointSet image(const std::vector<Point>& map, const PointSet& source) {
  PointSet out;
  source.for_each([&](Point x) { out.insert(map[x]); });
  return out;
}

}  // namespace derivelog
