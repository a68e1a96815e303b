#include "exclusim/density_field.hpp"

#include <cmath>

#include "exclusim/errors.hpp"

namespace exclusim {

std::array<std::int64_t, kMaxDim> Mesh::shape() const {
  std::array<std::int64_t, kMaxDim> s{};
  s.fill(1);
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::int64_t span = hi[k] - lo[k] + 1;
    s[k] = span <= 0 ? 0 : (span + cell_sites - 1) / cell_sites;
  }
  return s;
}

std::int64_t Mesh::cell_count() const {
  std::int64_t c = 1;
  for (auto v : shape()) c *= v;
  return c;
}

std::int64_t DensityField::index(const std::array<std::int64_t, kMaxDim>& cell) const {
  std::int64_t idx = 0;
  for (int i = d - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    idx = idx * shape[k] + cell[k];
  }
  return idx;
}

Point DensityField::cell_center(std::int64_t idx) const {
  Point u{};
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::int64_t c = idx % shape[k];
    idx /= shape[k];
    u[k] = origin[k] + (static_cast<double>(c) + 0.5) * width[k];
  }
  return u;
}

double DensityField::at(const Point& u) const {
  std::array<std::int64_t, kMaxDim> cell{};
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto c = static_cast<std::int64_t>(std::floor((u[k] - origin[k]) / width[k]));
    if (c < 0 || c >= shape[k]) throw DomainError("DensityField::at: point outside the grid");
    cell[k] = c;
  }
  return values[static_cast<std::size_t>(index(cell))];
}

DensityField sample_field(int d, const Point& origin, const Point& width,
                          const std::array<std::int64_t, kMaxDim>& shape,
                          const std::function<double(const Point&)>& f) {
  if (d < 1 || d > kMaxDim) throw DomainError("sample_field: dimension out of range");
  DensityField field{d, origin, width, shape, {}};
  std::int64_t count = 1;
  for (int i = 0; i < d; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (shape[k] < 1 || !(width[k] > 0.0)) throw MeshError("sample_field: empty grid");
    count *= shape[k];
  }
  field.values.resize(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) field.values[static_cast<std::size_t>(i)] = f(field.cell_center(i));
  return field;
}

}  // namespace exclusim
