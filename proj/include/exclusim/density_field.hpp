#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "exclusim/model.hpp"

namespace exclusim {

// Partition of the site window [lo, hi] (inclusive, per axis) into cubic
// cells of cell_sites sites per axis; the last cell on an axis may be short.
struct Mesh {
  int d = 1;
  Site lo{};
  Site hi{};
  std::int64_t cell_sites = 1;

  std::array<std::int64_t, kMaxDim> shape() const;
  std::int64_t cell_count() const;
};

// Piecewise-constant field on a regular grid of cells in macroscopic
// coordinates. values are cell averages, coordinate 0 fastest.
struct DensityField {
  int d = 1;
  Point origin{};  // lower corner of cell 0
  Point width{};   // cell widths per axis
  std::array<std::int64_t, kMaxDim> shape{};
  std::vector<double> values;

  std::int64_t index(const std::array<std::int64_t, kMaxDim>& cell) const;
  Point cell_center(std::int64_t index) const;
  // Value of the cell containing u; throws DomainError outside the grid.
  double at(const Point& u) const;
};

// Field holding f at the cell midpoints of a regular grid.
DensityField sample_field(int d, const Point& origin, const Point& width,
                          const std::array<std::int64_t, kMaxDim>& shape,
                          const std::function<double(const Point&)>& f);

}  // namespace exclusim
