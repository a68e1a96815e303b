#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "exclusim/model.hpp"
#include "exclusim/rng.hpp"

namespace exclusim {

struct Displacement {
  int direction = 0;  // 0-based axis
  int sign = 1;       // +1 or -1
  std::int64_t magnitude = 1;
};

// Draw that landed beyond r_max; treated by the simulator as a rejected attempt.
struct TailOverflow {};

using DisplacementDraw = std::variant<Displacement, TailOverflow>;

// Alias table over jump magnitudes 1..r_max. Direction and sign are drawn
// separately since the kernel factorizes into (axis, sign, magnitude).
class DisplacementTable {
 public:
  explicit DisplacementTable(const JumpKernel& kernel);

  const JumpKernel& kernel() const noexcept { return kernel_; }
  std::int64_t r_max() const noexcept { return kernel_.r_max(); }
  double tail_mass() const noexcept { return kernel_.tail_mass(); }
  // Total kernel mass carried by magnitudes <= r_max.
  double stored_mass() const noexcept { return stored_mass_; }
  // P(magnitude = r | no tail overflow).
  double conditional_probability(std::int64_t r) const;

  DisplacementDraw sample(RngStream& rng) const;
  std::int64_t sample_magnitude(RngStream& rng) const;

 private:
  JumpKernel kernel_;
  double stored_mass_ = 0.0;
  double weight_sum_ = 0.0;
  std::vector<double> threshold_;
  std::vector<std::uint32_t> alias_;
};

DisplacementTable build_displacement_table(const JumpKernel& kernel);
DisplacementDraw sample_displacement(const DisplacementTable& table, RngStream& rng);

}  // namespace exclusim
