#include "exclusim/sampler.hpp"

#include <cmath>
#include <limits>

#include "exclusim/errors.hpp"

namespace exclusim {

DisplacementTable::DisplacementTable(const JumpKernel& kernel) : kernel_(kernel) {
  const std::int64_t r_max = kernel.r_max();
  if (r_max < 1) throw DomainError("build_displacement_table: r_max must be >= 1");
  if (r_max > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("build_displacement_table: r_max too large for the alias table");
  }
  const auto size = static_cast<std::size_t>(r_max);
  std::vector<double> weight(size);
  for (std::size_t i = 0; i < size; ++i) {
    weight[i] = std::pow(static_cast<double>(i + 1), -kernel.gamma() - 1.0);
  }
  // Sum smallest weights first.
  double sum = 0.0;
  for (std::size_t i = size; i-- > 0;) sum += weight[i];
  weight_sum_ = sum;
  stored_mass_ = 2.0 * kernel.c_gamma() * sum;

  // Vose's alias construction.
  threshold_.assign(size, 1.0);
  alias_.resize(size);
  std::vector<double> scaled(size);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  small.reserve(size);
  large.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    scaled[i] = weight[i] * static_cast<double>(size) / sum;
    alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    threshold_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : small) threshold_[i] = 1.0;
  for (auto i : large) threshold_[i] = 1.0;
}

double DisplacementTable::conditional_probability(std::int64_t r) const {
  if (r < 1 || r > r_max()) return 0.0;
  return std::pow(static_cast<double>(r), -kernel_.gamma() - 1.0) / weight_sum_;
}

std::int64_t DisplacementTable::sample_magnitude(RngStream& rng) const {
  const auto column = rng.below(threshold_.size());
  const double u = rng.uniform();
  const auto pick = u < threshold_[column] ? column : alias_[column];
  return static_cast<std::int64_t>(pick) + 1;
}

DisplacementDraw DisplacementTable::sample(RngStream& rng) const {
  if (rng.uniform() < kernel_.tail_mass()) return TailOverflow{};
  Displacement out;
  const std::uint64_t axis_sign = rng.below(static_cast<std::uint64_t>(2 * kernel_.d()));
  out.direction = static_cast<int>(axis_sign >> 1);
  out.sign = (axis_sign & 1U) ? -1 : 1;
  out.magnitude = sample_magnitude(rng);
  return out;
}

DisplacementTable build_displacement_table(const JumpKernel& kernel) {
  return DisplacementTable(kernel);
}

DisplacementDraw sample_displacement(const DisplacementTable& table, RngStream& rng) {
  return table.sample(rng);
}

}  // namespace exclusim
