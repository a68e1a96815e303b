#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "exclusim/model.hpp"
#include "exclusim/rng.hpp"

namespace exclusim {

// Initial profile u -> g(u) in [0,1].
using ProfileFn = std::function<double(const Point&)>;

// Exclusion configuration on a LatticeBox: occupancy per site plus a particle
// list with a reverse index so that a uniformly chosen particle and a swap are
// both O(1).
class Configuration {
 public:
  explicit Configuration(const LatticeBox& box);

  const LatticeBox& box() const noexcept { return box_; }
  std::int64_t particle_count() const noexcept { return static_cast<std::int64_t>(particles_.size()); }
  bool occupied(std::int64_t site_index) const { return occupancy_[site_index] != 0; }
  bool occupied(const Site& x) const { return occupied(box_.index(x)); }
  const std::vector<std::uint8_t>& occupancy() const noexcept { return occupancy_; }
  const std::vector<std::int64_t>& particles() const noexcept { return particles_; }

  void add_particle(std::int64_t site_index);
  // Moves the particle at `from` to the empty site `to`.
  void move(std::int64_t from, std::int64_t to);

  // Throws std::logic_error if occupancy, particle list and reverse index disagree.
  void check_invariants() const;

 private:
  LatticeBox box_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<std::int64_t> particles_;
  std::vector<std::int32_t> slot_;
};

// Bernoulli product configuration with marginals g(x / n).
Configuration init_from_profile(const ProfileFn& g, const LatticeBox& box, RngStream& rng);

}  // namespace exclusim
