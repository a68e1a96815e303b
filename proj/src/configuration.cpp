#include "exclusim/configuration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "exclusim/errors.hpp"

namespace exclusim {

Configuration::Configuration(const LatticeBox& box) : box_(box) {
  if (box.site_count() > std::numeric_limits<std::int32_t>::max()) {
    throw DomainError("Configuration: box has too many sites");
  }
  occupancy_.assign(static_cast<std::size_t>(box.site_count()), 0);
  slot_.assign(static_cast<std::size_t>(box.site_count()), -1);
}

void Configuration::add_particle(std::int64_t site_index) {
  if (occupancy_.at(site_index) != 0) throw std::logic_error("add_particle: site already occupied");
  occupancy_[site_index] = 1;
  slot_[site_index] = static_cast<std::int32_t>(particles_.size());
  particles_.push_back(site_index);
}

void Configuration::move(std::int64_t from, std::int64_t to) {
  if (occupancy_[from] == 0 || occupancy_[to] != 0) {
    throw std::logic_error("Configuration::move: exclusion rule violated");
  }
  const auto slot = slot_[from];
  particles_[slot] = to;
  slot_[to] = slot;
  slot_[from] = -1;
  occupancy_[from] = 0;
  occupancy_[to] = 1;
}

void Configuration::check_invariants() const {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < occupancy_.size(); ++i) {
    if (occupancy_[i] > 1) throw std::logic_error("occupancy exceeds one");
    if (occupancy_[i] == 1) {
      ++count;
      const auto slot = slot_[i];
      if (slot < 0 || particles_.at(slot) != static_cast<std::int64_t>(i)) {
        throw std::logic_error("particle index out of sync with occupancy");
      }
    } else if (slot_[i] != -1) {
      throw std::logic_error("empty site carries a particle slot");
    }
  }
  if (count != particle_count()) throw std::logic_error("particle count mismatch");
}

Configuration init_from_profile(const ProfileFn& g, const LatticeBox& box, RngStream& rng) {
  Configuration cfg(box);
  for (std::int64_t i = 0; i < box.site_count(); ++i) {
    const double p = g(box.position(box.site(i)));
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InitializationError("init_from_profile: profile value " + std::to_string(p) +
                                " outside [0,1]");
    }
    if (rng.uniform() < p) cfg.add_particle(i);
  }
  return cfg;
}

}  // namespace exclusim
