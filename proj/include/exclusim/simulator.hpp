#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "exclusim/configuration.hpp"
#include "exclusim/model.hpp"
#include "exclusim/rng.hpp"
#include "exclusim/sampler.hpp"

namespace exclusim {

// Everything one trajectory needs; immutable and shareable across replicas.
struct Model {
  JumpKernel kernel;
  BarrierSpec barrier;
  LatticeBox box;
  double theta = 0.0;
  std::shared_ptr<const DisplacementTable> table;

  std::int64_t n() const noexcept { return box.n(); }
  int d() const noexcept { return box.d(); }
  // Acceptance bound used for thinning: max(1, alpha n^{-beta}).
  double rate_bound() const;
};

// Builds a model with r_max = 2 L n unless r_max > 0 is given.
Model make_model(int d, double gamma, BarrierSpec barrier, std::int64_t n, std::int64_t half_side,
                 std::int64_t r_max = 0);

enum class EventKind {
  Accepted,
  RejectedOccupied,
  RejectedOffBox,
  RejectedSlowThinned,
  RejectedFastThinned,
  RejectedTail,
};

const char* event_name(EventKind kind);

struct StepResult {
  double dt = 0.0;
  EventKind kind = EventKind::RejectedTail;
  std::int64_t from = -1;
  std::int64_t to = -1;
  // The proposed bond is slow and reached the thinning draw.
  bool slow_attempt = false;
};

// One attempt of the thinned particle dynamics; applies the move if accepted.
StepResult step(Configuration& cfg, const Model& model, RngStream& rng);

struct EventTally {
  std::int64_t attempts = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected_occupied = 0;
  std::int64_t rejected_off_box = 0;
  std::int64_t rejected_slow_thinned = 0;
  std::int64_t rejected_fast_thinned = 0;
  std::int64_t rejected_tail = 0;
  std::int64_t slow_attempts = 0;
  std::int64_t slow_accepted = 0;
  std::int64_t crossings_up = 0;    // accepted moves from u_d < 0 to u_d >= 0
  std::int64_t crossings_down = 0;  // accepted moves from u_d >= 0 to u_d < 0

  void record(const StepResult& r, const LatticeBox& box);
};

// Hooks evaluated along a trajectory. on_jump is called after each accepted
// move (cfg already updated), on_snapshot at each snapshot time.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_start(const Configuration& cfg, double t) { (void)cfg, (void)t; }
  virtual void on_jump(const Configuration& cfg, std::int64_t from, std::int64_t to, double t) {
    (void)cfg, (void)from, (void)to, (void)t;
  }
  virtual void on_snapshot(const Configuration& cfg, double t) { (void)cfg, (void)t; }
};

struct Trajectory {
  std::vector<double> times;  // starts at 0, strictly increasing
  std::vector<std::int64_t> particle_counts;
  // Full occupancy copies, present only when requested and below the size cap.
  std::vector<std::vector<std::uint8_t>> snapshots;
  EventTally tally;
  std::uint64_t rng_key = 0;
  double final_time = 0.0;
};

struct SimulateOptions {
  bool store_snapshots = true;
  std::int64_t snapshot_site_cap = std::int64_t{1} << 24;
  bool check_every_event = false;
};

// Exact evolution to macroscopic time T with snapshots at the given times
// (sorted, within [0,T]; t = 0 is always recorded first).
Trajectory simulate(Configuration& cfg, const Model& model, double T,
                    std::span<const double> snapshot_times, std::span<Observer* const> observers,
                    RngStream& rng, const SimulateOptions& options = {});

// CSV with columns replica,t,observable_name,value.
struct TrajectoryRow {
  int replica = 0;
  double t = 0.0;
  std::string name;
  double value = 0.0;
};
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows);

// Binary dump: little-endian uint64 header (d, n, L, particle count) followed
// by the occupancy bit-packed in site-index order, least significant bit first.
void write_snapshot_binary(std::ostream& out, const LatticeBox& box, std::span<const std::uint8_t> occupancy);
std::vector<std::uint8_t> read_snapshot_binary(std::istream& in, int& d, std::int64_t& n,
                                               std::int64_t& half_side, std::int64_t& count);

}  // namespace exclusim
