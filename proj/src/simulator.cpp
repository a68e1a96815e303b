#include "exclusim/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "exclusim/errors.hpp"

namespace exclusim {

double Model::rate_bound() const { return std::max(1.0, barrier.slow_factor(box.n())); }

Model make_model(int d, double gamma, BarrierSpec barrier, std::int64_t n, std::int64_t half_side,
                 std::int64_t r_max) {
  if (!(barrier.alpha > 0.0)) throw DomainError("make_model: alpha must be positive");
  if (!(barrier.beta >= 0.0)) throw DomainError("make_model: beta must be nonnegative");
  LatticeBox box(d, n, half_side);
  if (r_max <= 0) r_max = 2 * half_side * n;
  JumpKernel kernel(d, gamma, r_max);
  auto table = std::make_shared<const DisplacementTable>(kernel);
  return Model{kernel, barrier, box, theta(n, gamma), std::move(table)};
}

const char* event_name(EventKind kind) {
  switch (kind) {
    case EventKind::Accepted: return "accepted";
    case EventKind::RejectedOccupied: return "rejected_occupied";
    case EventKind::RejectedOffBox: return "rejected_off_box";
    case EventKind::RejectedSlowThinned: return "rejected_slow_thinned";
    case EventKind::RejectedFastThinned: return "rejected_fast_thinned";
    case EventKind::RejectedTail: return "rejected_tail";
  }
  return "unknown";
}

StepResult step(Configuration& cfg, const Model& model, RngStream& rng) {
  const std::int64_t count = cfg.particle_count();
  if (count == 0) throw NoEventError("step: configuration has no particles");
  const double bound = model.rate_bound();
  StepResult result;
  result.dt = rng.exponential(model.theta * static_cast<double>(count) * bound);

  const auto& particles = cfg.particles();
  const std::int64_t from = particles[rng.below(static_cast<std::uint64_t>(count))];
  result.from = from;

  const auto draw = model.table->sample(rng);
  if (std::holds_alternative<TailOverflow>(draw)) {
    result.kind = EventKind::RejectedTail;
    return result;
  }
  const auto& jump = std::get<Displacement>(draw);
  const LatticeBox& box = model.box;
  std::int64_t stride = 1;
  for (int i = 0; i < jump.direction; ++i) stride *= box.side();
  const std::int64_t coord = (from / stride) % box.side() + box.lo();
  const std::int64_t target = coord + jump.sign * jump.magnitude;
  if (target < box.lo() || target > box.hi()) {
    result.kind = EventKind::RejectedOffBox;
    return result;
  }
  const std::int64_t to = from + (target - coord) * stride;
  result.to = to;
  if (cfg.occupied(to)) {
    result.kind = EventKind::RejectedOccupied;
    return result;
  }
  const bool slow = jump.direction == box.d() - 1 && ((coord <= -1) != (target <= -1));
  const double accept = slow ? model.barrier.slow_factor(box.n()) / bound : 1.0 / bound;
  result.slow_attempt = slow;
  if (accept < 1.0 && !(rng.uniform() < accept)) {
    result.kind = slow ? EventKind::RejectedSlowThinned : EventKind::RejectedFastThinned;
    return result;
  }
  cfg.move(from, to);
  result.kind = EventKind::Accepted;
  return result;
}

void EventTally::record(const StepResult& r, const LatticeBox& box) {
  ++attempts;
  if (r.slow_attempt) ++slow_attempts;
  switch (r.kind) {
    case EventKind::Accepted: {
      ++accepted;
      if (r.slow_attempt) {
        ++slow_accepted;
        std::int64_t stride = 1;
        for (int i = 0; i < box.d() - 1; ++i) stride *= box.side();
        const std::int64_t last = (r.to / stride) % box.side() + box.lo();
        if (last >= 0) {
          ++crossings_up;
        } else {
          ++crossings_down;
        }
      }
      break;
    }
    case EventKind::RejectedOccupied: ++rejected_occupied; break;
    case EventKind::RejectedOffBox: ++rejected_off_box; break;
    case EventKind::RejectedSlowThinned: ++rejected_slow_thinned; break;
    case EventKind::RejectedFastThinned: ++rejected_fast_thinned; break;
    case EventKind::RejectedTail: ++rejected_tail; break;
  }
}

Trajectory simulate(Configuration& cfg, const Model& model, double T,
                    std::span<const double> snapshot_times, std::span<Observer* const> observers,
                    RngStream& rng, const SimulateOptions& options) {
  if (!(T >= 0.0)) throw DomainError("simulate: time horizon must be nonnegative");
  std::vector<double> times;
  times.push_back(0.0);
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= T)) throw DomainError("simulate: snapshot time outside [0,T]");
    if (t < times.back()) throw DomainError("simulate: snapshot times must be sorted");
    if (t > times.back()) times.push_back(t);
  }

  Trajectory traj;
  traj.rng_key = rng.key();
  const bool store = options.store_snapshots && cfg.box().site_count() < options.snapshot_site_cap;
  const std::int64_t particles = cfg.particle_count();

  auto take_snapshot = [&](double t) {
    if (cfg.particle_count() != particles) throw std::logic_error("simulate: particle count changed");
    traj.times.push_back(t);
    traj.particle_counts.push_back(cfg.particle_count());
    if (store) traj.snapshots.push_back(cfg.occupancy());
    for (auto* obs : observers) obs->on_snapshot(cfg, t);
  };

  for (auto* obs : observers) obs->on_start(cfg, 0.0);
  take_snapshot(0.0);
  std::size_t next = 1;
  double t = 0.0;
  if (particles > 0) {
    while (true) {
      StepResult r = step(cfg, model, rng);
      const double t_event = t + r.dt;
      while (next < times.size() && times[next] < t_event) {
        if (r.kind == EventKind::Accepted) {
          // snapshot sees the pre-event state
          cfg.move(r.to, r.from);
          take_snapshot(times[next]);
          cfg.move(r.from, r.to);
        } else {
          take_snapshot(times[next]);
        }
        ++next;
      }
      if (t_event > T) {
        if (r.kind == EventKind::Accepted) cfg.move(r.to, r.from);
        break;
      }
      t = t_event;
      traj.tally.record(r, model.box);
      if (r.kind == EventKind::Accepted) {
        for (auto* obs : observers) obs->on_jump(cfg, r.from, r.to, t);
        if (options.check_every_event) cfg.check_invariants();
      }
    }
  }
  while (next < times.size()) take_snapshot(times[next++]);
  traj.final_time = T;
  return traj;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  out << "replica,t,observable_name,value\n";
  char buf[64];
  for (const auto& row : rows) {
    out << row.replica << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.t);
    out << buf << ',' << row.name << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.value);
    out << buf << '\n';
  }
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw IoError("read_snapshot_binary: truncated header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

void write_snapshot_binary(std::ostream& out, const LatticeBox& box, std::span<const std::uint8_t> occupancy) {
  if (static_cast<std::int64_t>(occupancy.size()) != box.site_count()) {
    throw DomainError("write_snapshot_binary: occupancy size does not match the box");
  }
  std::uint64_t count = 0;
  for (auto v : occupancy) count += v;
  put_u64(out, static_cast<std::uint64_t>(box.d()));
  put_u64(out, static_cast<std::uint64_t>(box.n()));
  put_u64(out, static_cast<std::uint64_t>(box.half_side()));
  put_u64(out, count);
  std::vector<char> packed((occupancy.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < occupancy.size(); ++i) {
    if (occupancy[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  }
  out.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!out) throw IoError("write_snapshot_binary: write failed");
}

std::vector<std::uint8_t> read_snapshot_binary(std::istream& in, int& d, std::int64_t& n,
                                               std::int64_t& half_side, std::int64_t& count) {
  d = static_cast<int>(get_u64(in));
  n = static_cast<std::int64_t>(get_u64(in));
  half_side = static_cast<std::int64_t>(get_u64(in));
  count = static_cast<std::int64_t>(get_u64(in));
  LatticeBox box(d, n, half_side);
  const auto sites = static_cast<std::size_t>(box.site_count());
  std::vector<char> packed((sites + 7) / 8);
  in.read(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!in) throw IoError("read_snapshot_binary: truncated payload");
  std::vector<std::uint8_t> occupancy(sites);
  for (std::size_t i = 0; i < sites; ++i) occupancy[i] = (packed[i / 8] >> (i % 8)) & 1;
  return occupancy;
}

}  // namespace exclusim
