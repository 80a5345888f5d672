#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "netkf/state.hpp"

namespace netkf {

struct ChannelConfig {
  long delay_min = 0;   // ticks
  long delay_max = 0;   // ticks
  double loss_prob = 0.0;
  std::uint64_t seed = 0;
};

inline void validate_channel_config(const ChannelConfig& cfg) {
  if (cfg.delay_min < 0 || cfg.delay_max < cfg.delay_min) {
    throw std::invalid_argument(
        "channel config: need 0 <= delay_min <= delay_max");
  }
  if (cfg.delay_max > static_cast<long>(kDefaultHistoryCapacity)) {
    throw std::invalid_argument(
        "channel config: delay_max exceeds the supported history depth");
  }
  if (!(cfg.loss_prob >= 0.0 && cfg.loss_prob <= 1.0)) {
    throw std::invalid_argument("channel config: loss_prob must be in [0,1]");
  }
}

/// Lossy, delaying one-way channel with seeded randomness. Every send
/// consumes exactly two raw generator draws (one for the Bernoulli loss
/// decision, one for the integer-uniform delay), whether or not the packet
/// is dropped, so a trace's delay sequence is independent of the loss
/// outcomes. mt19937_64 raw output is standardized, which keeps traces
/// reproducible across platforms.
template <typename Payload>
class Channel {
 public:
  struct Arrival {
    Payload payload;
    long origin_tick;
  };

  explicit Channel(const ChannelConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    validate_channel_config(cfg_);
  }

  /// Queues or drops the payload. Origin ticks must be nondecreasing.
  /// Returns true when the packet was accepted (will eventually arrive).
  bool send(const Payload& payload, long origin_tick) {
    if (have_sent_ && origin_tick < last_origin_) {
      throw std::logic_error("channel send: origin ticks must not decrease");
    }
    have_sent_ = true;
    last_origin_ = origin_tick;
    ++sent_;

    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const std::uint64_t delay_draw = rng_();
    const bool dropped = u < cfg_.loss_prob;
    if (dropped) {
      ++dropped_;
      return false;
    }
    const std::uint64_t span =
        static_cast<std::uint64_t>(cfg_.delay_max - cfg_.delay_min) + 1;
    const long delay = cfg_.delay_min + static_cast<long>(delay_draw % span);
    in_flight_.push_back(InFlight{payload, origin_tick, origin_tick + delay,
                                  next_seq_++});
    return true;
  }

  /// Returns packets due exactly at `tick`, sorted by origin tick (send
  /// order breaks ties). Poll ticks must be strictly increasing; anything
  /// due earlier than the polled tick is purged.
  std::vector<Arrival> poll(long tick) {
    if (have_polled_ && tick <= last_poll_) {
      throw std::logic_error("channel poll: ticks must strictly increase");
    }
    have_polled_ = true;
    last_poll_ = tick;

    std::vector<InFlight> due;
    auto keep = in_flight_.begin();
    for (auto& entry : in_flight_) {
      if (entry.due_tick == tick) {
        due.push_back(std::move(entry));
      } else if (entry.due_tick > tick) {
        *keep++ = std::move(entry);
      }
    }
    in_flight_.erase(keep, in_flight_.end());

    std::sort(due.begin(), due.end(), [](const InFlight& a, const InFlight& b) {
      if (a.origin_tick != b.origin_tick) return a.origin_tick < b.origin_tick;
      return a.seq < b.seq;
    });
    std::vector<Arrival> out;
    out.reserve(due.size());
    for (auto& entry : due) {
      out.push_back(Arrival{std::move(entry.payload), entry.origin_tick});
    }
    return out;
  }

  const ChannelConfig& config() const { return cfg_; }
  long sent() const { return sent_; }
  long dropped() const { return dropped_; }
  std::size_t in_flight() const { return in_flight_.size(); }

 private:
  struct InFlight {
    Payload payload;
    long origin_tick;
    long due_tick;
    std::uint64_t seq;
  };

  ChannelConfig cfg_;
  std::mt19937_64 rng_;
  std::vector<InFlight> in_flight_;
  std::uint64_t next_seq_ = 0;
  bool have_sent_ = false;
  bool have_polled_ = false;
  long last_origin_ = 0;
  long last_poll_ = 0;
  long sent_ = 0;
  long dropped_ = 0;
};

}  // namespace netkf
