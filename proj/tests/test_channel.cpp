#include "doctest.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <vector>

#include "netkf/channel.hpp"

using namespace netkf;

namespace {

// Sends `count` tagged packets at origins 0..count-1, polling every tick so
// the in-flight queue stays small; returns origin -> measured delay for
// everything that arrived.
std::map<long, long> drain_delays(Channel<long>& chan, long count) {
  std::map<long, long> delays;
  const long horizon = count + chan.config().delay_max + 1;
  for (long t = 0; t < horizon; ++t) {
    if (t < count) chan.send(t, t);
    for (const auto& arr : chan.poll(t)) {
      delays[arr.origin_tick] = t - arr.origin_tick;
    }
  }
  return delays;
}

}  // namespace

TEST_CASE("loss probability extremes") {
  SUBCASE("zero loss delivers everything") {
    ChannelConfig cfg;
    cfg.delay_min = 0;
    cfg.delay_max = 4;
    cfg.loss_prob = 0.0;
    cfg.seed = 11;
    Channel<long> chan(cfg);
    const auto delays = drain_delays(chan, 500);
    CHECK(delays.size() == 500);
    CHECK(chan.dropped() == 0);
    CHECK(chan.in_flight() == 0);
  }

  SUBCASE("certain loss delivers nothing") {
    ChannelConfig cfg;
    cfg.delay_min = 0;
    cfg.delay_max = 4;
    cfg.loss_prob = 1.0;
    cfg.seed = 11;
    Channel<long> chan(cfg);
    for (long t = 0; t < 200; ++t) CHECK_FALSE(chan.send(t, t));
    CHECK(chan.dropped() == 200);
    CHECK(chan.in_flight() == 0);
  }
}

TEST_CASE("empirical loss rate within three binomial sigma") {
  ChannelConfig cfg;
  cfg.delay_min = 1;
  cfg.delay_max = 8;
  cfg.loss_prob = 0.1;
  cfg.seed = 2024;
  Channel<long> chan(cfg);

  const long n = 100000;
  for (long t = 0; t < n; ++t) chan.send(t, t);
  const double emp = static_cast<double>(chan.dropped()) / static_cast<double>(n);
  const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(n));
  CHECK(std::abs(emp - 0.1) < 3.0 * sigma);
  CHECK(std::abs(emp - 0.1) < 0.01);
}

TEST_CASE("delay distribution is uniform over the configured range") {
  ChannelConfig cfg;
  cfg.delay_min = 2;
  cfg.delay_max = 9;
  cfg.loss_prob = 0.0;
  cfg.seed = 31337;
  Channel<long> chan(cfg);

  const long n = 100000;
  std::vector<long> counts(static_cast<std::size_t>(cfg.delay_max + 1), 0);
  const auto delays = drain_delays(chan, n);
  REQUIRE(delays.size() == static_cast<std::size_t>(n));
  for (const auto& [origin, delay] : delays) {
    REQUIRE(delay >= cfg.delay_min);
    REQUIRE(delay <= cfg.delay_max);
    ++counts[static_cast<std::size_t>(delay)];
  }

  const long bins = cfg.delay_max - cfg.delay_min + 1;
  const double expected = static_cast<double>(n) / static_cast<double>(bins);
  double chi2 = 0.0;
  for (long d = cfg.delay_min; d <= cfg.delay_max; ++d) {
    const double diff =
        static_cast<double>(counts[static_cast<std::size_t>(d)]) - expected;
    chi2 += diff * diff / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(bins - 1));
  const double p_value = 1.0 - boost::math::cdf(dist, chi2);
  CHECK(p_value > 0.01);
}

TEST_CASE("drop decision and delay draw are independent streams") {
  // Both channels consume two generator values per send, so the delays of
  // packets that survive the lossy channel must equal the delays the
  // lossless channel assigns to the same origins.
  ChannelConfig lossless;
  lossless.delay_min = 0;
  lossless.delay_max = 6;
  lossless.loss_prob = 0.0;
  lossless.seed = 777;
  ChannelConfig lossy = lossless;
  lossy.loss_prob = 0.5;

  Channel<long> a(lossy);
  Channel<long> b(lossless);
  const auto got_a = drain_delays(a, 400);
  const auto got_b = drain_delays(b, 400);

  REQUIRE(got_b.size() == 400);
  CHECK(got_a.size() < 400);  // seed 777 certainly drops something at p = .5
  for (const auto& [origin, delay] : got_a) {
    CHECK(delay == got_b.at(origin));
  }
}

TEST_CASE("deterministic delay arrives exactly on schedule") {
  ChannelConfig cfg;
  cfg.delay_min = 3;
  cfg.delay_max = 3;
  cfg.loss_prob = 0.0;
  cfg.seed = 5;
  Channel<int> chan(cfg);
  chan.send(42, 5);
  CHECK(chan.poll(6).empty());
  CHECK(chan.poll(7).empty());
  const auto due = chan.poll(8);
  REQUIRE(due.size() == 1);
  CHECK(due[0].payload == 42);
  CHECK(due[0].origin_tick == 5);
  CHECK(chan.poll(9).empty());
}

TEST_CASE("same-tick arrivals come out in origin order") {
  SUBCASE("same origin preserves send order") {
    ChannelConfig cfg;
    cfg.delay_min = 2;
    cfg.delay_max = 2;
    cfg.loss_prob = 0.0;
    cfg.seed = 9;
    Channel<int> chan(cfg);
    chan.send(1, 0);
    chan.send(2, 0);
    chan.send(3, 0);
    const auto due = chan.poll(2);
    REQUIRE(due.size() == 3);
    CHECK(due[0].payload == 1);
    CHECK(due[1].payload == 2);
    CHECK(due[2].payload == 3);
  }

  SUBCASE("different origins colliding on one tick sort by origin") {
    // Search for a seed where the packet sent at tick 0 draws delay 3 and
    // the one sent at tick 2 draws delay 1, so both land on tick 3 with the
    // younger packet sent last. The raw generator is standardized, so the
    // first seed found is stable.
    ChannelConfig cfg;
    cfg.delay_min = 1;
    cfg.delay_max = 3;
    cfg.loss_prob = 0.0;
    bool found = false;
    for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
      cfg.seed = seed;
      Channel<int> chan(cfg);
      chan.send(10, 0);
      chan.send(20, 2);
      chan.poll(1);
      chan.poll(2);
      const auto due = chan.poll(3);
      if (due.size() == 2) {
        found = true;
        CHECK(due[0].origin_tick == 0);
        CHECK(due[0].payload == 10);
        CHECK(due[1].origin_tick == 2);
        CHECK(due[1].payload == 20);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("poll purges anything already overdue") {
  ChannelConfig cfg;
  cfg.delay_min = 0;
  cfg.delay_max = 2;
  cfg.loss_prob = 0.0;
  cfg.seed = 3;
  Channel<int> chan(cfg);
  chan.send(1, 0);
  chan.send(2, 0);
  CHECK(chan.in_flight() == 2);
  // first poll far in the future: everything due earlier is gone
  CHECK(chan.poll(5).empty());
  CHECK(chan.in_flight() == 0);
}

TEST_CASE("tick ordering contracts") {
  ChannelConfig cfg;
  cfg.delay_min = 0;
  cfg.delay_max = 1;
  cfg.loss_prob = 0.0;
  cfg.seed = 1;
  Channel<int> chan(cfg);
  chan.send(1, 4);
  CHECK_THROWS_AS(chan.send(2, 3), std::logic_error);
  CHECK_NOTHROW(chan.send(3, 4));  // equal origins are fine
  chan.poll(4);
  CHECK_THROWS_AS(chan.poll(4), std::logic_error);
  CHECK_THROWS_AS(chan.poll(2), std::logic_error);
  CHECK_NOTHROW(chan.poll(5));
}

TEST_CASE("delivery never leaves the configured delay window") {
  ChannelConfig cfg;
  cfg.delay_min = 2;
  cfg.delay_max = 5;
  cfg.loss_prob = 0.3;
  cfg.seed = 60;
  Channel<long> chan(cfg);
  const long n = 2000;
  const auto delays = drain_delays(chan, n);
  for (const auto& [origin, delay] : delays) {
    CHECK(delay >= 2);
    CHECK(delay <= 5);
  }
  CHECK(static_cast<long>(delays.size()) + chan.dropped() == n);
  CHECK(chan.sent() == n);
}

TEST_CASE("identical configuration replays identically") {
  ChannelConfig cfg;
  cfg.delay_min = 0;
  cfg.delay_max = 7;
  cfg.loss_prob = 0.25;
  cfg.seed = 4242;
  Channel<long> a(cfg);
  Channel<long> b(cfg);
  const auto da = drain_delays(a, 300);
  const auto db = drain_delays(b, 300);
  CHECK(da == db);
  CHECK(a.dropped() == b.dropped());
}

TEST_CASE("channel config validation") {
  ChannelConfig cfg;
  cfg.delay_min = -1;
  CHECK_THROWS_AS(validate_channel_config(cfg), std::invalid_argument);
  cfg.delay_min = 3;
  cfg.delay_max = 2;
  CHECK_THROWS_AS(validate_channel_config(cfg), std::invalid_argument);
  cfg.delay_max = 100;  // beyond the supported history depth
  CHECK_THROWS_AS(validate_channel_config(cfg), std::invalid_argument);
  cfg.delay_max = 10;
  cfg.loss_prob = 1.5;
  CHECK_THROWS_AS(validate_channel_config(cfg), std::invalid_argument);
  cfg.loss_prob = 0.5;
  CHECK_NOTHROW(validate_channel_config(cfg));
}
