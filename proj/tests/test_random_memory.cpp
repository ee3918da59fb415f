#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <vector>

#include "patchpnp/memory.hpp"
#include "patchpnp/random.hpp"

using namespace patchpnp;

TEST_CASE("splitmix64 reference outputs") {
  // Successive states of the reference generator seeded with 0; the
  // function applies the golden-ratio increment itself.
  std::uint64_t state = 0;
  auto next = [&] {
    const std::uint64_t out = splitmix64(state);
    state += 0x9E3779B97F4A7C15ULL;
    return out;
  };
  CHECK(next() == 0xE220A8397B1DCDAFULL);
  CHECK(next() == 0x6E789E6AA1B965F4ULL);
  CHECK(next() == 0x06C45D188009454FULL);
}

TEST_CASE("counter rng draws are pure functions of key and counter") {
  const CounterRng a(42, 3);
  const CounterRng b(42, 3);
  const CounterRng c(42, 4);
  const CounterRng d(43, 3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    REQUIRE(a.bits(i) == b.bits(i));
    REQUIRE(a.gaussian(i) == b.gaussian(i));
  }
  int same_stream = 0;
  int same_seed = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    same_stream += a.bits(i) == c.bits(i);
    same_seed += a.bits(i) == d.bits(i);
  }
  CHECK(same_stream == 0);
  CHECK(same_seed == 0);
  // Reverse-order evaluation reproduces the forward order.
  std::vector<double> fwd(64);
  std::vector<double> rev(64);
  for (std::uint64_t i = 0; i < 64; ++i) fwd[i] = a.gaussian(i);
  for (std::uint64_t i = 64; i-- > 0;) rev[i] = a.gaussian(i);
  CHECK(fwd == rev);
}

TEST_CASE("gaussian is Box-Muller over two uniforms") {
  const CounterRng r(7);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const double expected = std::sqrt(-2.0 * std::log(r.uniform(2 * i))) *
                            std::cos(2.0 * std::numbers::pi * r.uniform(2 * i + 1));
    CHECK(r.gaussian(i) == expected);
  }
}

TEST_CASE("uniform, below and gaussian moments") {
  const CounterRng r(1234);
  const std::uint64_t n = 200000;
  double um = 0.0;
  double gm = 0.0;
  double g2 = 0.0;
  double g4 = 0.0;
  std::vector<int> bins(10, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = r.uniform(i);
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    um += u;
    const double g = r.gaussian(i);
    gm += g;
    g2 += g * g;
    g4 += g * g * g * g;
    const auto k = r.below(i + n, 10);
    REQUIRE(k < 10);
    ++bins[k];
  }
  CHECK(um / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(gm / n) < 0.01);
  CHECK(g2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(g4 / n == doctest::Approx(3.0).epsilon(0.04));
  for (int b : bins) CHECK(std::abs(b - 20000) < 600);
}

TEST_CASE("derive_seed separates salts") {
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  CHECK(derive_seed(5, 9) == derive_seed(5, 9));
}

TEST_CASE("ledger tracks live and peak bytes") {
  MemoryLedger ledger;
  {
    BufferHold a(&ledger, "a", 100);
    {
      BufferHold b(&ledger, "b", 50);
      CHECK(ledger.live() == 150);
    }
    BufferHold c(&ledger, "c", 20);
    CHECK(ledger.live() == 120);
  }
  CHECK(ledger.live() == 0);
  CHECK(ledger.peak() == 150);
  const auto ev = ledger.events();
  REQUIRE(ev.size() == 6);
  CHECK(ev[0].label == "a");
  CHECK(ev[0].direction == Direction::Acquire);
  CHECK(ev[2].label == "b");
  CHECK(ev[2].direction == Direction::Release);
}

TEST_CASE("buffer holds move and release once") {
  MemoryLedger ledger;
  BufferHold a(&ledger, "a", 10);
  BufferHold b = std::move(a);
  a.release();
  CHECK(ledger.live() == 10);
  b.release();
  b.release();
  CHECK(ledger.live() == 0);
  BufferHold none(nullptr, "x", 1000);
  CHECK(ledger.peak() == 10);
}

TEST_CASE("ledger rejects over-release") {
  MemoryLedger ledger;
  ledger.track("x", 8, Direction::Acquire);
  CHECK_THROWS_AS(ledger.track("x", 16, Direction::Release), std::logic_error);
}

TEST_CASE("ledger is safe under concurrent holds") {
  MemoryLedger ledger;
  ledger.set_event_logging(false);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < 4; ++t) {
      pool.emplace_back([&] {
        for (int i = 0; i < 1000; ++i) BufferHold h(&ledger, "t", 8);
      });
    }
  }
  CHECK(ledger.live() == 0);
  CHECK(ledger.peak() <= 32);
  CHECK(ledger.events().empty());
}
