#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <string>
#include <vector>

#include "stranglerkit/resilience.hpp"
#include "test_util.hpp"

using namespace stranglerkit;

TEST_CASE("effective phase: cooldown boundary and clock regress") {
  BreakerConfig cfg{5, 30, 2};
  BreakerState closed{BreakerPhase::Closed, 2, 0};
  CHECK(effective_phase(closed, 0, cfg) == BreakerPhase::Closed);
  CHECK(effective_phase(closed, 1000, cfg) == BreakerPhase::Closed);

  BreakerState open{BreakerPhase::Open, 0, 10};
  CHECK(effective_phase(open, 10, cfg) == BreakerPhase::Open);
  CHECK(effective_phase(open, 39, cfg) == BreakerPhase::Open);
  CHECK(effective_phase(open, 40, cfg) == BreakerPhase::HalfOpen);  // == cooldown
  CHECK(effective_phase(open, 41, cfg) == BreakerPhase::HalfOpen);
  // A clock reading before opened_at must not wrap around to "elapsed".
  CHECK(effective_phase(open, 5, cfg) == BreakerPhase::Open);
}

TEST_CASE("open within cooldown records nothing") {
  BreakerConfig cfg{3, 30, 2};
  BreakerState open{BreakerPhase::Open, 0, 100};
  CHECK(record_outcome(open, Outcome::Success, 110, cfg) == open);
  CHECK(record_outcome(open, Outcome::Failure, 129, cfg) == open);
}

TEST_CASE("single transitions: threshold opens, probe closes or re-opens") {
  BreakerConfig cfg{3, 30, 2};
  BreakerState s{BreakerPhase::Closed, 0, 0};
  s = record_outcome(s, Outcome::Failure, 1, cfg);
  CHECK(s == BreakerState{BreakerPhase::Closed, 1, 0});
  s = record_outcome(s, Outcome::Success, 2, cfg);
  CHECK(s == BreakerState{BreakerPhase::Closed, 0, 0});
  s = record_outcome(s, Outcome::Failure, 3, cfg);
  s = record_outcome(s, Outcome::Failure, 4, cfg);
  CHECK(s == BreakerState{BreakerPhase::Closed, 2, 0});
  s = record_outcome(s, Outcome::Failure, 5, cfg);
  CHECK(s == BreakerState{BreakerPhase::Open, 0, 5});

  // Cooldown elapsed: the recorded outcome is the probe's.
  BreakerState reopened = record_outcome(s, Outcome::Failure, 35, cfg);
  CHECK(reopened == BreakerState{BreakerPhase::Open, 0, 35});
  BreakerState closed = record_outcome(s, Outcome::Success, 35, cfg);
  CHECK(closed == BreakerState{BreakerPhase::Closed, 0, 0});
}

// Independent automaton for the exhaustive sweep, tracking the same
// observable triple with its own control flow.
namespace {

struct AutoState {
  bool open = false;
  int fails = 0;
  std::uint64_t opened = 0;
};

AutoState auto_step(AutoState s, Outcome o, std::uint64_t now, int threshold,
                    std::uint64_t cooldown) {
  if (s.open) {
    bool probe_window = now >= s.opened && now - s.opened >= cooldown;
    if (!probe_window) return s;  // no call could have happened
    if (o == Outcome::Success) return AutoState{false, 0, 0};
    return AutoState{true, 0, now};
  }
  if (o == Outcome::Success) return AutoState{false, 0, 0};
  s.fails++;
  if (s.fails >= threshold) return AutoState{true, 0, now};
  return s;
}

BreakerState to_breaker(const AutoState& s) {
  if (s.open) return BreakerState{BreakerPhase::Open, 0, s.opened};
  return BreakerState{BreakerPhase::Closed, s.fails, 0};
}

}  // namespace

TEST_CASE("exhaustive: every outcome/timing string up to length 8") {
  // Alphabet of 4 symbols: {success, failure} x {advance 1, advance cooldown}.
  // 4^1 + ... + 4^8 = 87380 strings, each replayed through both machines.
  BreakerConfig cfg{2, 5, 2};
  long checked = 0;
  for (int len = 1; len <= 8; ++len) {
    long count = 1;
    for (int i = 0; i < len; ++i) count *= 4;
    for (long code = 0; code < count; ++code) {
      BreakerState lib{};
      AutoState ref{};
      std::uint64_t now = 0;
      long c = code;
      for (int i = 0; i < len; ++i) {
        int sym = static_cast<int>(c % 4);
        c /= 4;
        Outcome o = (sym & 1) != 0 ? Outcome::Failure : Outcome::Success;
        now += (sym & 2) != 0 ? cfg.cooldown : 1;
        // The registry only records outcomes when a call was admitted; mirror
        // that gate here so the pure function is driven exactly as in use.
        lib = record_outcome(lib, o, now, cfg);
        ref = auto_step(ref, o, now, cfg.failure_threshold, cfg.cooldown);
        if (lib != to_breaker(ref)) {
          CAPTURE(len);
          CAPTURE(code);
          REQUIRE(lib == to_breaker(ref));
        }
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("result cache: least-recently-used eviction") {
  ResultCache cache(3);
  cache.put("a", "1");
  cache.put("b", "2");
  cache.put("c", "3");
  CHECK(cache.size() == 3);
  CHECK(cache.get("a") == "1");  // refresh a; b is now the oldest
  cache.put("d", "4");
  CHECK(cache.get("b") == std::nullopt);
  CHECK(cache.get("a") == "1");
  CHECK(cache.get("c") == "3");
  CHECK(cache.get("d") == "4");

  // Updating an existing key overwrites and refreshes; no eviction.
  cache.put("c", "3x");
  CHECK(cache.size() == 3);
  cache.put("e", "5");  // evicts a (oldest after the gets above)
  CHECK(cache.get("a") == std::nullopt);
  CHECK(cache.get("c") == "3x");
  CHECK(cache.get("e") == "5");
  CHECK(cache.size() == 3);
}

TEST_CASE("registry: failures open the circuit; open calls never reach upstream") {
  LogicalClock clock;
  BreakerConfig cfg{3, 10, 2};
  BreakerRegistry reg(clock, cfg);
  int invocations = 0;
  UpstreamFn failing = [&]() {
    invocations++;
    return UpstreamResult{false, ""};
  };

  // Three failures with a cold cache: each throws, the third opens.
  for (int i = 0; i < 3; ++i) {
    clock.advance(1);
    try {
      reg.call("svc", "d1", failing);
      FAIL("expected upstream failure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UpstreamFailure);
    }
  }
  CHECK(invocations == 3);
  CHECK(reg.phase("svc") == BreakerPhase::Open);

  // Within the cooldown the upstream must not be touched.
  clock.advance(1);
  CHECK_THROWS_AS(reg.call("svc", "d1", failing), Error);
  CHECK(invocations == 3);
  BreakerStats stats = reg.stats("svc");
  CHECK(stats.live_calls == 3);
  CHECK(stats.failures == 3);
  CHECK(stats.short_circuited == 1);
  CHECK(stats.cache_hits == 0);

  // Cooldown elapsed: exactly one probe goes out; it fails and re-opens.
  clock.advance(10);
  CHECK(reg.phase("svc") == BreakerPhase::HalfOpen);
  CHECK_THROWS_AS(reg.call("svc", "d1", failing), Error);
  CHECK(invocations == 4);
  CHECK(reg.phase("svc") == BreakerPhase::Open);

  // A successful probe closes it.
  clock.advance(10);
  UpstreamFn healthy = [&]() {
    invocations++;
    return UpstreamResult{true, "live"};
  };
  BreakerCallResult r = reg.call("svc", "d1", healthy);
  CHECK(r.body == "live");
  CHECK_FALSE(r.cached);
  CHECK(reg.phase("svc") == BreakerPhase::Closed);
}

TEST_CASE("registry: warm cache serves fallbacks for failures and open circuits") {
  LogicalClock clock;
  BreakerConfig cfg{2, 10, 2};
  BreakerRegistry reg(clock, cfg);

  int live = 0;
  UpstreamFn healthy = [&]() {
    live++;
    return UpstreamResult{true, "good-" + std::to_string(live)};
  };
  UpstreamFn failing = [&]() { return UpstreamResult{false, ""}; };

  // Warm the cache for digest d1 only.
  CHECK(reg.call("svc", "d1", healthy).body == "good-1");

  // A failed call falls back to the cached value.
  BreakerCallResult r = reg.call("svc", "d1", failing);
  CHECK(r.cached);
  CHECK(r.body == "good-1");
  // A different digest is cold even though the service has cached data.
  CHECK_THROWS_AS(reg.call("svc", "d2", failing), Error);
  CHECK(reg.phase("svc") == BreakerPhase::Open);  // two consecutive failures

  // Short-circuited calls serve the cache too, still without upstream work.
  BreakerCallResult sc = reg.call("svc", "d1", failing);
  CHECK(sc.cached);
  CHECK(sc.body == "good-1");
  CHECK(reg.stats("svc").short_circuited == 1);
  CHECK(reg.stats("svc").cache_hits == 2);

  // Fresh successes overwrite the cached value.
  clock.advance(10);
  CHECK(reg.call("svc", "d1", healthy).body == "good-2");
  CHECK(reg.call("svc", "d1", failing).body == "good-2");
}

TEST_CASE("registry: services fail independently and caches do not leak") {
  LogicalClock clock;
  BreakerConfig cfg{1, 10, 2};
  BreakerRegistry reg(clock, cfg);
  UpstreamFn healthy = [] { return UpstreamResult{true, "ok"}; };
  UpstreamFn failing = [] { return UpstreamResult{false, ""}; };

  CHECK(reg.call("a", "d", healthy).body == "ok");
  CHECK_THROWS_AS(reg.call("b", "d", failing), Error);  // b cold despite a's cache
  CHECK(reg.phase("b") == BreakerPhase::Open);
  CHECK(reg.phase("a") == BreakerPhase::Closed);
  CHECK(reg.call("a", "d", healthy).body == "ok");

  std::vector<std::string> names = reg.services();
  CHECK(names == std::vector<std::string>{"a", "b"});
  CHECK(reg.config().failure_threshold == 1);
}

TEST_CASE("registry: cache capacity bounds stored results") {
  LogicalClock clock;
  BreakerRegistry reg(clock, BreakerConfig{5, 10, 2}, 2);
  UpstreamFn healthy = [] { return UpstreamResult{true, "v"}; };
  UpstreamFn failing = [] { return UpstreamResult{false, ""}; };
  reg.call("s", "d1", healthy);
  reg.call("s", "d2", healthy);
  reg.call("s", "d3", healthy);  // evicts (s, d1)
  CHECK_THROWS_AS(reg.call("s", "d1", failing), Error);
  CHECK(reg.call("s", "d2", failing).cached);
  CHECK(reg.call("s", "d3", failing).cached);
}
