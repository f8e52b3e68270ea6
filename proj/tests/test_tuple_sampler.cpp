#include <doctest.h>

#include <map>
#include <set>
#include <string>

#include "support/stats.hpp"
#include "tcssl/errors.hpp"
#include "tcssl/tuple_sampler.hpp"

using namespace tcssl;

namespace {

// fps = 1 so frame offsets equal the configured seconds.
SamplerConfig frames_cfg(double delta, double gamma, std::size_t tuples = 250) {
  SamplerConfig c;
  c.delta_seconds = delta;
  c.gamma_seconds = gamma;
  c.frames_per_second = 1.0;
  c.tuples_per_video = tuples;
  c.validate();
  return c;
}

void check_invariants(const SampledTuple& s, std::int64_t T, const SamplerConfig& cfg) {
  const auto idx = s.indices();
  for (std::size_t i = 0; i < s.size(); ++i) {
    REQUIRE(idx[i] >= 0);
    REQUIRE(idx[i] <= T - 1);
  }
  REQUIRE(std::abs(s.gamma) >= cfg.gamma_frames());
  REQUIRE(std::abs(s.delta) <= cfg.delta_frames());
}

}  // namespace

TEST_CASE("offsets convert to frames by rounding") {
  SamplerConfig c;
  CHECK(c.delta_frames() == 150);
  CHECK(c.gamma_frames() == 600);
  c.delta_seconds = 15;
  CHECK(c.delta_frames() == 75);
  c.frames_per_second = 1.0 / 3.0;  // 15/3 = 5
  CHECK(c.delta_frames() == 5);
  c.delta_seconds = 200;
  c.frames_per_second = 5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("distant frame availability boundary") {
  const auto cfg = frames_cfg(3, 10);
  for (std::int64_t T = 1; T <= 25; ++T) {
    Rng rng(static_cast<std::uint64_t>(T));
    CAPTURE(T);
    if (T - 1 < 10) {
      CHECK_THROWS_AS(sample_first_order(T, cfg, rng), NoValidDistantFrame);
      CHECK_THROWS_AS(sample_second_order(T, cfg, rng), NoValidDistantFrame);
      CHECK(feasible_anchor_count(T, 10) == 0);
    } else {
      for (int k = 0; k < 200; ++k) check_invariants(sample_first_order(T, cfg, rng), T, cfg);
      for (int k = 0; k < 200; ++k) check_invariants(sample_second_order(T, cfg, rng), T, cfg);
    }
  }
  Rng rng(1);
  CHECK_THROWS_AS(sample_first_order(500, frames_cfg(150, 600), rng), NoValidDistantFrame);
}

TEST_CASE("distant offset is uniform over its valid set for a fixed anchor") {
  // T = 10, gamma = 4: conditioned on t = 0 the valid offsets are 4..9.
  const auto cfg = frames_cfg(2, 4);
  Rng rng(11);
  std::map<std::int64_t, double> hist;
  double n = 0;
  while (n < 100000) {
    const auto s = sample_first_order(10, cfg, rng);
    if (s.anchor != 0) continue;
    hist[s.gamma] += 1;
    n += 1;
  }
  REQUIRE(hist.size() == 6);
  for (const auto& [g, c] : hist) {
    CHECK(g >= 4);
    CHECK(g <= 9);
    CHECK(std::abs(c / n - 1.0 / 6.0) < 0.01);
  }
}

TEST_CASE("first-order tuples at full scale keep every invariant") {
  const auto cfg = frames_cfg(150, 600);
  const std::int64_t T = 1000;
  Rng rng(12);
  // Exact law of delta: anchor uniform over feasible anchors, delta uniform over its valid range.
  std::vector<double> probs(301, 0.0);
  const double anchors = static_cast<double>(feasible_anchor_count(T, 600));
  for (std::int64_t t = 0; t < T; ++t) {
    if (t > T - 1 - 600 && t < 600) continue;
    const std::int64_t lo = std::max<std::int64_t>(-150, -t), hi = std::min<std::int64_t>(150, T - 1 - t);
    for (std::int64_t d = lo; d <= hi; ++d) probs[static_cast<std::size_t>(d + 150)] += 1.0 / anchors / double(hi - lo + 1);
  }
  std::vector<double> observed(301, 0.0), interior(301, 0.0);
  double interior_n = 0;
  for (int k = 0; k < 100000; ++k) {
    const auto s = sample_first_order(T, cfg, rng);
    check_invariants(s, T, cfg);
    observed[static_cast<std::size_t>(s.delta + 150)] += 1;
    if (s.anchor >= 150 && s.anchor <= T - 1 - 150) {
      interior[static_cast<std::size_t>(s.delta + 150)] += 1;
      interior_n += 1;
    }
  }
  const double crit = stats::chi_square_critical(300, 0.001);
  CHECK(stats::chi_square(observed, probs) < crit);
  // Away from the video ends the near offset is uniform over [-150, 150].
  const std::vector<double> flat(301, 1.0 / 301.0);
  CHECK(stats::chi_square(interior, flat) < crit);
  const double p = 1.0 / 301.0, se = std::sqrt(p * (1 - p) / interior_n);
  double worst = 0;
  for (double c : interior) worst = std::max(worst, std::abs(c / interior_n - p) / se);
  CHECK(worst < 4.5);
}

TEST_CASE("second-order tuples keep all four indices in range") {
  const auto cfg = frames_cfg(75, 600);
  const std::int64_t T = 1000;
  Rng rng(13);
  std::size_t zero_delta = 0;
  for (int k = 0; k < 100000; ++k) {
    const auto s = sample_second_order(T, cfg, rng);
    check_invariants(s, T, cfg);
    zero_delta += s.delta == 0;
  }
  CHECK(zero_delta > 0);  // a zero near offset is a legal draw
}

TEST_CASE("second-order near offset near the start of a video") {
  // T = 10, delta = 4, gamma = 5, anchor 1: t + 2*delta >= 0 forces delta >= 0.
  const auto cfg = frames_cfg(4, 5);
  Rng rng(14);
  std::set<std::int64_t> seen;
  int hits = 0;
  while (hits < 5000) {
    const auto s = sample_second_order(10, cfg, rng);
    if (s.anchor != 1) continue;
    ++hits;
    seen.insert(s.delta);
  }
  CHECK(seen == std::set<std::int64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("anchor is uniform over the video") {
  const auto cfg = frames_cfg(10, 50);
  const std::int64_t T = 200;  // T >= 2 * gamma: every frame is a feasible anchor
  REQUIRE(feasible_anchor_count(T, 50) == T);
  for (auto order : {TupleOrder::first, TupleOrder::second}) {
    Rng rng(15);
    std::vector<double> observed(T, 0.0);
    for (int k = 0; k < 100000; ++k) observed[static_cast<std::size_t>(sample_tuple(order, T, cfg, rng).anchor)] += 1;
    const std::vector<double> flat(T, 1.0 / T);
    CHECK(stats::chi_square(observed, flat) < stats::chi_square_critical(T - 1, 0.001));
  }
}

TEST_CASE("anchors without any distant partner are never drawn") {
  const auto cfg = frames_cfg(10, 60);
  const std::int64_t T = 100;  // anchors 40..59 have no partner 60 frames away
  CHECK(feasible_anchor_count(T, 60) == 80);
  Rng rng(16);
  std::vector<double> observed(T, 0.0);
  for (int k = 0; k < 100000; ++k) observed[static_cast<std::size_t>(sample_first_order(T, cfg, rng).anchor)] += 1;
  std::vector<double> probs(T, 0.0);
  for (std::int64_t t = 0; t < T; ++t)
    if (t <= 39 || t >= 60) probs[static_cast<std::size_t>(t)] = 1.0 / 80.0;
  for (std::int64_t t = 40; t < 60; ++t) CHECK(observed[static_cast<std::size_t>(t)] == 0);
  CHECK(stats::chi_square(observed, probs) < stats::chi_square_critical(79, 0.001));
}

TEST_CASE("epoch schedule sizes, shuffling and determinism") {
  SamplerConfig cfg;  // 5 fps, gamma 600 frames
  std::vector<std::int64_t> lengths(60);
  for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = 900 + static_cast<std::int64_t>(i) * 7;
  Rng a(17), b(17);
  const auto s1 = build_epoch_schedule(lengths, cfg, TupleOrder::first, a);
  const auto s2 = build_epoch_schedule(lengths, cfg, TupleOrder::first, b);
  CHECK(s1.size() == 15000);
  CHECK(s1 == s2);
  std::vector<int> per_video(60, 0);
  for (const auto& e : s1) {
    ++per_video[e.video];
    check_invariants(e.tuple, lengths[e.video], cfg);
  }
  for (int c : per_video) CHECK(c == 250);
  std::set<std::size_t> first_videos;
  for (std::size_t i = 0; i < 100; ++i) first_videos.insert(s1[i].video);
  CHECK(first_videos.size() > 10);

  // A second epoch from the same generator draws a different schedule.
  const auto s3 = build_epoch_schedule(lengths, cfg, TupleOrder::first, a);
  CHECK(s3 != s1);

  SamplerConfig one = cfg;
  one.tuples_per_video = 1;
  const std::vector<std::int64_t> single{700};
  Rng c(18);
  const auto s4 = build_epoch_schedule(single, one, TupleOrder::second, c);
  REQUIRE(s4.size() == 1);
  CHECK(s4[0].video == 0);
  CHECK(s4[0].tuple.order == TupleOrder::second);
}

TEST_CASE("schedule errors name the offending video") {
  SamplerConfig cfg;
  const std::vector<std::int64_t> lengths{1000, 1000, 400, 1000};
  Rng rng(19);
  try {
    build_epoch_schedule(lengths, cfg, TupleOrder::first, rng);
    FAIL("expected NoValidDistantFrame");
  } catch (const NoValidDistantFrame& e) {
    CHECK(std::string(e.what()).find("video 2") != std::string::npos);
  }
}
