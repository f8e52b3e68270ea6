#include <doctest.h>

#include <cmath>
#include <numeric>

#include "support/oracles.hpp"
#include "tcssl/errors.hpp"
#include "tcssl/metrics.hpp"
#include "tcssl/rng.hpp"

using namespace tcssl;
using IV = std::vector<int>;

namespace {

bool same(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

TEST_CASE("confusion matrix hand counts") {
  const auto cm = confusion_matrix(IV{0, 0, 1, 1}, IV{0, 1, 1, 1}, 2);
  CHECK(cm(0, 0) == 1);
  CHECK(cm(0, 1) == 1);
  CHECK(cm(1, 0) == 0);
  CHECK(cm(1, 1) == 2);
  const auto diag = confusion_matrix(IV{2, 0, 1, 2}, IV{2, 0, 1, 2}, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) CHECK(diag(i, j) == 0);
  const auto empty = confusion_matrix(IV{}, IV{}, 4);
  CHECK(empty.total() == 0);
  CHECK(empty.counts.size() == 16);
  CHECK_THROWS_AS(confusion_matrix(IV{0, 1}, IV{0}, 2), ContractError);
  CHECK_THROWS_AS(confusion_matrix(IV{0, 3}, IV{0, 1}, 2), ContractError);
}

TEST_CASE("video metrics hand example") {
  const auto m = video_metrics(IV{0, 0, 1, 1}, IV{0, 1, 1, 1}, 2);
  CHECK(m.accuracy == doctest::Approx(75.0));
  CHECK(m.macro_recall == doctest::Approx(75.0));
  CHECK(m.macro_precision == doctest::Approx(250.0 / 3.0));
  CHECK(m.f1 == doctest::Approx(2 * 75.0 * (250.0 / 3) / (75.0 + 250.0 / 3)));
  CHECK(std::round(m.f1 * 100) / 100 == doctest::Approx(78.95));
  CHECK(*m.per_phase_f1[0] == doctest::Approx(200.0 / 3.0));
  CHECK(*m.per_phase_f1[1] == doctest::Approx(80.0));

  const auto p = video_metrics(IV{0, 1, 2, 2}, IV{0, 1, 2, 2}, 4);
  CHECK(p.accuracy == 100.0);
  CHECK(p.macro_recall == 100.0);
  CHECK(p.macro_precision == 100.0);
  CHECK(p.f1 == 100.0);
  CHECK(!p.per_phase_f1[3].has_value());
  CHECK_THROWS_AS(video_metrics(IV{}, IV{}, 2), ContractError);
}

TEST_CASE("video metrics match brute-force counting") {
  Rng rng(1);
  for (int inst = 0; inst < 200; ++inst) {
    const int K = static_cast<int>(rng.uniform_int(2, 7));
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 500));
    IV gt(n), pred(n);
    // Skewed draws so that some phases are absent from truth or prediction.
    for (auto& v : gt) v = static_cast<int>(rng.uniform_int(0, rng.bernoulli(0.7) ? K / 2 : K - 1));
    for (std::size_t i = 0; i < n; ++i) pred[i] = rng.bernoulli(0.6) ? gt[i] : static_cast<int>(rng.uniform_int(0, K - 1));
    const auto m = video_metrics(gt, pred, static_cast<std::size_t>(K));
    const auto o = oracle::brute_force_metrics(gt, pred, K);
    CHECK(same(m.accuracy, o.accuracy));
    CHECK(same(m.macro_recall, o.macro_recall));
    CHECK(same(m.macro_precision, o.macro_precision));
    CHECK(same(m.f1, o.macro_f1));
    for (int k = 0; k < K; ++k) {
      CHECK(m.per_phase_f1[static_cast<std::size_t>(k)].has_value() == !std::isnan(o.f1[static_cast<std::size_t>(k)]));
      if (m.per_phase_f1[static_cast<std::size_t>(k)])
        CHECK(same(*m.per_phase_f1[static_cast<std::size_t>(k)], o.f1[static_cast<std::size_t>(k)]));
    }
    if (m.macro_recall > 0 && m.macro_precision > 0)
      CHECK(same(m.f1, 2 * m.macro_precision * m.macro_recall / (m.macro_precision + m.macro_recall)));
  }
}

TEST_CASE("metrics are equivariant under relabelling phases") {
  Rng rng(2);
  for (int inst = 0; inst < 50; ++inst) {
    const int K = 5;
    IV gt(100), pred(100), perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    for (auto& v : gt) v = static_cast<int>(rng.uniform_int(0, K - 1));
    for (auto& v : pred) v = static_cast<int>(rng.uniform_int(0, K - 1));
    IV gt2(100), pred2(100);
    for (std::size_t i = 0; i < 100; ++i) {
      gt2[i] = perm[static_cast<std::size_t>(gt[i])];
      pred2[i] = perm[static_cast<std::size_t>(pred[i])];
    }
    const auto a = video_metrics(gt, pred, K), b = video_metrics(gt2, pred2, K);
    CHECK(same(a.accuracy, b.accuracy));
    CHECK(same(a.macro_recall, b.macro_recall));
    CHECK(same(a.macro_precision, b.macro_precision));
    CHECK(same(a.f1, b.f1));
    for (int k = 0; k < K; ++k)
      CHECK(same(a.per_phase_f1[static_cast<std::size_t>(k)].value_or(-1),
                 b.per_phase_f1[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])].value_or(-1)));
  }
}

TEST_CASE("summaries use the sample standard deviation") {
  const std::vector<double> one{42.0};
  auto s = summarize(one);
  CHECK(s.mean == 42.0);
  CHECK(s.std == 0.0);
  CHECK(s.count == 1);
  const std::vector<double> two{60.0, 80.0};
  s = summarize(two);
  CHECK(s.mean == 70.0);
  CHECK(s.std == doctest::Approx(std::sqrt(200.0)));
  const std::vector<double> flat(9, 3.25);
  s = summarize(flat);
  CHECK(s.mean == 3.25);
  CHECK(s.std == 0.0);
  CHECK(!summarize(std::vector<double>{}).defined());
}

TEST_CASE("aggregate over videos") {
  const auto a = video_metrics(IV{0, 0, 1, 1}, IV{0, 1, 1, 1}, 3);
  const auto b = video_metrics(IV{0, 1, 1, 0}, IV{0, 1, 1, 0}, 3);
  const std::vector<VideoMetrics> vs{a, b};
  const auto r = aggregate(vs);
  CHECK(r.videos == 2);
  CHECK(r.f1.mean == doctest::Approx((a.f1 + b.f1) / 2));
  CHECK(r.per_phase_f1[0].count == 2);
  CHECK(!r.per_phase_f1[2].defined());
  CHECK(r.per_phase_f1[2].count == 0);
  CHECK_THROWS_AS(aggregate(std::vector<VideoMetrics>{}), ContractError);
}

TEST_CASE("mean per-video F1 falls below the F1 of mean precision and recall when videos disagree") {
  // One video with high precision and low recall, another the reverse.
  VideoMetrics hi_p, hi_r;
  hi_p.macro_precision = 95, hi_p.macro_recall = 40;
  hi_r.macro_precision = 40, hi_r.macro_recall = 95;
  for (auto* v : {&hi_p, &hi_r}) {
    v->f1 = 2 * v->macro_precision * v->macro_recall / (v->macro_precision + v->macro_recall);
    v->per_phase_f1.assign(2, std::nullopt);
  }
  const auto r = aggregate(std::vector<VideoMetrics>{hi_p, hi_r});
  const double f1_of_means = 2 * r.precision.mean * r.recall.mean / (r.precision.mean + r.recall.mean);
  CHECK(r.f1.mean < f1_of_means);
  CHECK(r.f1.mean < std::min(r.precision.mean, r.recall.mean) + 1e-9);

  // Same property on videos built from real label sequences.
  const auto v1 = video_metrics(IV{0, 0, 0, 0, 1, 1, 1, 1}, IV{0, 0, 0, 0, 0, 0, 0, 1}, 2);
  const auto v2 = video_metrics(IV{0, 0, 1, 1, 1, 1, 1, 1}, IV{0, 0, 1, 1, 1, 1, 1, 1}, 2);
  const auto r2 = aggregate(std::vector<VideoMetrics>{v1, v2});
  CHECK(r2.f1.mean < 2 * r2.precision.mean * r2.recall.mean / (r2.precision.mean + r2.recall.mean));
}
