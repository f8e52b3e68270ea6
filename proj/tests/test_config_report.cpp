#include <doctest.h>

#include <cmath>
#include <fstream>

#include "support/tempdir.hpp"
#include "tcssl/config.hpp"
#include "tcssl/errors.hpp"
#include "tcssl/report.hpp"

using namespace tcssl;

TEST_CASE("presets differ only where intended") {
  const Config desk = Config::preset("desk");
  const Config big = Config::preset("paper");
  CHECK(desk.preset_name() == "desk");
  CHECK(big.get_sizes("model.hidden") == std::vector<std::size_t>{2048});
  CHECK(big.get_size("model.embedding_dim") == 4096);
  CHECK(big.get_size("model.lstm_hidden") == 512);
  CHECK(desk.values().size() == big.values().size());
  for (const auto& [k, v] : desk.values()) {
    if (k.rfind("model.", 0) == 0 || k == "finetune.learning_rate") continue;
    CHECK_MESSAGE(big.get(k) == v, k);
  }
  CHECK(big.get_double("finetune.learning_rate") == 1e-4);
  CHECK_THROWS_AS(Config::preset("huge"), ConfigError);
}

TEST_CASE("overrides are typed and validated") {
  Config c = Config::preset("desk");
  c.set_assignment(" model.hidden = 32,16 ");
  CHECK(c.get_sizes("model.hidden") == std::vector<std::size_t>{32, 16});
  CHECK_THROWS_AS(c.set("model.depth", "3"), ConfigError);
  CHECK_THROWS_AS(c.set_assignment("model.hidden"), ConfigError);
  c.set("pretrain.epochs", "-2");
  CHECK_THROWS_AS(c.get_size("pretrain.epochs"), ConfigError);
  c.set("pretrain.learning_rate", "fast");
  CHECK_THROWS_AS(c.get_double("pretrain.learning_rate"), ConfigError);
  c.set("pretrain.learning_rate", "nan");
  CHECK_THROWS_AS(c.get_double("pretrain.learning_rate"), ConfigError);
}

TEST_CASE("config files overlay the preset and round-trip") {
  TempDir dir;
  {
    std::ofstream f(dir / "a.ini");
    f << "; comment\n[pretrain]\nepochs = 3\n\n[synth]\nnoise_std = 1.25\n";
  }
  Config c = Config::preset("desk");
  c.load_file(dir / "a.ini");
  CHECK(c.get_size("pretrain.epochs") == 3);
  CHECK(c.get_double("synth.noise_std") == 1.25);
  c.set("pretrain.epochs", "4");  // later overlays win
  CHECK(c.get_size("pretrain.epochs") == 4);

  std::ofstream(dir / "b.ini") << c.to_ini();
  Config d = Config::preset("paper");
  d.load_file(dir / "b.ini");
  CHECK(d.values() == c.values());

  std::ofstream(dir / "bad.ini") << "[pretrain]\nwarmup = 3\n";
  CHECK_THROWS_AS(c.load_file(dir / "bad.ini"), ConfigError);
  std::ofstream(dir / "top.ini") << "epochs = 3\n";
  CHECK_THROWS_AS(c.load_file(dir / "top.ini"), ConfigError);
  CHECK_THROWS_AS(c.load_file(dir / "missing.ini"), ConfigError);
}

TEST_CASE("delta resolves per method") {
  const Config c = Config::preset("desk");
  CHECK(resolved_delta_seconds(c, PretrainMethod::contrastive2) == 15.0);
  CHECK(resolved_delta_seconds(c, PretrainMethod::contrastive) == 30.0);
  CHECK(resolved_delta_seconds(c, PretrainMethod::ranking) == 30.0);
  const PretrainConfig p = pretrain_config(c, PretrainMethod::contrastive2, 5.0);
  CHECK(p.sampler.delta_seconds == 15.0);
  CHECK(p.sampler.gamma_seconds == 120.0);
  CHECK(p.loss.second_order_weight == 0.5);
  CHECK(finetune_stride(c, 5.0) == 5);
  CHECK(finetune_stride(c, 0.5) == 1);
}

TEST_CASE("mean and spread formatting") {
  CHECK(format_mean_std(MetricSummary{78.81, 12.46, 5}) == "78.8 ± 12.5");
  CHECK(format_mean_std(MetricSummary{}) == "n/a");
}

TEST_CASE("aggregate reports") {
  VideoMetrics perfect{100.0, 100.0, 100.0, 100.0, {100.0, 100.0, std::nullopt}};
  const std::vector<VideoMetrics> vids{perfect, perfect};
  const AggregateReport rep = aggregate(vids);
  const std::string table = report_table(rep, "perfect");
  CHECK(table.find("100.0 ± 0.0") != std::string::npos);
  CHECK(table.find("(2 videos, mean ± std)") != std::string::npos);
  const std::string csv = report_csv(rep);
  CHECK(csv.rfind("metric,mean,std,count\naccuracy,100,0,2\n", 0) == 0);
  CHECK(csv.find("f1_P3,") != std::string::npos);

  const std::vector<std::string> ids{"v0", "v1"};
  const std::string pv = per_video_csv(ids, vids);
  CHECK(pv.rfind("video_id,accuracy,recall,precision,f1,f1_P1,f1_P2,f1_P3\n", 0) == 0);
  CHECK(std::count(pv.begin(), pv.end(), '\n') == 3);
}

namespace {

AggregateReport with_f1(double f1) {
  AggregateReport r;
  r.accuracy = r.recall = r.precision = MetricSummary{f1, 0.0, 3};
  r.f1 = MetricSummary{f1, 1.0, 3};
  r.videos = 3;
  return r;
}

}  // namespace

TEST_CASE("comparison summaries pair arms by seed") {
  CompareResult res;
  res.arms = {"none", "contrastive", "contrastive2"};
  res.seeds = {1, 2, 3};
  const double base[] = {60.0, 70.0, 65.0};
  const double c1[] = {62.0, 69.0, 66.0};
  const double c2[] = {61.0, 75.0, 64.0};
  for (std::size_t s = 0; s < 3; ++s) {
    res.runs.push_back({res.seeds[s], "none", with_f1(base[s])});
    res.runs.push_back({res.seeds[s], "contrastive", with_f1(c1[s])});
    res.runs.push_back({res.seeds[s], "contrastive2", with_f1(c2[s])});
  }
  const auto rows = compare_summary(res);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].arm == "none");
  CHECK(rows[1].f1.mean == doctest::Approx(197.0 / 3));
  CHECK(rows[1].f1_delta.mean == doctest::Approx((2.0 - 1.0 + 1.0) / 3));
  CHECK(rows[1].wins == 2);
  CHECK(rows[2].f1_delta.mean == doctest::Approx((1.0 + 5.0 - 1.0) / 3));
  const double m = 5.0 / 3;
  const double var = ((1 - m) * (1 - m) + (5 - m) * (5 - m) + (-1 - m) * (-1 - m)) / 2;
  CHECK(rows[2].f1_delta.std == doctest::Approx(std::sqrt(var)));
  CHECK(rows[2].wins == 2);

  const std::string csv = compare_summary_csv(res);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const std::string table = compare_summary_table(res, "t");
  CHECK(table.find("2/3") != std::string::npos);
  const std::string runs = compare_runs_csv(res);
  CHECK(runs.rfind("seed,arm,accuracy,recall,precision,f1,f1_delta,finetune_epochs,reached_stop\n", 0) == 0);
  CHECK(runs.find("2,contrastive2,75,75,75,75,5,") != std::string::npos);
  CHECK(res.run(3, "contrastive").report.f1.mean == 66.0);
}
