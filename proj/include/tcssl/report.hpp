#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcssl/experiment.hpp"
#include "tcssl/metrics.hpp"

namespace tcssl {

/// "78.8 ± 12.5", or "n/a" for an undefined summary.
std::string format_mean_std(const MetricSummary& s);

/// metric,mean,std,count with rows accuracy, recall, precision, f1, f1_P1..f1_PK.
std::string report_csv(const AggregateReport& report);

/// Aligned text table in "mean ± std" style with per-phase F1 columns.
std::string report_table(const AggregateReport& report, std::string_view title);

std::string per_video_csv(std::span<const std::string> video_ids, std::span<const VideoMetrics> metrics);

/// seed,arm,accuracy,recall,precision,f1,f1_delta,finetune_epochs,reached_stop
std::string compare_runs_csv(const CompareResult& result);

struct CompareRow {
  std::string arm;
  MetricSummary accuracy, recall, precision, f1;
  MetricSummary f1_delta;  // per-seed (arm - baseline), summarised
  std::size_t wins = 0;    // seeds with arm F1 above baseline F1
};

std::vector<CompareRow> compare_summary(const CompareResult& result);
std::string compare_summary_csv(const CompareResult& result);
std::string compare_summary_table(const CompareResult& result, std::string_view title);

}  // namespace tcssl
