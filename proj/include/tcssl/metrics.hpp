#pragma once

#include <optional>
#include <span>
#include <vector>

namespace tcssl {

/// K x K frame counts; entry (i, j) counts frames with truth i predicted as j.
struct ConfusionMatrix {
  std::size_t num_phases = 0;
  std::vector<std::size_t> counts;

  std::size_t operator()(std::size_t truth, std::size_t pred) const { return counts[truth * num_phases + pred]; }
  std::size_t total() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t num_phases);

/// Per-video metrics in percent.
struct VideoMetrics {
  double accuracy = 0.0;
  double macro_recall = 0.0;
  double macro_precision = 0.0;
  double f1 = 0.0;
  std::vector<std::optional<double>> per_phase_f1;
};

/// Recall averages phases present in the ground truth, precision averages
/// phases that were predicted at least once; F1 is the harmonic mean of the
/// two macro values for this video.
VideoMetrics video_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t num_phases);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when count == 1
  std::size_t count = 0;

  bool defined() const { return count > 0; }
};

/// Sample mean and standard deviation (n - 1 denominator).
MetricSummary summarize(std::span<const double> values);

struct AggregateReport {
  MetricSummary accuracy;
  MetricSummary recall;
  MetricSummary precision;
  MetricSummary f1;
  std::vector<MetricSummary> per_phase_f1;
  std::size_t videos = 0;
};

AggregateReport aggregate(std::span<const VideoMetrics> videos);

}  // namespace tcssl
