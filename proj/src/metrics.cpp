#include "tcssl/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

double harmonic(double a, double b) { return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0; }

}  // namespace

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t num_phases) {
  if (truth.size() != pred.size())
    throw ContractError("confusion_matrix: " + std::to_string(truth.size()) + " labels vs " +
                        std::to_string(pred.size()) + " predictions");
  ConfusionMatrix cm{num_phases, std::vector<std::size_t>(num_phases * num_phases, 0)};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(truth[i]) >= num_phases ||
        static_cast<std::size_t>(pred[i]) >= num_phases)
      throw ContractError("confusion_matrix: label out of range at frame " + std::to_string(i));
    ++cm.counts[static_cast<std::size_t>(truth[i]) * num_phases + static_cast<std::size_t>(pred[i])];
  }
  return cm;
}

VideoMetrics video_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t num_phases) {
  if (truth.empty()) throw ContractError("video_metrics: empty sequence");
  const ConfusionMatrix cm = confusion_matrix(truth, pred, num_phases);
  const std::size_t K = num_phases;
  VideoMetrics m;
  m.per_phase_f1.assign(K, std::nullopt);

  std::size_t correct = 0;
  double recall_sum = 0.0, precision_sum = 0.0;
  std::size_t recall_n = 0, precision_n = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t tp = cm(k, k);
    correct += tp;
    std::size_t in_truth = 0, in_pred = 0;
    for (std::size_t j = 0; j < K; ++j) {
      in_truth += cm(k, j);
      in_pred += cm(j, k);
    }
    std::optional<double> recall, precision;
    if (in_truth > 0) {
      recall = 100.0 * static_cast<double>(tp) / static_cast<double>(in_truth);
      recall_sum += *recall;
      ++recall_n;
    }
    if (in_pred > 0) {
      precision = 100.0 * static_cast<double>(tp) / static_cast<double>(in_pred);
      precision_sum += *precision;
      ++precision_n;
    }
    if (recall && precision) m.per_phase_f1[k] = harmonic(*recall, *precision);
  }
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
  m.macro_recall = recall_sum / static_cast<double>(recall_n);
  m.macro_precision = precision_sum / static_cast<double>(precision_n);
  m.f1 = harmonic(m.macro_recall, m.macro_precision);
  return m;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

AggregateReport aggregate(std::span<const VideoMetrics> videos) {
  if (videos.empty()) throw ContractError("aggregate: no videos");
  const std::size_t K = videos.front().per_phase_f1.size();
  std::vector<double> acc, rec, prec, f1;
  std::vector<std::vector<double>> phase(K);
  for (const auto& v : videos) {
    if (v.per_phase_f1.size() != K) throw ContractError("aggregate: videos disagree on the number of phases");
    acc.push_back(v.accuracy);
    rec.push_back(v.macro_recall);
    prec.push_back(v.macro_precision);
    f1.push_back(v.f1);
    for (std::size_t k = 0; k < K; ++k)
      if (v.per_phase_f1[k]) phase[k].push_back(*v.per_phase_f1[k]);
  }
  AggregateReport r;
  r.videos = videos.size();
  r.accuracy = summarize(acc);
  r.recall = summarize(rec);
  r.precision = summarize(prec);
  r.f1 = summarize(f1);
  for (const auto& p : phase) r.per_phase_f1.push_back(summarize(p));
  return r;
}

}  // namespace tcssl
