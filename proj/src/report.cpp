#include "tcssl/report.hpp"

#include <algorithm>
#include <cstdio>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  // "±" is two bytes but one column.
  std::size_t cols = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++cols;
  return cols >= width ? s : std::string(width - cols, ' ') + s;
}

void csv_row(std::string& out, const std::string& name, const MetricSummary& s) {
  out += name + "," + (s.defined() ? full(s.mean) : "") + "," + (s.defined() ? full(s.std) : "") + "," +
         std::to_string(s.count) + "\n";
}

}  // namespace

std::string format_mean_std(const MetricSummary& s) {
  if (!s.defined()) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", s.mean, s.std);
  return buf;
}

std::string report_csv(const AggregateReport& r) {
  std::string out = "metric,mean,std,count\n";
  csv_row(out, "accuracy", r.accuracy);
  csv_row(out, "recall", r.recall);
  csv_row(out, "precision", r.precision);
  csv_row(out, "f1", r.f1);
  for (std::size_t k = 0; k < r.per_phase_f1.size(); ++k) csv_row(out, "f1_P" + std::to_string(k + 1), r.per_phase_f1[k]);
  return out;
}

std::string report_table(const AggregateReport& r, std::string_view title) {
  std::vector<std::string> head = {"Accuracy", "Recall", "Precision", "F1"};
  std::vector<std::string> cells = {format_mean_std(r.accuracy), format_mean_std(r.recall),
                                    format_mean_std(r.precision), format_mean_std(r.f1)};
  for (std::size_t k = 0; k < r.per_phase_f1.size(); ++k) {
    head.push_back("P" + std::to_string(k + 1));
    cells.push_back(format_mean_std(r.per_phase_f1[k]));
  }
  std::string out = std::string(title) + " (" + std::to_string(r.videos) + " videos, mean ± std)\n";
  std::string h, c;
  for (std::size_t i = 0; i < head.size(); ++i) {
    const std::size_t w = std::max<std::size_t>(12, head[i].size()) + 1;
    h += pad(head[i], w);
    c += pad(cells[i], w);
  }
  return out + h + "\n" + c + "\n";
}

std::string per_video_csv(std::span<const std::string> ids, std::span<const VideoMetrics> metrics) {
  if (ids.size() != metrics.size()) throw ContractError("per_video_csv: id/metric count mismatch");
  std::string out = "video_id,accuracy,recall,precision,f1";
  const std::size_t K = metrics.empty() ? 0 : metrics.front().per_phase_f1.size();
  for (std::size_t k = 0; k < K; ++k) out += ",f1_P" + std::to_string(k + 1);
  out += "\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& m = metrics[i];
    out += ids[i] + "," + full(m.accuracy) + "," + full(m.macro_recall) + "," + full(m.macro_precision) + "," +
           full(m.f1);
    for (const auto& p : m.per_phase_f1) out += "," + (p ? full(*p) : std::string());
    out += "\n";
  }
  return out;
}

std::string compare_runs_csv(const CompareResult& result) {
  std::string out = "seed,arm,accuracy,recall,precision,f1,f1_delta,finetune_epochs,reached_stop\n";
  for (const auto& r : result.runs) {
    const double base = result.run(r.seed, "none").report.f1.mean;
    out += std::to_string(r.seed) + "," + r.arm + "," + full(r.report.accuracy.mean) + "," +
           full(r.report.recall.mean) + "," + full(r.report.precision.mean) + "," + full(r.report.f1.mean) + "," +
           full(r.report.f1.mean - base) + "," + std::to_string(r.finetune_epochs) + "," +
           (r.reached_stop ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<CompareRow> compare_summary(const CompareResult& result) {
  std::vector<CompareRow> rows;
  for (const auto& arm : result.arms) {
    std::vector<double> acc, rec, prec, f1, delta;
    CompareRow row;
    row.arm = arm;
    for (std::uint64_t seed : result.seeds) {
      const auto& r = result.run(seed, arm);
      const double base = result.run(seed, "none").report.f1.mean;
      acc.push_back(r.report.accuracy.mean);
      rec.push_back(r.report.recall.mean);
      prec.push_back(r.report.precision.mean);
      f1.push_back(r.report.f1.mean);
      delta.push_back(r.report.f1.mean - base);
      if (r.report.f1.mean > base) ++row.wins;
    }
    row.accuracy = summarize(acc);
    row.recall = summarize(rec);
    row.precision = summarize(prec);
    row.f1 = summarize(f1);
    row.f1_delta = summarize(delta);
    rows.push_back(row);
  }
  return rows;
}

std::string compare_summary_csv(const CompareResult& result) {
  std::string out =
      "arm,accuracy_mean,accuracy_std,recall_mean,recall_std,precision_mean,precision_std,f1_mean,f1_std,"
      "f1_delta_mean,f1_delta_std,wins,seeds\n";
  for (const auto& r : compare_summary(result)) {
    out += r.arm + "," + full(r.accuracy.mean) + "," + full(r.accuracy.std) + "," + full(r.recall.mean) + "," +
           full(r.recall.std) + "," + full(r.precision.mean) + "," + full(r.precision.std) + "," + full(r.f1.mean) +
           "," + full(r.f1.std) + "," + full(r.f1_delta.mean) + "," + full(r.f1_delta.std) + "," +
           std::to_string(r.wins) + "," + std::to_string(result.seeds.size()) + "\n";
  }
  return out;
}

std::string compare_summary_table(const CompareResult& result, std::string_view title) {
  const char* head[] = {"Method", "Accuracy", "Recall", "Precision", "F1", "dF1 vs none", "Wins"};
  const std::size_t width[] = {14, 13, 13, 13, 13, 13, 6};
  std::string out = std::string(title) + " (" + std::to_string(result.seeds.size()) + " seeds, mean ± std)\n";
  for (std::size_t i = 0; i < 7; ++i) out += pad(head[i], width[i] + 1);
  out += "\n";
  for (const auto& r : compare_summary(result)) {
    const std::string cells[] = {r.arm,
                                 format_mean_std(r.accuracy),
                                 format_mean_std(r.recall),
                                 format_mean_std(r.precision),
                                 format_mean_std(r.f1),
                                 r.arm == "none" ? "-" : format_mean_std(r.f1_delta),
                                 r.arm == "none" ? "-" : std::to_string(r.wins) + "/" + std::to_string(result.seeds.size())};
    for (std::size_t i = 0; i < 7; ++i) out += pad(cells[i], width[i] + 1);
    out += "\n";
  }
  return out;
}

}  // namespace tcssl
