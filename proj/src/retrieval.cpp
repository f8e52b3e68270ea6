#include "tcssl/retrieval.hpp"

#include <algorithm>
#include <cstdio>

#include "tcssl/errors.hpp"
#include "tcssl/temporal_losses.hpp"

namespace tcssl {

NearestFrame nearest_frame(std::span<const double> query, const Matrix& video_embeddings) {
  if (video_embeddings.rows == 0) throw ContractError("nearest_frame: empty video");
  if (video_embeddings.cols != query.size()) throw ContractError("nearest_frame: dimension mismatch");
  NearestFrame best{0, l2_distance(query, video_embeddings.row(0))};
  for (std::size_t t = 1; t < video_embeddings.rows; ++t) {
    const double d = l2_distance(query, video_embeddings.row(t));
    if (d < best.distance) best = {t, d};
  }
  return best;
}

std::vector<Query> make_queries(const FrameSequence& video, std::span<const std::size_t> frame_indices) {
  std::vector<Query> out;
  for (std::size_t t : frame_indices) {
    if (t >= video.frames()) throw ContractError("query frame " + std::to_string(t) + " beyond " + video.video_id);
    Query q;
    q.query_id = video.video_id + "@" + std::to_string(t);
    q.video_id = video.video_id;
    q.frame_index = t;
    const auto f = video.frame(t);
    q.features.assign(f.begin(), f.end());
    if (video.labels) q.phase = (*video.labels)[t];
    out.push_back(std::move(q));
  }
  return out;
}

RetrievalReport retrieval_report(std::span<const Query> queries, std::span<const FrameSequence> corpus,
                                 const Encoder& encoder) {
  std::vector<Matrix> embedded;
  for (const auto& v : corpus) {
    if (v.feature_dim != encoder.input_dim())
      throw ContractError(v.video_id + ": feature dimension does not match the encoder");
    embedded.push_back(encoder.forward(v.frame_block(0, v.frames())));
  }
  RetrievalReport report;
  std::size_t agree = 0;
  for (const auto& q : queries) {
    if (q.features.size() != encoder.input_dim()) throw ContractError(q.query_id + ": feature dimension mismatch");
    const std::vector<double> x(q.features.begin(), q.features.end());
    const Embedding e = encoder.forward(x);
    RetrievalResult r{q, {}};
    for (std::size_t v = 0; v < corpus.size(); ++v) {
      const NearestFrame nf = nearest_frame(e, embedded[v]);
      Match m{corpus[v].video_id, nf.index, nf.distance, std::nullopt};
      if (corpus[v].labels) m.phase = (*corpus[v].labels)[nf.index];
      if (q.phase && m.phase) {
        ++report.compared;
        if (*q.phase == *m.phase) ++agree;
      }
      r.matches.push_back(std::move(m));
    }
    std::stable_sort(r.matches.begin(), r.matches.end(),
                     [](const Match& a, const Match& b) { return a.distance < b.distance; });
    report.results.push_back(std::move(r));
  }
  if (report.compared > 0) report.phase_agreement = static_cast<double>(agree) / static_cast<double>(report.compared);
  return report;
}

std::string retrieval_csv(const RetrievalReport& report) {
  std::string out = "query_id,video_id,frame_index,distance,query_phase,retrieved_phase\n";
  char buf[64];
  for (const auto& r : report.results) {
    for (const auto& m : r.matches) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.distance);
      out += r.query.query_id + "," + m.video_id + "," + std::to_string(m.frame_index) + "," + buf + "," +
             (r.query.phase ? std::to_string(*r.query.phase) : "") + "," +
             (m.phase ? std::to_string(*m.phase) : "") + "\n";
    }
  }
  return out;
}

}  // namespace tcssl
