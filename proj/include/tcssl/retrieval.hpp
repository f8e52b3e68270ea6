#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcssl/encoder.hpp"
#include "tcssl/frame_sequence.hpp"
#include "tcssl/tensor.hpp"

namespace tcssl {

struct NearestFrame {
  std::size_t index = 0;
  double distance = 0.0;
};

/// Exact nearest row of `video_embeddings` under the L2 distance; ties go
/// to the lowest index.
NearestFrame nearest_frame(std::span<const double> query, const Matrix& video_embeddings);

struct Match {
  std::string video_id;
  std::size_t frame_index = 0;
  double distance = 0.0;
  std::optional<int> phase;
};

struct Query {
  std::string query_id;
  std::string video_id;
  std::size_t frame_index = 0;
  std::vector<float> features;
  std::optional<int> phase;
};

struct RetrievalResult {
  Query query;
  std::vector<Match> matches;  // one per corpus video, ascending distance
};

struct RetrievalReport {
  std::vector<RetrievalResult> results;
  /// Fraction of matches whose phase equals the query's; absent without labels.
  std::optional<double> phase_agreement;
  std::size_t compared = 0;
};

/// Query frames `frame_indices` of `video`, ids "<video_id>@<frame>".
std::vector<Query> make_queries(const FrameSequence& video, std::span<const std::size_t> frame_indices);

/// Embeds each corpus video once and answers every query against it.
RetrievalReport retrieval_report(std::span<const Query> queries, std::span<const FrameSequence> corpus,
                                 const Encoder& encoder);

/// CSV with header query_id,video_id,frame_index,distance,query_phase,retrieved_phase.
std::string retrieval_csv(const RetrievalReport& report);

}  // namespace tcssl
