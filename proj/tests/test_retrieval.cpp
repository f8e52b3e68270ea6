#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <limits>

#include "support/oracles.hpp"
#include "tcssl/retrieval.hpp"
#include "tcssl/rng.hpp"
#include "tcssl/synthetic.hpp"

using namespace tcssl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (auto& v : m.data) v = rng.uniform(-1.0, 1.0);
  return m;
}

Encoder random_encoder(std::size_t input_dim, std::uint64_t seed) {
  Rng rng(seed);
  Encoder e(EncoderArch{input_dim, {12}, 6});
  init_uniform_fan(e.parameters(), rng);
  return e;
}

}  // namespace

TEST_CASE("a row retrieves itself at distance zero") {
  Rng rng(1);
  const Matrix m = random_matrix(40, 5, rng);
  const NearestFrame nf = nearest_frame(m.row(17), m);
  CHECK(nf.index == 17);
  CHECK(nf.distance == 0.0);
}

TEST_CASE("ties resolve to the lowest index") {
  Matrix m(5, 2, 1.0);
  const std::vector<double> q{0.0, 0.0};
  CHECK(nearest_frame(q, m).index == 0);
  m(1, 0) = -1.0;  // same distance as row 0
  m(3, 0) = 0.5;
  CHECK(nearest_frame(q, m).index == 3);
}

TEST_CASE("nearest frame agrees with an exhaustive scan") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(200, 8, rng);
    std::vector<double> q(8);
    for (auto& v : q) v = rng.uniform(-1.5, 1.5);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.rows; ++r) {
      const std::vector<double> row(m.row(r).begin(), m.row(r).end());
      const double d = oracle::distance(q, row);
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    const NearestFrame nf = nearest_frame(q, m);
    CHECK(nf.index == best);
    CHECK(nf.distance == doctest::Approx(best_d).epsilon(1e-12));

    // Appending rows no closer than the best leaves the answer unchanged.
    Matrix grown = m;
    for (int k = 0; k < 20; ++k) {
      for (std::size_t c = 0; c < 8; ++c) grown.data.push_back(q[c] + (c == 0 ? best_d + 0.1 * (k + 1) : 0.0));
      ++grown.rows;
    }
    CHECK(nearest_frame(q, grown).index == best);
  }
}

TEST_CASE("reports hold one sorted match per corpus video") {
  Rng rng(3);
  const Dataset ds = generate_dataset(SynthConfig{}, 8, rng);
  const Encoder enc = random_encoder(ds.videos[0].feature_dim, 4);
  const std::vector<std::size_t> frames{0, 50, 200};
  const auto queries = make_queries(ds.videos[0], frames);
  REQUIRE(queries.size() == 3);
  CHECK(queries[1].query_id == ds.videos[0].video_id + "@50");
  CHECK(queries[1].phase == (*ds.videos[0].labels)[50]);

  const std::span<const FrameSequence> corpus(ds.videos.data() + 1, ds.videos.size() - 1);
  const RetrievalReport rep = retrieval_report(queries, corpus, enc);
  REQUIRE(rep.results.size() == 3);
  CHECK(rep.compared == 3 * corpus.size());
  REQUIRE(rep.phase_agreement);
  CHECK(*rep.phase_agreement >= 0.0);
  CHECK(*rep.phase_agreement <= 1.0);

  std::size_t agree = 0;
  for (const auto& r : rep.results) {
    REQUIRE(r.matches.size() == corpus.size());
    std::set<std::string> seen;
    for (std::size_t i = 0; i < r.matches.size(); ++i) {
      seen.insert(r.matches[i].video_id);
      if (i > 0) CHECK(r.matches[i - 1].distance <= r.matches[i].distance);
      if (r.matches[i].phase == r.query.phase) ++agree;
      // Each match is the exact nearest frame of its video.
      const auto& v = *std::find_if(corpus.begin(), corpus.end(),
                                    [&](const FrameSequence& s) { return s.video_id == r.matches[i].video_id; });
      const Matrix emb = enc.forward(v.frame_block(0, v.frames()));
      const std::vector<double> x(r.query.features.begin(), r.query.features.end());
      CHECK(nearest_frame(enc.forward(x), emb).index == r.matches[i].frame_index);
    }
    CHECK(seen.size() == corpus.size());
  }
  CHECK(*rep.phase_agreement == doctest::Approx(static_cast<double>(agree) / rep.compared));

  const std::string csv = retrieval_csv(rep);
  CHECK(csv.rfind("query_id,video_id,frame_index,distance,query_phase,retrieved_phase\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(1 + 3 * corpus.size()));
}

TEST_CASE("a constant embedding retrieves the first frame of every video") {
  Rng rng(5);
  const Dataset ds = generate_dataset(SynthConfig{}, 6, rng);
  Encoder enc = random_encoder(ds.videos[0].feature_dim, 6);
  for (Tensor* t : enc.parameters()) std::fill(t->values.begin(), t->values.end(), 0.0);
  const std::vector<std::size_t> frames{10, 300};
  const auto queries = make_queries(ds.videos[0], frames);
  const RetrievalReport rep = retrieval_report(queries, ds.videos, enc);
  double expected = 0.0;
  for (const auto& q : queries)
    for (const auto& v : ds.videos) expected += (*v.labels)[0] == *q.phase ? 1.0 : 0.0;
  for (const auto& r : rep.results)
    for (const auto& m : r.matches) CHECK(m.frame_index == 0);
  CHECK(*rep.phase_agreement == doctest::Approx(expected / rep.compared));
}

TEST_CASE("unlabeled corpora give no agreement figure") {
  Rng rng(7);
  Dataset ds = generate_dataset(SynthConfig{}, 4, rng);
  for (auto& v : ds.videos) v.labels.reset();
  const Encoder enc = random_encoder(ds.videos[0].feature_dim, 8);
  const std::vector<std::size_t> frames{3};
  const RetrievalReport rep = retrieval_report(make_queries(ds.videos[0], frames), ds.videos, enc);
  CHECK(!rep.phase_agreement);
  CHECK(rep.compared == 0);
  CHECK_THROWS(make_queries(ds.videos[0], std::vector<std::size_t>{ds.videos[0].frames()}));
}
