#include "tcssl/phase_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

PhaseModel::PhaseModel(PhaseArch arch) : arch_(std::move(arch)), encoder_(arch_.encoder) { build_head(); }

PhaseModel::PhaseModel(Encoder encoder, std::size_t lstm_hidden, std::size_t num_phases)
    : arch_{encoder.arch(), lstm_hidden, num_phases}, encoder_(std::move(encoder)) {
  build_head();
}

void PhaseModel::build_head() {
  if (arch_.num_phases < 2) throw ConfigError("phase model needs at least two phases");
  if (arch_.lstm_hidden == 0) throw ConfigError("LSTM width must be positive");
  const std::size_t h = arch_.lstm_hidden;
  const std::size_t d = arch_.encoder.embedding_dim;
  const std::size_t k = arch_.num_phases;
  head_.push_back(make_tensor("lstm.wx", "lstm", {4 * h, d}, d + h));
  head_.push_back(make_tensor("lstm.wh", "lstm", {4 * h, h}, d + h));
  head_.push_back(make_tensor("lstm.b", "lstm", {4 * h}, d + h));
  head_.push_back(make_tensor("classifier.weight", "classifier", {k, h}, h));
  head_.push_back(make_tensor("classifier.bias", "classifier", {k}, h));
}

ParamRefs PhaseModel::parameters() {
  ParamRefs refs = encoder_.parameters();
  for (auto& t : head_) refs.push_back(&t);
  return refs;
}

ConstParamRefs PhaseModel::parameters() const {
  ConstParamRefs refs = encoder_.parameters();
  for (const auto& t : head_) refs.push_back(&t);
  return refs;
}

ParamRefs PhaseModel::head_parameters() {
  ParamRefs refs;
  for (auto& t : head_) refs.push_back(&t);
  return refs;
}

namespace {

// Shared cell update. gates_out receives post-activation [i f g o].
void cell_forward(const PhaseModel& m, const double* x, const double* h_prev, const double* c_prev, double* gates_out,
                  double* c_out, double* h_out, double* logits_out) {
  const std::size_t H = m.hidden();
  const std::size_t d = m.arch().encoder.embedding_dim;
  const auto& wx = m.lstm_wx().values;
  const auto& wh = m.lstm_wh().values;
  const auto& b = m.lstm_bias().values;
  for (std::size_t r = 0; r < 4 * H; ++r) {
    const double* wxr = wx.data() + r * d;
    const double* whr = wh.data() + r * H;
    double a = b[r];
    for (std::size_t i = 0; i < d; ++i) a += wxr[i] * x[i];
    for (std::size_t i = 0; i < H; ++i) a += whr[i] * h_prev[i];
    gates_out[r] = (r >= 2 * H && r < 3 * H) ? std::tanh(a) : sigmoid(a);
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double ig = gates_out[j];
    const double fg = gates_out[H + j];
    const double gg = gates_out[2 * H + j];
    const double og = gates_out[3 * H + j];
    c_out[j] = fg * c_prev[j] + ig * gg;
    h_out[j] = og * std::tanh(c_out[j]);
  }
  const std::size_t K = m.num_phases();
  const auto& cw = m.classifier_weight().values;
  const auto& cb = m.classifier_bias().values;
  for (std::size_t k = 0; k < K; ++k) {
    const double* w = cw.data() + k * H;
    double a = cb[k];
    for (std::size_t j = 0; j < H; ++j) a += w[j] * h_out[j];
    logits_out[k] = a;
  }
}

void check_state(const PhaseModel& m, const LstmState& s) {
  if (s.h.size() != m.hidden() || s.c.size() != m.hidden())
    throw ContractError("LSTM state width " + std::to_string(s.h.size()) + ", expected " + std::to_string(m.hidden()));
}

}  // namespace

StepOutput lstm_step(const PhaseModel& model, std::span<const double> embedding, const LstmState& state_in) {
  if (embedding.size() != model.arch().encoder.embedding_dim)
    throw ContractError("lstm_step: embedding dimension mismatch");
  check_state(model, state_in);
  const std::size_t H = model.hidden();
  std::vector<double> gates(4 * H);
  StepOutput out{std::vector<double>(model.num_phases()), LstmState::zeros(H)};
  cell_forward(model, embedding.data(), state_in.h.data(), state_in.c.data(), gates.data(), out.state.c.data(),
               out.state.h.data(), out.logits.data());
  return out;
}

ChunkOutput phase_forward_chunk(const PhaseModel& model, const Matrix& frames, const LstmState& state_in,
                                PhaseCache* cache) {
  if (frames.rows == 0) throw ContractError("phase_forward_chunk: empty chunk");
  check_state(model, state_in);
  const std::size_t H = model.hidden();
  const std::size_t T = frames.rows;

  EncoderCache local_encoder;
  EncoderCache& enc_cache = cache != nullptr ? cache->encoder : local_encoder;
  Matrix embeddings = model.encoder().forward(frames, enc_cache);
  if (cache == nullptr) local_encoder.inputs.clear();

  ChunkOutput out{Matrix(T, model.num_phases()), state_in};
  Matrix gates(T, 4 * H), cells(T, H), hidden(T, H);
  for (std::size_t t = 0; t < T; ++t) {
    const double* h_prev = t == 0 ? state_in.h.data() : hidden.row(t - 1).data();
    const double* c_prev = t == 0 ? state_in.c.data() : cells.row(t - 1).data();
    cell_forward(model, embeddings.row(t).data(), h_prev, c_prev, gates.row(t).data(), cells.row(t).data(),
                 hidden.row(t).data(), out.logits.row(t).data());
  }
  out.state.h.assign(hidden.row(T - 1).begin(), hidden.row(T - 1).end());
  out.state.c.assign(cells.row(T - 1).begin(), cells.row(T - 1).end());
  if (cache != nullptr) {
    cache->embeddings = std::move(embeddings);
    cache->initial = state_in;
    cache->gates = std::move(gates);
    cache->cells = std::move(cells);
    cache->hidden = std::move(hidden);
  }
  return out;
}

void phase_backward_chunk(const PhaseModel& model, const PhaseCache& cache, const Matrix& logit_grads,
                          Gradients& grads) {
  const std::size_t H = model.hidden();
  const std::size_t d = model.arch().encoder.embedding_dim;
  const std::size_t K = model.num_phases();
  const std::size_t T = cache.hidden.rows;
  if (T == 0 || logit_grads.rows != T || logit_grads.cols != K)
    throw ContractError("phase_backward_chunk: logit gradient shape mismatch");
  const auto params = model.parameters();
  if (grads.buffers.size() != params.size()) throw ContractError("phase_backward_chunk: gradient buffer mismatch");

  const std::size_t off = model.head_offset();
  auto& g_wx = grads.buffers[off];
  auto& g_wh = grads.buffers[off + 1];
  auto& g_b = grads.buffers[off + 2];
  auto& g_cw = grads.buffers[off + 3];
  auto& g_cb = grads.buffers[off + 4];
  const bool lstm_train = model.lstm_wx().trainable || model.lstm_wh().trainable || model.lstm_bias().trainable;
  const auto& wx = model.lstm_wx().values;
  const auto& wh = model.lstm_wh().values;
  const auto& cw = model.classifier_weight().values;

  Matrix d_embed(T, d);
  std::vector<double> dh(H), dc_next(H, 0.0), dh_next(H, 0.0), da(4 * H);
  for (std::size_t t = T; t-- > 0;) {
    const double* dl = logit_grads.row(t).data();
    const double* h = cache.hidden.row(t).data();
    if (model.classifier_weight().trainable)
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < H; ++j) g_cw[k * H + j] += dl[k] * h[j];
    if (model.classifier_bias().trainable)
      for (std::size_t k = 0; k < K; ++k) g_cb[k] += dl[k];
    for (std::size_t j = 0; j < H; ++j) {
      double acc = dh_next[j];
      for (std::size_t k = 0; k < K; ++k) acc += cw[k * H + j] * dl[k];
      dh[j] = acc;
    }
    const double* gt = cache.gates.row(t).data();
    const double* c = cache.cells.row(t).data();
    const double* c_prev = t == 0 ? cache.initial.c.data() : cache.cells.row(t - 1).data();
    const double* h_prev = t == 0 ? cache.initial.h.data() : cache.hidden.row(t - 1).data();
    for (std::size_t j = 0; j < H; ++j) {
      const double ig = gt[j], fg = gt[H + j], gg = gt[2 * H + j], og = gt[3 * H + j];
      const double tc = std::tanh(c[j]);
      const double d_o = dh[j] * tc;
      const double dc = dh[j] * og * (1.0 - tc * tc) + dc_next[j];
      da[j] = dc * gg * ig * (1.0 - ig);
      da[H + j] = dc * c_prev[j] * fg * (1.0 - fg);
      da[2 * H + j] = dc * ig * (1.0 - gg * gg);
      da[3 * H + j] = d_o * og * (1.0 - og);
      dc_next[j] = dc * fg;
    }
    const double* x = cache.embeddings.row(t).data();
    if (lstm_train) {
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double a = da[r];
        if (model.lstm_wx().trainable) {
          double* g = g_wx.data() + r * d;
          for (std::size_t i = 0; i < d; ++i) g[i] += a * x[i];
        }
        if (model.lstm_wh().trainable) {
          double* g = g_wh.data() + r * H;
          for (std::size_t i = 0; i < H; ++i) g[i] += a * h_prev[i];
        }
        if (model.lstm_bias().trainable) g_b[r] += a;
      }
    }
    double* dx = d_embed.row(t).data();
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double a = da[r];
      const double* wxr = wx.data() + r * d;
      for (std::size_t i = 0; i < d; ++i) dx[i] += a * wxr[i];
      if (t > 0) {
        const double* whr = wh.data() + r * H;
        for (std::size_t i = 0; i < H; ++i) dh_next[i] += a * whr[i];
      }
    }
  }

  // Encoder gradients use the leading buffers of `grads`.
  Gradients enc;
  enc.buffers.assign(std::make_move_iterator(grads.buffers.begin()),
                     std::make_move_iterator(grads.buffers.begin() + static_cast<std::ptrdiff_t>(off)));
  model.encoder().backward(cache.encoder, d_embed, enc);
  std::move(enc.buffers.begin(), enc.buffers.end(), grads.buffers.begin());
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size())
    throw ContractError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.size()) +
                        " classes");
  const std::size_t top = argmax(logits);
  const double mx = logits[top];
  double rest = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k)
    if (k != top) rest += std::exp(logits[k] - mx);
  const double log_sum = std::log1p(rest);
  CrossEntropy out;
  out.loss = -(logits[label] - mx - log_sum);
  out.gradient.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out.gradient[k] = std::exp(logits[k] - mx - log_sum);
  out.gradient[label] -= 1.0;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace tcssl
