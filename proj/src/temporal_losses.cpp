#include "tcssl/temporal_losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcssl/errors.hpp"

namespace tcssl {

namespace {

void check_dims(std::span<const EmbeddingView> inputs) {
  if (inputs.empty() || inputs.front().empty()) throw ContractError("embeddings must have dimension >= 1");
  const std::size_t d = inputs.front().size();
  for (const auto& e : inputs)
    if (e.size() != d)
      throw ContractError("embedding dimension mismatch: " + std::to_string(d) + " vs " +
                          std::to_string(e.size()));
}

Embedding difference(EmbeddingView a, EmbeddingView b) {
  Embedding out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

// d D(a,b) / d a; the gradient with respect to b is its negation.
void accumulate_distance_grad(EmbeddingView a, EmbeddingView b, double scale, Embedding& grad_a,
                              Embedding& grad_b) {
  const double dist = l2_distance(a, b);
  if (dist == 0.0) return;
  const double s = scale / dist;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double g = s * (a[i] - b[i]);
    grad_a[i] += g;
    grad_b[i] -= g;
  }
}

std::vector<Embedding> contrastive_grads(EmbeddingView t, EmbeddingView n, EmbeddingView f, const LossConfig& cfg) {
  std::vector<Embedding> g(3, Embedding(t.size(), 0.0));
  accumulate_distance_grad(t, n, 1.0, g[0], g[1]);
  if (cfg.margin_contrastive - l2_distance(t, f) > 0.0) accumulate_distance_grad(t, f, -1.0, g[0], g[2]);
  return g;
}

std::vector<Embedding> ranking_grads(EmbeddingView t, EmbeddingView n, EmbeddingView f, const LossConfig& cfg) {
  std::vector<Embedding> g(3, Embedding(t.size(), 0.0));
  if (l2_distance(t, n) - l2_distance(t, f) + cfg.margin_ranking > 0.0) {
    accumulate_distance_grad(t, n, 1.0, g[0], g[1]);
    accumulate_distance_grad(t, f, -1.0, g[0], g[2]);
  }
  return g;
}

std::vector<Embedding> second_order_grads(EmbeddingView t, EmbeddingView td, EmbeddingView t2d, EmbeddingView tg,
                                          const LossConfig& cfg) {
  const Embedding u = difference(t, td);
  const Embedding v = difference(td, t2d);
  const Embedding w = difference(td, tg);
  const auto inner = contrastive_grads(u, v, w, cfg);
  const std::size_t d = t.size();
  std::vector<Embedding> g(4, Embedding(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    g[0][i] = inner[0][i];
    g[1][i] = -inner[0][i] + inner[1][i] + inner[2][i];
    g[2][i] = -inner[1][i];
    g[3][i] = -inner[2][i];
  }
  return g;
}

}  // namespace

void LossConfig::validate() const {
  if (!(margin_contrastive >= 0.0) || !(margin_ranking >= 0.0) || !(second_order_weight >= 0.0))
    throw ConfigError("loss margins and second-order weight must be nonnegative");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::contrastive: return "contrastive";
    case LossKind::ranking: return "ranking";
    case LossKind::contrastive2: return "contrastive2";
    case LossKind::combined: return "combined";
  }
  return "?";
}

std::size_t loss_arity(LossKind kind) {
  return (kind == LossKind::contrastive || kind == LossKind::ranking) ? 3 : 4;
}

double l2_distance(EmbeddingView a, EmbeddingView b) {
  if (a.size() != b.size())
    throw ContractError("l2_distance: dimension mismatch " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double contrastive_loss(EmbeddingView anchor, EmbeddingView near, EmbeddingView far, const LossConfig& cfg) {
  const EmbeddingView in[] = {anchor, near, far};
  check_dims(in);
  return l2_distance(anchor, near) + std::max(0.0, cfg.margin_contrastive - l2_distance(anchor, far));
}

double ranking_loss(EmbeddingView anchor, EmbeddingView near, EmbeddingView far, const LossConfig& cfg) {
  const EmbeddingView in[] = {anchor, near, far};
  check_dims(in);
  return std::max(0.0, l2_distance(anchor, near) - l2_distance(anchor, far) + cfg.margin_ranking);
}

double second_order_contrastive_loss(EmbeddingView f_t, EmbeddingView f_td, EmbeddingView f_t2d,
                                     EmbeddingView f_tg, const LossConfig& cfg) {
  const EmbeddingView in[] = {f_t, f_td, f_t2d, f_tg};
  check_dims(in);
  return contrastive_loss(difference(f_t, f_td), difference(f_td, f_t2d), difference(f_td, f_tg), cfg);
}

double combined_loss(EmbeddingView f_t, EmbeddingView f_td, EmbeddingView f_t2d, EmbeddingView f_tg,
                     const LossConfig& cfg) {
  return contrastive_loss(f_t, f_td, f_tg, cfg) +
         cfg.second_order_weight * second_order_contrastive_loss(f_t, f_td, f_t2d, f_tg, cfg);
}

double loss_value(LossKind kind, std::span<const EmbeddingView> in, const LossConfig& cfg) {
  if (in.size() != loss_arity(kind))
    throw ContractError(std::string(to_string(kind)) + " loss expects " + std::to_string(loss_arity(kind)) +
                        " embeddings, got " + std::to_string(in.size()));
  switch (kind) {
    case LossKind::contrastive: return contrastive_loss(in[0], in[1], in[2], cfg);
    case LossKind::ranking: return ranking_loss(in[0], in[1], in[2], cfg);
    case LossKind::contrastive2: return second_order_contrastive_loss(in[0], in[1], in[2], in[3], cfg);
    case LossKind::combined: return combined_loss(in[0], in[1], in[2], in[3], cfg);
  }
  return 0.0;
}

std::vector<Embedding> loss_gradients(LossKind kind, std::span<const EmbeddingView> in, const LossConfig& cfg) {
  if (in.size() != loss_arity(kind))
    throw ContractError(std::string(to_string(kind)) + " loss expects " + std::to_string(loss_arity(kind)) +
                        " embeddings, got " + std::to_string(in.size()));
  check_dims(in);
  switch (kind) {
    case LossKind::contrastive: return contrastive_grads(in[0], in[1], in[2], cfg);
    case LossKind::ranking: return ranking_grads(in[0], in[1], in[2], cfg);
    case LossKind::contrastive2: return second_order_grads(in[0], in[1], in[2], in[3], cfg);
    case LossKind::combined: {
      auto g = second_order_grads(in[0], in[1], in[2], in[3], cfg);
      for (auto& v : g)
        for (double& x : v) x *= cfg.second_order_weight;
      const auto first = contrastive_grads(in[0], in[1], in[3], cfg);
      const std::size_t slot[] = {0, 1, 3};
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < g[slot[k]].size(); ++i) g[slot[k]][i] += first[k][i];
      return g;
    }
  }
  return {};
}

}  // namespace tcssl
