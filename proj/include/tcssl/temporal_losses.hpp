#pragma once

// Temporal-coherence losses over frame embeddings and their gradients.
//
// All distances are unsquared Euclidean norms. At D = 0 the distance term
// contributes a zero subgradient; a hinge whose argument is exactly 0 is
// treated as inactive.

#include <span>
#include <string_view>
#include <vector>

namespace tcssl {

using Embedding = std::vector<double>;
using EmbeddingView = std::span<const double>;

struct LossConfig {
  double margin_contrastive = 2.0;
  double margin_ranking = 2.0;
  double second_order_weight = 0.5;

  void validate() const;
};

enum class LossKind { contrastive, ranking, contrastive2, combined };

std::string_view to_string(LossKind kind);

/// Number of embeddings a loss of this kind consumes (3 or 4).
std::size_t loss_arity(LossKind kind);

double l2_distance(EmbeddingView a, EmbeddingView b);

/// D(anchor, near) + max(0, m_c - D(anchor, far))
double contrastive_loss(EmbeddingView anchor, EmbeddingView near, EmbeddingView far, const LossConfig& cfg);

/// max(0, D(anchor, near) - D(anchor, far) + m_r)
double ranking_loss(EmbeddingView anchor, EmbeddingView near, EmbeddingView far, const LossConfig& cfg);

/// Contrastive loss on first differences:
/// L_c(f_t - f_td, f_td - f_t2d, f_td - f_tg).
double second_order_contrastive_loss(EmbeddingView f_t, EmbeddingView f_td, EmbeddingView f_t2d,
                                     EmbeddingView f_tg, const LossConfig& cfg);

/// contrastive_loss(f_t, f_td, f_tg) + w * second_order_contrastive_loss(...)
double combined_loss(EmbeddingView f_t, EmbeddingView f_td, EmbeddingView f_t2d, EmbeddingView f_tg,
                     const LossConfig& cfg);

double loss_value(LossKind kind, std::span<const EmbeddingView> inputs, const LossConfig& cfg);

/// Analytic (sub)gradient of the loss with respect to each input embedding.
std::vector<Embedding> loss_gradients(LossKind kind, std::span<const EmbeddingView> inputs,
                                      const LossConfig& cfg);

}  // namespace tcssl
