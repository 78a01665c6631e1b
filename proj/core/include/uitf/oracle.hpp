#pragma once

#include <cstddef>
#include <vector>

#include "uitf/attention.hpp"
#include "uitf/rope.hpp"
#include "uitf/tensor.hpp"

namespace uitf::oracle {

/// Largest token count the dense reference will materialize (one N x N
/// double matrix per head, processed head by head).
inline constexpr std::size_t kDenseCap = 4096;

/// Dense softmax(lambda_a * QK^T / sqrt(D)) V with all math in double.
/// Slow, quadratic, and obviously correct; ground truth for the engine.
template <typename T>
Tensor<double> naive_attention(const attn::AttentionInputs<T>& inputs,
                               const std::vector<double>& lambdas);

/// Dense per-head mean Shannon entropy of softmax(QK^T / sqrt(D)) rows,
/// 0 * log 0 read as 0. Raw math, no clamping. Row entropies land in
/// *row_entropies ([heads * tokens]) when given.
template <typename T>
attn::EntropyReport naive_entropy(const attn::AttentionInputs<T>& inputs,
                                  std::vector<double>* row_entropies = nullptr);

/// The d' x d' block-diagonal rotation matrix for one axis at one position.
/// Multiplying a vector by it equals apply_rope_1d.
Tensor<double> dense_rope_matrix(const rope::FrequencySchedule& schedule, double position);

} // namespace uitf::oracle
