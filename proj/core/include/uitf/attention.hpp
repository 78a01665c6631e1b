#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "uitf/errors.hpp"
#include "uitf/tensor.hpp"

namespace uitf::attn {

/// Q/K/V for one multi-head call, each laid out [heads, tokens, dim].
/// Q and K share head_dim (the 1/sqrt(head_dim) normalizer); V may carry a
/// different value_dim.
template <typename T>
struct AttentionInputs {
    Tensor<T> q, k, v;

    std::size_t heads() const { return q.shape.size() > 0 ? q.shape[0] : 0; }
    std::size_t tokens() const { return q.shape.size() > 1 ? q.shape[1] : 0; }
    std::size_t head_dim() const { return q.shape.size() > 2 ? q.shape[2] : 0; }
    std::size_t value_dim() const { return v.shape.size() > 2 ? v.shape[2] : 0; }

    /// Shape agreement, at least one head and token, all values finite.
    void validate() const;
};

/// Tile extents of the streaming passes. Scratch per worker is one
/// b_q x b_kv score block plus per-row accumulators.
struct BlockConfig {
    std::size_t b_q = 128;
    std::size_t b_kv = 128;

    void validate() const;
};

/// Mean attention entropy per head, in nats.
struct EntropyReport {
    std::vector<double> per_head;
    double h_min = 0.0;
    double h_max = 0.0;
};

/// Bounds and curvature of the entropy-to-focus mapping.
struct ConcentrationConfig {
    double lambda_min = 1.0;
    double lambda_max = 1.3;
    double exponent_p = 2.0;

    void validate() const;
};

/// Per-head logit scale factors.
struct FocusMap {
    std::vector<double> per_head;
};

struct MemoryReport {
    std::uint64_t engine_bytes = 0;
    std::uint64_t naive_bytes = 0;
};

/// Stage-1 result kept for later denoising steps.
struct ConcentrationCache {
    EntropyReport entropy;
    FocusMap focus;
    bool valid = false;
};

template <typename T>
struct ConcentratedResult {
    Tensor<T> output;
    EntropyReport entropy;
    FocusMap focus;
};

/// Mean Shannon entropy of softmax(QK^T/sqrt(D)) rows, per head, computed in
/// one streaming pass: per row it carries a running max m, normalizer l and
/// logit-weighted sum t, and closes with H = m + ln(l) - t/l. Never holds
/// more than one b_q x b_kv score block per worker. Row entropies land in
/// *row_entropies ([heads * tokens], row-major) when given. workers = 0
/// means one per hardware thread; results do not depend on the count.
template <typename T>
EntropyReport entropy_pass(const AttentionInputs<T>& inputs, const BlockConfig& blocks = {},
                           std::size_t workers = 0, std::vector<double>* row_entropies = nullptr);

/// lambda_a = lambda_min + (lambda_max - lambda_min) *
/// ((h_max - H_a)/(h_max - h_min))^p. Degenerate h_max = h_min maps every
/// head to lambda_min.
FocusMap focus_map(const EntropyReport& report, const ConcentrationConfig& cfg = {});

/// softmax(lambda_a * QK^T/sqrt(D)) V per head via the tiled online-softmax
/// recurrence; kv blocks are consumed in ascending order, so outputs are
/// bit-identical for any worker count. The focus factor scales the
/// normalized logits before max subtraction. *peak_scratch (when given)
/// receives the largest per-worker scratch footprint in bytes.
template <typename T>
Tensor<T> attention_forward(const AttentionInputs<T>& inputs, const FocusMap& focus,
                            const BlockConfig& blocks = {}, std::size_t workers = 0,
                            std::uint64_t* peak_scratch = nullptr);

/// Analytic footprints: engine_bytes is the per-worker streaming scratch
/// (b_q*b_kv scores + b_q*(head_dim + value_dim + 3) row state), naive_bytes
/// the heads * n^2 score matrix a dense pass would materialize.
MemoryReport memory_report(std::size_t n, std::size_t heads, std::size_t head_dim,
                           std::size_t value_dim, const BlockConfig& blocks = {},
                           std::size_t elem_bytes = sizeof(float));

/// Stage 1 + Eq.-style mapping + Stage 2 in one call. With reuse_cache set
/// and a valid cache, stage 1 is skipped and the cached focus map reused;
/// otherwise the fresh entropy/focus pair is stored into *cache when given.
template <typename T>
ConcentratedResult<T> concentrated_attention(const AttentionInputs<T>& inputs,
                                             const ConcentrationConfig& cfg = {},
                                             const BlockConfig& blocks = {},
                                             ConcentrationCache* cache = nullptr,
                                             bool reuse_cache = false, std::size_t workers = 0);

} // namespace uitf::attn
