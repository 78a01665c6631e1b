#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uitf/attention.hpp"
#include "uitf/rope.hpp"
#include "uitf/tensor.hpp"

namespace uitf::harness {

/// Seeded stand-in for one transformer attention block: Q/K/V projection
/// weights drawn from a standard normal scaled by 1/sqrt(fan-in).
struct ToyLayer {
    std::uint64_t seed = 0;
    std::size_t heads = 0;
    std::size_t feature_dim = 0;
    std::size_t head_dim = 0;
    std::size_t value_dim = 0;
    Tensor<double> wq, wk, wv;
};

/// Tokens of one (height x width) latent in row-major h-major order:
/// token i sits at grid position (i / width, i % width).
struct TokenGrid {
    std::size_t height = 0;
    std::size_t width = 0;
    Tensor<double> tokens;
};

/// Everything one forward pass produces: attention output plus the scalar
/// per-position norm tracks the repetition diagnostic reads (track_h[r] is
/// the mean output norm of grid row r, track_w[c] of column c).
struct LayerRun {
    Tensor<double> output;
    attn::EntropyReport entropy;
    attn::FocusMap focus;
    std::vector<double> track_h;
    std::vector<double> track_w;
};

struct RepetitionEntry {
    char axis = 'h';
    std::size_t period = 0;
    double score = 0.0;
};

/// Desk-scale diagnostics for one schedule pair: per-head entropy at the
/// training and target grids, and circular-autocorrelation scores at the
/// schedule periods that fit each target axis.
struct GridStats {
    attn::EntropyReport train_entropy;
    attn::EntropyReport target_entropy;
    std::vector<RepetitionEntry> repetition;
};

/// Weights are drawn in a fixed order (wq, wk, wv; row-major), so a seed
/// pins the layer bit-for-bit.
ToyLayer make_layer(std::uint64_t seed, std::size_t heads, std::size_t feature_dim,
                    std::size_t head_dim, std::size_t value_dim);

/// Seeded standard-normal tokens for a height x width grid.
TokenGrid token_grid(std::size_t height, std::size_t width, std::size_t feature_dim,
                     std::uint64_t seed);

/// Q/K/V projection only; no positions involved.
attn::AttentionInputs<double> project_qkv(const ToyLayer& layer, const TokenGrid& grid);

/// 2D rotary encoding of Q and K in place. V is never touched: the value
/// path carries no position dependence.
void apply_grid_rope(attn::AttentionInputs<double>& inputs, std::size_t width,
                     const rope::FrequencySchedule& sched_h,
                     const rope::FrequencySchedule& sched_w);

/// Full pipeline: project, rotate Q/K, run concentrated attention, reduce
/// the output to per-row and per-column norm tracks.
LayerRun run_layer(const ToyLayer& layer, const TokenGrid& grid,
                   const rope::FrequencySchedule& sched_h, const rope::FrequencySchedule& sched_w,
                   const attn::ConcentrationConfig& cfg = {}, const attn::BlockConfig& blocks = {},
                   attn::ConcentrationCache* cache = nullptr, bool reuse_cache = false,
                   std::size_t workers = 0);

/// Runs the layer at the training and target grid sizes of spec and scores
/// repetition on the target tracks at every schedule period that fits.
GridStats grid_diagnostics(const ToyLayer& layer, const rope::FrequencySchedule& sched_h,
                           const rope::FrequencySchedule& sched_w, const rope::ResolutionSpec& spec,
                           const attn::ConcentrationConfig& cfg = {},
                           const attn::BlockConfig& blocks = {}, std::uint64_t grid_seed = 1,
                           std::size_t workers = 0);

/// Normalized circular autocorrelation of a mean-centered sequence at one
/// lag; always in [-1, 1]. A constant sequence has no defined score.
double repetition_score(std::span<const double> values, std::size_t candidate_period);

/// cos(freqs[index] * p) for p in [0, length): the scalar encoding trace of
/// one frequency, the signal the repetition diagnostic is calibrated on.
std::vector<double> encoding_track(const rope::FrequencySchedule& schedule, std::size_t index,
                                   std::size_t length);

} // namespace uitf::harness
