#include "uitf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uitf/rng.hpp"

namespace uitf::harness {

namespace {

Tensor<double> normal_tensor(SplitMix64& rng, std::vector<std::size_t> shape, double scale) {
    Tensor<double> t = Tensor<double>::zeros(std::move(shape));
    for (double& x : t.values) {
        x = rng.next_normal() * scale;
    }
    return t;
}

} // namespace

ToyLayer make_layer(std::uint64_t seed, std::size_t heads, std::size_t feature_dim,
                    std::size_t head_dim, std::size_t value_dim) {
    if (heads == 0 || feature_dim == 0 || head_dim == 0 || value_dim == 0) {
        throw ArgumentError("toy layer dimensions must be positive");
    }
    SplitMix64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    ToyLayer layer{seed, heads, feature_dim, head_dim, value_dim, {}, {}, {}};
    layer.wq = normal_tensor(rng, {heads, feature_dim, head_dim}, scale);
    layer.wk = normal_tensor(rng, {heads, feature_dim, head_dim}, scale);
    layer.wv = normal_tensor(rng, {heads, feature_dim, value_dim}, scale);
    return layer;
}

TokenGrid token_grid(std::size_t height, std::size_t width, std::size_t feature_dim,
                     std::uint64_t seed) {
    if (height == 0 || width == 0 || feature_dim == 0) {
        throw ArgumentError("grid dimensions must be positive");
    }
    SplitMix64 rng(seed);
    return {height, width, normal_tensor(rng, {height * width, feature_dim}, 1.0)};
}

attn::AttentionInputs<double> project_qkv(const ToyLayer& layer, const TokenGrid& grid) {
    if (grid.tokens.rank() != 2 || grid.tokens.shape[0] != grid.height * grid.width) {
        throw DimensionError("token grid must be [height*width, feature_dim]");
    }
    if (grid.tokens.shape[1] != layer.feature_dim) {
        throw DimensionError("grid feature_dim " + std::to_string(grid.tokens.shape[1]) +
                             " does not match layer feature_dim " +
                             std::to_string(layer.feature_dim));
    }
    const std::size_t n = grid.tokens.shape[0];
    const std::size_t f = layer.feature_dim;

    auto project = [&](const Tensor<double>& w, std::size_t out_dim) {
        Tensor<double> out = Tensor<double>::zeros({layer.heads, n, out_dim});
        for (std::size_t h = 0; h < layer.heads; ++h) {
            const double* wh = w.data() + h * f * out_dim;
            for (std::size_t i = 0; i < n; ++i) {
                const double* token = grid.tokens.data() + i * f;
                double* dst = out.data() + (h * n + i) * out_dim;
                for (std::size_t x = 0; x < f; ++x) {
                    const double t = token[x];
                    const double* wrow = wh + x * out_dim;
                    for (std::size_t y = 0; y < out_dim; ++y) {
                        dst[y] += t * wrow[y];
                    }
                }
            }
        }
        return out;
    };

    return {project(layer.wq, layer.head_dim), project(layer.wk, layer.head_dim),
            project(layer.wv, layer.value_dim)};
}

void apply_grid_rope(attn::AttentionInputs<double>& inputs, std::size_t width,
                     const rope::FrequencySchedule& sched_h,
                     const rope::FrequencySchedule& sched_w) {
    inputs.validate();
    if (width == 0 || inputs.tokens() % width != 0) {
        throw DimensionError("token count is not a whole number of grid rows");
    }
    const std::size_t rotary = 2 * (sched_h.size() + sched_w.size());
    if (inputs.head_dim() != rotary) {
        throw DimensionError("head_dim " + std::to_string(inputs.head_dim()) +
                             " does not match the 2d rotary width " + std::to_string(rotary));
    }
    const std::size_t n = inputs.tokens();
    const std::size_t d = inputs.head_dim();
    for (Tensor<double>* t : {&inputs.q, &inputs.k}) {
        for (std::size_t h = 0; h < inputs.heads(); ++h) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto pos_h = static_cast<double>(i / width);
                const auto pos_w = static_cast<double>(i % width);
                std::span<double> row(t->data() + (h * n + i) * d, d);
                rope::apply_rope_2d_inplace(row, pos_h, pos_w, sched_h, sched_w);
            }
        }
    }
}

LayerRun run_layer(const ToyLayer& layer, const TokenGrid& grid,
                   const rope::FrequencySchedule& sched_h, const rope::FrequencySchedule& sched_w,
                   const attn::ConcentrationConfig& cfg, const attn::BlockConfig& blocks,
                   attn::ConcentrationCache* cache, bool reuse_cache, std::size_t workers) {
    attn::AttentionInputs<double> inputs = project_qkv(layer, grid);
    apply_grid_rope(inputs, grid.width, sched_h, sched_w);
    auto [output, entropy, focus] =
        attn::concentrated_attention(inputs, cfg, blocks, cache, reuse_cache, workers);

    const std::size_t n = grid.height * grid.width;
    const std::size_t vd = layer.value_dim;
    std::vector<double> norms(n, 0.0);
    for (std::size_t h = 0; h < layer.heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = output.data() + (h * n + i) * vd;
            for (std::size_t x = 0; x < vd; ++x) {
                norms[i] += row[x] * row[x];
            }
        }
    }
    for (double& x : norms) {
        x = std::sqrt(x);
    }

    LayerRun run{std::move(output), std::move(entropy), std::move(focus),
                 std::vector<double>(grid.height, 0.0), std::vector<double>(grid.width, 0.0)};
    for (std::size_t r = 0; r < grid.height; ++r) {
        for (std::size_t c = 0; c < grid.width; ++c) {
            run.track_h[r] += norms[r * grid.width + c];
            run.track_w[c] += norms[r * grid.width + c];
        }
    }
    for (double& x : run.track_h) {
        x /= static_cast<double>(grid.width);
    }
    for (double& x : run.track_w) {
        x /= static_cast<double>(grid.height);
    }
    return run;
}

GridStats grid_diagnostics(const ToyLayer& layer, const rope::FrequencySchedule& sched_h,
                           const rope::FrequencySchedule& sched_w, const rope::ResolutionSpec& spec,
                           const attn::ConcentrationConfig& cfg, const attn::BlockConfig& blocks,
                           std::uint64_t grid_seed, std::size_t workers) {
    const TokenGrid train = token_grid(spec.train_h, spec.train_w, layer.feature_dim, grid_seed);
    const TokenGrid target = token_grid(spec.target_h, spec.target_w, layer.feature_dim, grid_seed);
    const LayerRun train_run =
        run_layer(layer, train, sched_h, sched_w, cfg, blocks, nullptr, false, workers);
    const LayerRun target_run =
        run_layer(layer, target, sched_h, sched_w, cfg, blocks, nullptr, false, workers);

    GridStats stats{train_run.entropy, target_run.entropy, {}};
    auto sweep = [&stats](char axis, const rope::FrequencySchedule& sched,
                          const std::vector<double>& track) {
        for (const double theta : sched.freqs()) {
            const double period = 2.0 * std::numbers::pi / theta;
            const auto lag = static_cast<std::size_t>(std::llround(period));
            if (lag >= 2 && lag <= track.size() / 2) {
                stats.repetition.push_back({axis, lag, repetition_score(track, lag)});
            }
        }
    };
    sweep('h', sched_h, target_run.track_h);
    sweep('w', sched_w, target_run.track_w);
    return stats;
}

double repetition_score(std::span<const double> values, std::size_t candidate_period) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw ArgumentError("repetition score needs at least two samples");
    }
    if (candidate_period >= n) {
        throw ArgumentError("candidate period must be smaller than the sequence length");
    }
    double mean = 0.0;
    for (const double x : values) {
        mean += x;
    }
    mean /= static_cast<double>(n);
    double cross = 0.0;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = values[i] - mean;
        const double b = values[(i + candidate_period) % n] - mean;
        cross += a * b;
        var += a * a;
    }
    if (var <= 0.0) {
        throw NumericError("repetition score is undefined for a constant sequence");
    }
    return std::clamp(cross / var, -1.0, 1.0);
}

std::vector<double> encoding_track(const rope::FrequencySchedule& schedule, std::size_t index,
                                   std::size_t length) {
    if (index >= schedule.size()) {
        throw ArgumentError("frequency index out of range");
    }
    if (length == 0) {
        throw ArgumentError("track length must be positive");
    }
    const double theta = schedule.freqs()[index];
    std::vector<double> track(length);
    for (std::size_t p = 0; p < length; ++p) {
        track[p] = std::cos(theta * static_cast<double>(p));
    }
    return track;
}

} // namespace uitf::harness
