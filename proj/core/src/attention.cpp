#include "uitf/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "parallel.hpp"

namespace uitf::attn {

namespace {

/// Fixed-order 4-lane dot product; the lane layout never changes, so the
/// rounding pattern is reproducible run to run.
template <typename T>
T dot_product(const T* a, const T* b, std::size_t n) {
    T s0{}, s1{}, s2{}, s3{};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    T s = (s0 + s2) + (s1 + s3);
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

} // namespace

template <typename T>
void AttentionInputs<T>::validate() const {
    for (const Tensor<T>* t : {&q, &k, &v}) {
        if (t->shape.size() != 3) {
            throw DimensionError("attention tensors must have rank 3 [heads, tokens, dim]");
        }
        if (t->values.size() != Tensor<T>::element_count(t->shape)) {
            throw DimensionError("attention tensor value count does not match its shape");
        }
    }
    if (k.shape[0] != q.shape[0] || v.shape[0] != q.shape[0]) {
        throw DimensionError("q/k/v disagree on head count");
    }
    if (k.shape[1] != q.shape[1] || v.shape[1] != q.shape[1]) {
        throw DimensionError("q/k/v disagree on token count");
    }
    if (k.shape[2] != q.shape[2]) {
        throw DimensionError("q and k disagree on head_dim");
    }
    if (q.shape[0] == 0 || q.shape[1] == 0) {
        throw ArgumentError("attention needs at least one head and one token");
    }
    if (q.shape[2] == 0 || v.shape[2] == 0) {
        throw ArgumentError("head_dim and value_dim must be positive");
    }
    for (const Tensor<T>* t : {&q, &k, &v}) {
        for (const T x : t->values) {
            if (!std::isfinite(static_cast<double>(x))) {
                throw NumericError("attention inputs contain a non-finite value");
            }
        }
    }
}

template struct AttentionInputs<float>;
template struct AttentionInputs<double>;

void BlockConfig::validate() const {
    if (b_q == 0 || b_kv == 0) {
        throw ConfigError("block sizes must be >= 1");
    }
}

void ConcentrationConfig::validate() const {
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) || !std::isfinite(exponent_p)) {
        throw ConfigError("concentration parameters must be finite");
    }
    if (!(lambda_min >= 1.0) || !(lambda_max >= lambda_min)) {
        throw ConfigError("concentration bounds require 1 <= lambda_min <= lambda_max");
    }
    if (!(exponent_p > 0.0)) {
        throw ConfigError("concentration exponent must be > 0");
    }
}

template <typename T>
EntropyReport entropy_pass(const AttentionInputs<T>& inputs, const BlockConfig& blocks,
                           std::size_t workers, std::vector<double>* row_entropies) {
    inputs.validate();
    blocks.validate();
    const std::size_t heads = inputs.heads();
    const std::size_t n = inputs.tokens();
    const std::size_t d = inputs.head_dim();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    const double ln_n = std::log(static_cast<double>(n));

    const std::size_t bq_cap = std::min(blocks.b_q, n);
    const std::size_t bkv_cap = std::min(blocks.b_kv, n);
    const std::size_t q_blocks = ceil_div(n, blocks.b_q);
    const std::size_t tasks = heads * q_blocks;
    const std::size_t pool = detail::clamp_workers(workers, tasks);

    std::vector<double> local_rows;
    std::vector<double>& rows = row_entropies ? *row_entropies : local_rows;
    rows.assign(heads * n, 0.0);

    struct Scratch {
        std::vector<T> scores;
        std::vector<double> m, l, t;
    };
    std::vector<Scratch> arenas(pool);

    const T* qp = inputs.q.data();
    const T* kp = inputs.k.data();

    detail::parallel_tasks(tasks, pool, [&](std::size_t task, std::size_t worker) {
        Scratch& s = arenas[worker];
        s.scores.resize(bq_cap * bkv_cap);
        const std::size_t head = task / q_blocks;
        const std::size_t q0 = (task % q_blocks) * blocks.b_q;
        const std::size_t bq = std::min(blocks.b_q, n - q0);
        s.m.assign(bq, -std::numeric_limits<double>::infinity());
        s.l.assign(bq, 0.0);
        s.t.assign(bq, 0.0);
        for (std::size_t kv0 = 0; kv0 < n; kv0 += blocks.b_kv) {
            const std::size_t bkv = std::min(blocks.b_kv, n - kv0);
            for (std::size_t i = 0; i < bq; ++i) {
                const T* qrow = qp + (head * n + q0 + i) * d;
                T* srow = s.scores.data() + i * bkv_cap;
                for (std::size_t j = 0; j < bkv; ++j) {
                    const T* krow = kp + (head * n + kv0 + j) * d;
                    srow[j] =
                        static_cast<T>(static_cast<double>(dot_product(qrow, krow, d)) * inv_sqrt_d);
                }
                double block_max = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < bkv; ++j) {
                    const double sj = static_cast<double>(srow[j]);
                    if (sj > block_max) block_max = sj;
                }
                const double m_new = std::max(s.m[i], block_max);
                const double rescale = std::exp(s.m[i] - m_new);
                double sum_e = 0.0;
                double sum_es = 0.0;
                for (std::size_t j = 0; j < bkv; ++j) {
                    const double sj = static_cast<double>(srow[j]);
                    const double e = std::exp(sj - m_new);
                    sum_e += e;
                    sum_es += e * sj;
                }
                s.l[i] = s.l[i] * rescale + sum_e;
                s.t[i] = s.t[i] * rescale + sum_es;
                s.m[i] = m_new;
            }
        }
        for (std::size_t i = 0; i < bq; ++i) {
            if (!std::isfinite(s.m[i]) || !std::isfinite(s.l[i]) || !(s.l[i] > 0.0) ||
                !std::isfinite(s.t[i])) {
                throw NumericError("attention logits overflowed during the entropy pass");
            }
            const double h_row = s.m[i] + std::log(s.l[i]) - s.t[i] / s.l[i];
            rows[head * n + q0 + i] = std::clamp(h_row, 0.0, ln_n);
        }
    });

    EntropyReport report;
    report.per_head.resize(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += rows[h * n + i];
        }
        report.per_head[h] = sum / static_cast<double>(n);
    }
    const auto [lo, hi] = std::minmax_element(report.per_head.begin(), report.per_head.end());
    report.h_min = *lo;
    report.h_max = *hi;
    return report;
}

template EntropyReport entropy_pass<float>(const AttentionInputs<float>&, const BlockConfig&,
                                           std::size_t, std::vector<double>*);
template EntropyReport entropy_pass<double>(const AttentionInputs<double>&, const BlockConfig&,
                                            std::size_t, std::vector<double>*);

FocusMap focus_map(const EntropyReport& report, const ConcentrationConfig& cfg) {
    cfg.validate();
    if (report.per_head.empty()) {
        throw ArgumentError("entropy report carries no heads");
    }
    if (!(report.h_max >= report.h_min)) {
        throw ArgumentError("entropy report has h_max < h_min");
    }
    const double span = report.h_max - report.h_min;
    FocusMap map;
    map.per_head.reserve(report.per_head.size());
    for (const double h : report.per_head) {
        double lambda = cfg.lambda_min;
        if (span > 0.0) {
            const double r = std::clamp((report.h_max - h) / span, 0.0, 1.0);
            lambda += (cfg.lambda_max - cfg.lambda_min) * std::pow(r, cfg.exponent_p);
        }
        map.per_head.push_back(lambda);
    }
    return map;
}

template <typename T>
Tensor<T> attention_forward(const AttentionInputs<T>& inputs, const FocusMap& focus,
                            const BlockConfig& blocks, std::size_t workers,
                            std::uint64_t* peak_scratch) {
    inputs.validate();
    blocks.validate();
    const std::size_t heads = inputs.heads();
    const std::size_t n = inputs.tokens();
    const std::size_t d = inputs.head_dim();
    const std::size_t vd = inputs.value_dim();
    if (focus.per_head.size() != heads) {
        throw ArgumentError("focus map carries " + std::to_string(focus.per_head.size()) +
                            " factors for " + std::to_string(heads) + " heads");
    }
    for (const double lambda : focus.per_head) {
        if (!std::isfinite(lambda)) {
            throw ArgumentError("focus factors must be finite");
        }
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    const std::size_t bq_cap = std::min(blocks.b_q, n);
    const std::size_t bkv_cap = std::min(blocks.b_kv, n);
    const std::size_t q_blocks = ceil_div(n, blocks.b_q);
    const std::size_t tasks = heads * q_blocks;
    const std::size_t pool = detail::clamp_workers(workers, tasks);

    Tensor<T> out = Tensor<T>::zeros({heads, n, vd});

    struct Scratch {
        std::vector<T> scores, m, l, o;

        std::uint64_t bytes() const {
            return static_cast<std::uint64_t>(scores.capacity() + m.capacity() + l.capacity() +
                                              o.capacity()) *
                   sizeof(T);
        }
    };
    std::vector<Scratch> arenas(pool);

    const T* qp = inputs.q.data();
    const T* kp = inputs.k.data();
    const T* vp = inputs.v.data();
    T* op = out.data();

    detail::parallel_tasks(tasks, pool, [&](std::size_t task, std::size_t worker) {
        Scratch& s = arenas[worker];
        s.scores.resize(bq_cap * bkv_cap);
        const std::size_t head = task / q_blocks;
        const std::size_t q0 = (task % q_blocks) * blocks.b_q;
        const std::size_t bq = std::min(blocks.b_q, n - q0);
        s.m.assign(bq, -std::numeric_limits<T>::infinity());
        s.l.assign(bq, T{0});
        s.o.assign(bq * vd, T{0});
        const double scale = focus.per_head[head] * inv_sqrt_d;
        for (std::size_t kv0 = 0; kv0 < n; kv0 += blocks.b_kv) {
            const std::size_t bkv = std::min(blocks.b_kv, n - kv0);
            for (std::size_t i = 0; i < bq; ++i) {
                const T* qrow = qp + (head * n + q0 + i) * d;
                T* srow = s.scores.data() + i * bkv_cap;
                for (std::size_t j = 0; j < bkv; ++j) {
                    const T* krow = kp + (head * n + kv0 + j) * d;
                    srow[j] = static_cast<T>(static_cast<double>(dot_product(qrow, krow, d)) * scale);
                }
                T block_max = -std::numeric_limits<T>::infinity();
                for (std::size_t j = 0; j < bkv; ++j) {
                    if (srow[j] > block_max) block_max = srow[j];
                }
                const T m_new = s.m[i] > block_max ? s.m[i] : block_max;
                const T rescale = std::exp(s.m[i] - m_new);
                s.l[i] *= rescale;
                T* orow = s.o.data() + i * vd;
                for (std::size_t x = 0; x < vd; ++x) {
                    orow[x] *= rescale;
                }
                for (std::size_t j = 0; j < bkv; ++j) {
                    const T e = std::exp(srow[j] - m_new);
                    s.l[i] += e;
                    const T* vrow = vp + (head * n + kv0 + j) * vd;
                    for (std::size_t x = 0; x < vd; ++x) {
                        orow[x] += e * vrow[x];
                    }
                }
                s.m[i] = m_new;
            }
        }
        for (std::size_t i = 0; i < bq; ++i) {
            if (!std::isfinite(static_cast<double>(s.m[i])) ||
                !std::isfinite(static_cast<double>(s.l[i])) || !(s.l[i] > T{0})) {
                throw NumericError("attention logits overflowed during the forward pass");
            }
            const T* orow = s.o.data() + i * vd;
            T* dst = op + (head * n + q0 + i) * vd;
            for (std::size_t x = 0; x < vd; ++x) {
                dst[x] = orow[x] / s.l[i];
            }
        }
    });

    if (peak_scratch) {
        std::uint64_t peak = 0;
        for (const Scratch& s : arenas) {
            peak = std::max(peak, s.bytes());
        }
        *peak_scratch = peak;
    }
    return out;
}

template Tensor<float> attention_forward<float>(const AttentionInputs<float>&, const FocusMap&,
                                                const BlockConfig&, std::size_t, std::uint64_t*);
template Tensor<double> attention_forward<double>(const AttentionInputs<double>&, const FocusMap&,
                                                  const BlockConfig&, std::size_t, std::uint64_t*);

MemoryReport memory_report(std::size_t n, std::size_t heads, std::size_t head_dim,
                           std::size_t value_dim, const BlockConfig& blocks,
                           std::size_t elem_bytes) {
    blocks.validate();
    if (elem_bytes == 0) {
        throw ArgumentError("elem_bytes must be >= 1");
    }
    const auto bq = static_cast<std::uint64_t>(blocks.b_q);
    const auto bkv = static_cast<std::uint64_t>(blocks.b_kv);
    MemoryReport report;
    report.engine_bytes =
        (bq * bkv + bq * (static_cast<std::uint64_t>(head_dim) + value_dim + 3)) * elem_bytes;
    report.naive_bytes = static_cast<std::uint64_t>(heads) * n * n * elem_bytes;
    return report;
}

template <typename T>
ConcentratedResult<T> concentrated_attention(const AttentionInputs<T>& inputs,
                                             const ConcentrationConfig& cfg,
                                             const BlockConfig& blocks, ConcentrationCache* cache,
                                             bool reuse_cache, std::size_t workers) {
    cfg.validate();
    EntropyReport entropy;
    FocusMap focus;
    if (reuse_cache && cache && cache->valid) {
        inputs.validate();
        if (cache->focus.per_head.size() != inputs.heads()) {
            throw ArgumentError("cached focus map does not match the input head count");
        }
        entropy = cache->entropy;
        focus = cache->focus;
    } else {
        entropy = entropy_pass(inputs, blocks, workers);
        focus = focus_map(entropy, cfg);
        if (cache) {
            cache->entropy = entropy;
            cache->focus = focus;
            cache->valid = true;
        }
    }
    Tensor<T> output = attention_forward(inputs, focus, blocks, workers);
    return {std::move(output), std::move(entropy), std::move(focus)};
}

template ConcentratedResult<float> concentrated_attention<float>(const AttentionInputs<float>&,
                                                                 const ConcentrationConfig&,
                                                                 const BlockConfig&,
                                                                 ConcentrationCache*, bool,
                                                                 std::size_t);
template ConcentratedResult<double> concentrated_attention<double>(const AttentionInputs<double>&,
                                                                   const ConcentrationConfig&,
                                                                   const BlockConfig&,
                                                                   ConcentrationCache*, bool,
                                                                   std::size_t);

} // namespace uitf::attn
