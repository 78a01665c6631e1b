#include "uitf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace uitf::oracle {

namespace {

void require_dense(std::size_t n) {
    if (n > kDenseCap) {
        throw SizeError("dense reference is capped at " + std::to_string(kDenseCap) +
                        " tokens, got " + std::to_string(n));
    }
}

/// Row-stochastic p[i*n + j] = softmax over j of scale * (q_i . k_j) for one
/// head, entirely in double.
template <typename T>
void dense_probabilities(const T* q, const T* k, std::size_t n, std::size_t d, double scale,
                         std::vector<double>& p) {
    p.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = p.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t x = 0; x < d; ++x) {
                dot += static_cast<double>(q[i * d + x]) * static_cast<double>(k[j * d + x]);
            }
            row[j] = scale * dot;
        }
        double row_max = row[0];
        for (std::size_t j = 1; j < n; ++j) {
            row_max = std::max(row_max, row[j]);
        }
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - row_max);
            norm += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) {
            row[j] /= norm;
        }
    }
}

} // namespace

template <typename T>
Tensor<double> naive_attention(const attn::AttentionInputs<T>& inputs,
                               const std::vector<double>& lambdas) {
    inputs.validate();
    const std::size_t heads = inputs.heads();
    const std::size_t n = inputs.tokens();
    const std::size_t d = inputs.head_dim();
    const std::size_t vd = inputs.value_dim();
    require_dense(n);
    if (lambdas.size() != heads) {
        throw ArgumentError("naive_attention needs one lambda per head");
    }
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor<double> out = Tensor<double>::zeros({heads, n, vd});
    std::vector<double> p;
    for (std::size_t h = 0; h < heads; ++h) {
        const T* q = inputs.q.data() + h * n * d;
        const T* k = inputs.k.data() + h * n * d;
        const T* v = inputs.v.data() + h * n * vd;
        dense_probabilities(q, k, n, d, lambdas[h] * inv_sqrt_d, p);
        for (std::size_t i = 0; i < n; ++i) {
            double* dst = out.data() + (h * n + i) * vd;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = p[i * n + j];
                for (std::size_t x = 0; x < vd; ++x) {
                    dst[x] += w * static_cast<double>(v[j * vd + x]);
                }
            }
        }
    }
    return out;
}

template Tensor<double> naive_attention<float>(const attn::AttentionInputs<float>&,
                                               const std::vector<double>&);
template Tensor<double> naive_attention<double>(const attn::AttentionInputs<double>&,
                                                const std::vector<double>&);

template <typename T>
attn::EntropyReport naive_entropy(const attn::AttentionInputs<T>& inputs,
                                  std::vector<double>* row_entropies) {
    inputs.validate();
    const std::size_t heads = inputs.heads();
    const std::size_t n = inputs.tokens();
    const std::size_t d = inputs.head_dim();
    require_dense(n);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    if (row_entropies) {
        row_entropies->assign(heads * n, 0.0);
    }
    attn::EntropyReport report;
    report.per_head.resize(heads);
    std::vector<double> p;
    for (std::size_t h = 0; h < heads; ++h) {
        const T* q = inputs.q.data() + h * n * d;
        const T* k = inputs.k.data() + h * n * d;
        dense_probabilities(q, k, n, d, inv_sqrt_d, p);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double h_row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double w = p[i * n + j];
                if (w > 0.0) {
                    h_row -= w * std::log(w);
                }
            }
            if (row_entropies) {
                (*row_entropies)[h * n + i] = h_row;
            }
            sum += h_row;
        }
        report.per_head[h] = sum / static_cast<double>(n);
    }
    const auto [lo, hi] = std::minmax_element(report.per_head.begin(), report.per_head.end());
    report.h_min = *lo;
    report.h_max = *hi;
    return report;
}

template attn::EntropyReport naive_entropy<float>(const attn::AttentionInputs<float>&,
                                                  std::vector<double>*);
template attn::EntropyReport naive_entropy<double>(const attn::AttentionInputs<double>&,
                                                   std::vector<double>*);

Tensor<double> dense_rope_matrix(const rope::FrequencySchedule& schedule, double position) {
    const std::size_t dim = 2 * schedule.size();
    Tensor<double> m = Tensor<double>::zeros({dim, dim});
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const double angle = position * schedule.freqs()[j];
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        m.values[(2 * j) * dim + (2 * j)] = c;
        m.values[(2 * j) * dim + (2 * j + 1)] = -s;
        m.values[(2 * j + 1) * dim + (2 * j)] = s;
        m.values[(2 * j + 1) * dim + (2 * j + 1)] = c;
    }
    return m;
}

} // namespace uitf::oracle
