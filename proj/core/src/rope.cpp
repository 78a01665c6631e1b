#include "uitf/rope.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace uitf::rope {

void RopeConfig::validate() const {
    if (axis_dim < 2 || axis_dim % 2 != 0) {
        throw ConfigError("axis_dim must be even and >= 2, got " + std::to_string(axis_dim));
    }
    if (!(base > 1.0)) {
        throw ConfigError("base must be > 1, got " + std::to_string(base));
    }
    if (index_origin != 0 && index_origin != 1) {
        throw ConfigError("index_origin must be 0 or 1, got " + std::to_string(index_origin));
    }
}

FrequencySchedule::FrequencySchedule(RopeConfig config, std::vector<double> freqs,
                                     std::vector<Correction> corrections)
    : config_(config), freqs_(std::move(freqs)), corrections_(std::move(corrections)) {
    config_.validate();
    if (freqs_.size() != config_.axis_dim / 2) {
        throw DimensionError("schedule must carry axis_dim/2 frequencies");
    }
    for (double f : freqs_) {
        if (!(f > 0.0) || !std::isfinite(f)) {
            throw ConfigError("every frequency must be finite and > 0");
        }
    }
}

FrequencySchedule FrequencySchedule::with_frequency(std::size_t index, double new_theta) const {
    if (index >= freqs_.size()) {
        throw ArgumentError("frequency index " + std::to_string(index) + " out of range");
    }
    std::vector<double> freqs = freqs_;
    std::vector<Correction> corrections = corrections_;
    corrections.push_back({index, freqs[index], new_theta});
    freqs[index] = new_theta;
    return FrequencySchedule(config_, std::move(freqs), std::move(corrections));
}

ResolutionSpec::ResolutionSpec(std::size_t h, std::size_t w, std::size_t H, std::size_t W)
    : train_h(h), train_w(w), target_h(H), target_w(W) {
    if (h == 0 || w == 0 || H == 0 || W == 0) {
        throw ArgumentError("grid extents must be positive");
    }
    if (H < h || W < w) {
        throw ArgumentError("extrapolation requires target >= train on both axes");
    }
}

FrequencySchedule build_schedule(const RopeConfig& config) {
    config.validate();
    const std::size_t pairs = config.axis_dim / 2;
    std::vector<double> freqs(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        freqs[i] = std::pow(config.base, -2.0 * static_cast<double>(i) /
                                             static_cast<double>(config.axis_dim));
    }
    return FrequencySchedule(config, std::move(freqs));
}

template <typename T>
void apply_rope_1d_inplace(std::span<T> x, double position, const FrequencySchedule& schedule) {
    const auto& freqs = schedule.freqs();
    if (x.size() != 2 * freqs.size()) {
        throw DimensionError("rope input length " + std::to_string(x.size()) +
                             " != 2 * " + std::to_string(freqs.size()));
    }
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        const double angle = position * freqs[j];
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double a = static_cast<double>(x[2 * j]);
        const double b = static_cast<double>(x[2 * j + 1]);
        x[2 * j] = static_cast<T>(c * a - s * b);
        x[2 * j + 1] = static_cast<T>(s * a + c * b);
    }
}

template void apply_rope_1d_inplace<float>(std::span<float>, double, const FrequencySchedule&);
template void apply_rope_1d_inplace<double>(std::span<double>, double, const FrequencySchedule&);

std::vector<double> apply_rope_1d(std::span<const double> x, double position,
                                  const FrequencySchedule& schedule) {
    std::vector<double> out(x.begin(), x.end());
    apply_rope_1d_inplace<double>(out, position, schedule);
    return out;
}

template <typename T>
void apply_rope_2d_inplace(std::span<T> x, double pos_h, double pos_w,
                           const FrequencySchedule& sched_h, const FrequencySchedule& sched_w) {
    const std::size_t lead = 2 * sched_h.size();
    if (x.size() != lead + 2 * sched_w.size()) {
        throw DimensionError("2d rope input length " + std::to_string(x.size()) +
                             " != 2 * (" + std::to_string(sched_h.size()) + " + " +
                             std::to_string(sched_w.size()) + ")");
    }
    apply_rope_1d_inplace<T>(x.subspan(0, lead), pos_h, sched_h);
    apply_rope_1d_inplace<T>(x.subspan(lead), pos_w, sched_w);
}

template void apply_rope_2d_inplace<float>(std::span<float>, double, double,
                                           const FrequencySchedule&, const FrequencySchedule&);
template void apply_rope_2d_inplace<double>(std::span<double>, double, double,
                                            const FrequencySchedule&, const FrequencySchedule&);

std::vector<double> apply_rope_2d(std::span<const double> x, double pos_h, double pos_w,
                                  const FrequencySchedule& sched_h,
                                  const FrequencySchedule& sched_w) {
    std::vector<double> out(x.begin(), x.end());
    apply_rope_2d_inplace<double>(out, pos_h, pos_w, sched_h, sched_w);
    return out;
}

PeriodTable period_table(const FrequencySchedule& schedule, std::size_t reference_length) {
    if (reference_length < 1) {
        throw ArgumentError("reference_length must be >= 1");
    }
    PeriodTable table;
    table.reference_length = reference_length;
    table.periods.resize(schedule.size());
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        table.periods[j] = 2.0 * std::numbers::pi / schedule.freqs()[j];
        const double dist = std::abs(table.periods[j] - static_cast<double>(reference_length));
        if (dist < best_dist) { // strict: ties keep the smaller index
            best_dist = dist;
            best = j;
        }
    }
    table.dominant_index = best;
    return table;
}

bool check_non_repetition(const FrequencySchedule& schedule, std::size_t dominant_index,
                          std::size_t target_length) {
    if (dominant_index >= schedule.size()) {
        throw ArgumentError("dominant_index out of range");
    }
    if (target_length < 1) {
        throw ArgumentError("target_length must be >= 1");
    }
    return schedule.freqs()[dominant_index] <=
           2.0 * std::numbers::pi / static_cast<double>(target_length);
}

std::vector<CollisionPair> encoding_collisions(const FrequencySchedule& schedule,
                                               std::size_t index, std::size_t length,
                                               double tolerance) {
    if (index >= schedule.size()) {
        throw ArgumentError("frequency index out of range");
    }
    if (length < 2) {
        throw ArgumentError("length must be >= 2");
    }
    if (tolerance < 0.0 || !std::isfinite(tolerance)) {
        throw ArgumentError("tolerance must be finite and >= 0");
    }
    const double theta = schedule.freqs()[index];
    std::vector<double> cs(length), sn(length);
    for (std::size_t p = 0; p < length; ++p) {
        cs[p] = std::cos(theta * static_cast<double>(p));
        sn[p] = std::sin(theta * static_cast<double>(p));
    }
    std::vector<CollisionPair> pairs;
    for (std::size_t p = 0; p + 1 < length; ++p) {
        for (std::size_t q = p + 1; q < length; ++q) {
            if (std::abs(cs[p] - cs[q]) <= tolerance && std::abs(sn[p] - sn[q]) <= tolerance) {
                pairs.push_back({p, q});
            }
        }
    }
    return pairs;
}

} // namespace uitf::rope
