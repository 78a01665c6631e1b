#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uitf/errors.hpp"

namespace uitf::rope {

/// Parameters of the exponential frequency schedule for one spatial axis.
///
/// axis_dim is the per-axis rotary sub-dimension d': the schedule carries
/// d'/2 frequencies and rotates d'/2 feature pairs. index_origin records
/// whether user-facing frequency indices count from 1 (the usual printed
/// convention) or from 0; storage is always 0-based and the frequencies
/// themselves do not depend on it.
struct RopeConfig {
    double base = 10000.0;
    std::size_t axis_dim = 0;
    int index_origin = 1;

    void validate() const;

    bool operator==(const RopeConfig&) const = default;
};

/// One frequency replaced by a correction pass (index is 0-based storage).
struct Correction {
    std::size_t index = 0;
    double old_theta = 0.0;
    double new_theta = 0.0;

    bool operator==(const Correction&) const = default;
};

/// Per-pair rotary frequencies for one axis plus the provenance of any
/// corrections applied to them. Immutable: edits produce new values.
class FrequencySchedule {
public:
    FrequencySchedule(RopeConfig config, std::vector<double> freqs,
                      std::vector<Correction> corrections = {});

    const RopeConfig& config() const { return config_; }
    const std::vector<double>& freqs() const { return freqs_; }
    const std::vector<Correction>& corrections() const { return corrections_; }

    /// Number of frequency pairs (d'/2).
    std::size_t size() const { return freqs_.size(); }

    /// Copy with freqs[index] replaced and the change recorded.
    FrequencySchedule with_frequency(std::size_t index, double new_theta) const;

    bool operator==(const FrequencySchedule&) const = default;

private:
    RopeConfig config_;
    std::vector<double> freqs_;
    std::vector<Correction> corrections_;
};

/// Training and target grid extents in token units.
struct ResolutionSpec {
    std::size_t train_h = 0, train_w = 0;
    std::size_t target_h = 0, target_w = 0;

    ResolutionSpec(std::size_t h, std::size_t w, std::size_t H, std::size_t W);

    double scale_h() const { return static_cast<double>(target_h) / static_cast<double>(train_h); }
    double scale_w() const { return static_cast<double>(target_w) / static_cast<double>(train_w); }
};

/// Per-pair periods (token units) and the index whose period sits closest to
/// the reference length it was computed against.
struct PeriodTable {
    std::vector<double> periods;
    std::size_t dominant_index = 0;
    std::size_t reference_length = 0;
};

/// A pair of grid positions whose angle encodings coincide within tolerance.
struct CollisionPair {
    std::size_t p = 0, q = 0;

    std::size_t lag() const { return q - p; }
    bool operator==(const CollisionPair&) const = default;
};

/// freqs[i] = base^(-2i/axis_dim) for 0-based i, i.e. the exponential
/// schedule with exponents 0, -2/d', -4/d', ..., -(d'-2)/d'.
FrequencySchedule build_schedule(const RopeConfig& config);

/// Rotate adjacent pairs (x[2j], x[2j+1]) by angle position * freqs[j].
/// Requires x.size() == 2 * schedule.size(). Norm-preserving.
std::vector<double> apply_rope_1d(std::span<const double> x, double position,
                                  const FrequencySchedule& schedule);

/// In-place single-axis rotation over a value span of any float width;
/// angle math stays in double regardless of T.
template <typename T>
void apply_rope_1d_inplace(std::span<T> x, double position, const FrequencySchedule& schedule);

/// Two independent single-axis rotations: the leading 2*|sched_h| coordinates
/// rotate with (pos_h, sched_h), the rest with (pos_w, sched_w).
std::vector<double> apply_rope_2d(std::span<const double> x, double pos_h, double pos_w,
                                  const FrequencySchedule& sched_h,
                                  const FrequencySchedule& sched_w);

template <typename T>
void apply_rope_2d_inplace(std::span<T> x, double pos_h, double pos_w,
                           const FrequencySchedule& sched_h,
                           const FrequencySchedule& sched_w);

/// periods[j] = 2*pi / freqs[j]; dominant_index = argmin_j |T_j - reference|,
/// ties broken toward the smaller index (higher frequency).
PeriodTable period_table(const FrequencySchedule& schedule, std::size_t reference_length);

/// True iff freqs[dominant_index] <= 2*pi / target_length, i.e. the dominant
/// period covers the whole target extent.
bool check_non_repetition(const FrequencySchedule& schedule, std::size_t dominant_index,
                          std::size_t target_length);

/// All integer position pairs p < q < length whose (cos, sin) encodings at
/// freqs[index] coincide within tolerance (component-wise).
std::vector<CollisionPair> encoding_collisions(const FrequencySchedule& schedule,
                                               std::size_t index, std::size_t length,
                                               double tolerance);

} // namespace uitf::rope
