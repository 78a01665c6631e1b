#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "uitf/rope.hpp"

namespace uitf::extrap {

using rope::FrequencySchedule;
using rope::ResolutionSpec;
using rope::RopeConfig;

/// Ramp thresholds for the blended interpolation-extrapolation scheme,
/// expressed as rotation counts over the training length.
struct YarnParams {
    double alpha = 1.0;
    double beta = 32.0;

    void validate() const;
};

enum class Axis { Height, Width };

/// One recursive-correction step: the repetition period that triggered it,
/// the index chosen as dominant against that period, and the replacement.
struct RdfcIteration {
    Axis axis = Axis::Height;
    double observed_period = 0.0;
    std::size_t chosen_index = 0;
    double old_theta = 0.0;
    double new_theta = 0.0;
};

struct RdfcLog {
    std::vector<RdfcIteration> iterations;
    bool converged = false;
};

/// Raised when a detector stops making progress on an axis that still
/// repeats; carries everything done so far.
class StagnationError : public NumericError {
public:
    StagnationError(const std::string& what, RdfcLog log)
        : NumericError(what), partial_log(std::move(log)) {}
    RdfcLog partial_log;
};

/// Raised when an axis runs out of correctable indices (d'/2 per axis).
class IterationCapError : public NumericError {
public:
    IterationCapError(const std::string& what, RdfcLog log)
        : NumericError(what), partial_log(std::move(log)) {}
    RdfcLog partial_log;
};

/// What a repetition detector sees after each correction round.
struct DetectorInput {
    const FrequencySchedule& sched_h;
    const FrequencySchedule& sched_w;
    double observed_h;
    double observed_w;
    const ResolutionSpec& spec;
};

/// Detected repetition period per axis; a value >= the axis target means
/// "no repetition observed".
struct DetectorReport {
    double period_h = 0.0;
    double period_w = 0.0;
};

/// Callback standing in for visual repetition inspection. Must be
/// re-entrant; rdfc calls it once per correction round.
using PeriodDetector = std::function<DetectorReport(const DetectorInput&)>;

struct RdfcResult {
    FrequencySchedule sched_h;
    FrequencySchedule sched_w;
    RdfcLog log;
};

/// Uniform interpolation: every frequency divided by s. Indices whose value
/// changed are recorded as corrections (none at s = 1).
FrequencySchedule scale_pi(const FrequencySchedule& schedule, double s);

/// Base rescaling: rebuild from effective base lambda*b with
/// lambda = s^(d'/(d'-2)). Leaves the first frequency at 1 and meets the
/// uniform interpolation exactly at the last index.
FrequencySchedule scale_ntk(const RopeConfig& config, double s);

/// Blended scheme: theta' = ((1-gamma)/s + gamma) * theta with gamma a linear
/// ramp in the rotation count r_j = train_length / T_j, clamped to [0,1]:
/// fully interpolated below alpha rotations, untouched above beta.
FrequencySchedule scale_yarn(const RopeConfig& config, double s, std::size_t train_length,
                             const YarnParams& params = {});

/// Replace the single frequency whose period is closest to reference_length
/// with 2*pi/target_length. Returns the corrected schedule and the index.
std::pair<FrequencySchedule, std::size_t> correct_dominant(const FrequencySchedule& schedule,
                                                           std::size_t reference_length,
                                                           std::size_t target_length);

/// Recursive dominant-frequency correction: starting from the training
/// extents as the observed repetition periods, repeatedly correct the
/// dominant index nearest the observed period on each still-repeating axis,
/// then ask the detector for the new periods. Stops when both axes report a
/// period at or beyond their target. Each axis corrects a given index at
/// most once; d'/2 corrections per axis is the hard cap.
RdfcResult rdfc(const FrequencySchedule& sched_h, const FrequencySchedule& sched_w,
                const ResolutionSpec& spec, const PeriodDetector& detector);

/// Conservative stand-in for visual inspection: reports, per axis, the
/// smallest period lying in [N*(1-window), target); the axis target when
/// none exists. window in (0, 1].
PeriodDetector auto_detector(double window);

/// Detector driven by exhaustive encoding-collision scans over [0, target):
/// reports the smallest collision lag across all frequency indices, or the
/// axis target when no index collides within tolerance.
PeriodDetector collision_detector(double tolerance);

} // namespace uitf::extrap
