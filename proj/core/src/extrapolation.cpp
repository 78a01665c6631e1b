#include "uitf/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

namespace uitf::extrap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_scale(double s) {
    if (!(s >= 1.0) || !std::isfinite(s)) {
        throw ArgumentError("extrapolation scale must be >= 1, got " + std::to_string(s));
    }
}

} // namespace

void YarnParams::validate() const {
    if (!(alpha > 0.0) || !(beta > alpha)) {
        throw ConfigError("yarn params require 0 < alpha < beta");
    }
}

FrequencySchedule scale_pi(const FrequencySchedule& schedule, double s) {
    require_scale(s);
    std::vector<double> freqs = schedule.freqs();
    std::vector<rope::Correction> corrections = schedule.corrections();
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        const double scaled = freqs[j] / s;
        if (scaled != freqs[j]) {
            corrections.push_back({j, freqs[j], scaled});
            freqs[j] = scaled;
        }
    }
    return FrequencySchedule(schedule.config(), std::move(freqs), std::move(corrections));
}

FrequencySchedule scale_ntk(const RopeConfig& config, double s) {
    require_scale(s);
    config.validate();
    if (config.axis_dim < 4) {
        throw ConfigError("base rescaling needs axis_dim >= 4");
    }
    const double d = static_cast<double>(config.axis_dim);
    const double lambda = std::pow(s, d / (d - 2.0));
    RopeConfig scaled = config;
    scaled.base = lambda * config.base;
    return rope::build_schedule(scaled);
}

FrequencySchedule scale_yarn(const RopeConfig& config, double s, std::size_t train_length,
                             const YarnParams& params) {
    require_scale(s);
    params.validate();
    if (train_length < 1) {
        throw ArgumentError("train_length must be >= 1");
    }
    FrequencySchedule base = rope::build_schedule(config);
    std::vector<double> freqs = base.freqs();
    std::vector<rope::Correction> corrections;
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        // rotations the pair completes over the training extent
        const double rotations = static_cast<double>(train_length) * freqs[j] / kTwoPi;
        double gamma = (rotations - params.alpha) / (params.beta - params.alpha);
        gamma = std::clamp(gamma, 0.0, 1.0);
        const double blended = ((1.0 - gamma) / s + gamma) * freqs[j];
        if (blended != freqs[j]) {
            corrections.push_back({j, freqs[j], blended});
            freqs[j] = blended;
        }
    }
    return FrequencySchedule(config, std::move(freqs), std::move(corrections));
}

std::pair<FrequencySchedule, std::size_t> correct_dominant(const FrequencySchedule& schedule,
                                                           std::size_t reference_length,
                                                           std::size_t target_length) {
    if (target_length < reference_length) {
        throw ArgumentError("target length must be >= reference length");
    }
    const auto table = rope::period_table(schedule, reference_length);
    const std::size_t k = table.dominant_index;
    return {schedule.with_frequency(k, kTwoPi / static_cast<double>(target_length)), k};
}

namespace {

struct AxisState {
    Axis axis;
    double observed;
    std::size_t target;
    std::set<std::size_t> corrected;

    bool active() const { return observed < static_cast<double>(target); }
};

// Dominant index nearest the observed period, skipping indices this run
// already corrected (their period equals the target, so re-picking them
// would loop forever). Ties go to the smaller index.
std::size_t pick_dominant(const FrequencySchedule& sched, double observed,
                          const std::set<std::size_t>& corrected, const RdfcLog& log) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t j = 0; j < sched.size(); ++j) {
        if (corrected.contains(j)) continue;
        const double period = kTwoPi / sched.freqs()[j];
        const double dist = std::abs(period - observed);
        if (dist < best_dist) {
            best_dist = dist;
            best = j;
            found = true;
        }
    }
    if (!found) {
        throw IterationCapError("every index on one axis has been corrected without convergence",
                                log);
    }
    return best;
}

} // namespace

RdfcResult rdfc(const FrequencySchedule& sched_h, const FrequencySchedule& sched_w,
                const ResolutionSpec& spec, const PeriodDetector& detector) {
    if (!detector) {
        throw ArgumentError("rdfc requires a detector");
    }
    RdfcResult result{sched_h, sched_w, {}};
    AxisState h{Axis::Height, static_cast<double>(spec.train_h), spec.target_h, {}};
    AxisState w{Axis::Width, static_cast<double>(spec.train_w), spec.target_w, {}};

    // belt-and-braces guard; the per-axis index sets are the real cap
    const std::size_t max_rounds = sched_h.size() + sched_w.size() + 1;
    for (std::size_t round = 0; round < max_rounds && (h.active() || w.active()); ++round) {
        const bool h_was_active = h.active();
        const bool w_was_active = w.active();
        for (AxisState* axis : {&h, &w}) {
            if (!axis->active()) continue;
            FrequencySchedule& sched = axis->axis == Axis::Height ? result.sched_h : result.sched_w;
            const std::size_t k = pick_dominant(sched, axis->observed, axis->corrected, result.log);
            const double new_theta = kTwoPi / static_cast<double>(axis->target);
            result.log.iterations.push_back(
                {axis->axis, axis->observed, k, sched.freqs()[k], new_theta});
            sched = sched.with_frequency(k, new_theta);
            axis->corrected.insert(k);
        }
        const DetectorReport report =
            detector({result.sched_h, result.sched_w, h.observed, w.observed, spec});
        if (h_was_active) {
            if (report.period_h <= h.observed) {
                throw StagnationError("detector reported a non-increasing period on the height axis",
                                      result.log);
            }
            h.observed = report.period_h;
        }
        if (w_was_active) {
            if (report.period_w <= w.observed) {
                throw StagnationError("detector reported a non-increasing period on the width axis",
                                      result.log);
            }
            w.observed = report.period_w;
        }
    }
    if (h.active() || w.active()) {
        throw IterationCapError("correction rounds exhausted without convergence", result.log);
    }
    result.log.converged = true;
    return result;
}

PeriodDetector auto_detector(double window) {
    if (!(window > 0.0) || window > 1.0) {
        throw ArgumentError("window must lie in (0, 1]");
    }
    return [window](const DetectorInput& in) -> DetectorReport {
        auto scan = [window](const FrequencySchedule& sched, double observed, std::size_t target) {
            const double lo = observed * (1.0 - window);
            const double hi = static_cast<double>(target);
            double best = hi;
            for (double theta : sched.freqs()) {
                const double period = kTwoPi / theta;
                if (period >= lo && period < hi && period < best) {
                    best = period;
                }
            }
            return best;
        };
        return {scan(in.sched_h, in.observed_h, in.spec.target_h),
                scan(in.sched_w, in.observed_w, in.spec.target_w)};
    };
}

PeriodDetector collision_detector(double tolerance) {
    if (!(tolerance > 0.0)) {
        throw ArgumentError("tolerance must be > 0");
    }
    return [tolerance](const DetectorInput& in) -> DetectorReport {
        auto scan = [tolerance](const FrequencySchedule& sched, std::size_t target) {
            std::size_t best = target;
            for (std::size_t j = 0; j < sched.size(); ++j) {
                const auto pairs = rope::encoding_collisions(sched, j, target, tolerance);
                for (const auto& pair : pairs) {
                    best = std::min(best, pair.lag());
                }
            }
            return static_cast<double>(best);
        };
        return {scan(in.sched_h, in.spec.target_h), scan(in.sched_w, in.spec.target_w)};
    };
}

} // namespace uitf::extrap
