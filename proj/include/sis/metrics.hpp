#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sis/coverage_mask.hpp"

namespace sis {

// popcount(mask) / cov_max. Not clamped: rasterization of a re-placed garment can cover a
// few pixels more than the reference, see is_over_covered().
double ncov(const CoverageMask& mask, std::uint64_t cov_max);
inline bool is_over_covered(double ncov_value) { return ncov_value > 1.0; }
// Over-coverage beyond this is treated as a modeling error by callers.
inline constexpr double kMaxPlausibleNcov = 1.05;

// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double iou(const CoverageMask& a, const CoverageMask& b);

inline constexpr double kSuccessThreshold = 0.85;

struct StepMetrics {
    double ncov = 0.0;
    double iou = 0.0;
    bool excluded = false;  // hardware-style failure (grasp miss) kept for auditing
};

struct EpisodeMetrics {
    std::string trial_id;
    double initial_ncov = 0.0;
    std::vector<StepMetrics> per_step;
};

// Both metrics reach the threshold at 1-based step. "Exceeds" is taken as >=.
bool success_at(const EpisodeMetrics& m, std::size_t step, double threshold);

struct MeanCi {
    double mean = 0.0;
    double ci95 = 0.0;  // half-width, 1.96 * sd / sqrt(n)
    bool degenerate = false;  // n < 2: sd undefined, ci reported as 0
};
MeanCi mean_ci95(std::span<const double> values);

struct StepAggregate {
    std::size_t step = 0;  // 1-based
    std::size_t n = 0;
    MeanCi ncov;
    MeanCi iou;
    double success_rate = 0.0;
};

// Per-step statistics across trials of equal length. Excluded rows are skipped unless
// include_excluded is set.
std::vector<StepAggregate> aggregate(std::span<const EpisodeMetrics> trials, double threshold,
                                     bool include_excluded = false);

// CSV ------------------------------------------------------------------------

std::string metrics_csv(std::span<const EpisodeMetrics> trials, double threshold);
std::string aggregate_csv(std::span<const StepAggregate> steps);
std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text);

}  // namespace sis
