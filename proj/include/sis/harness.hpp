#pragma once

// Closed-loop experiment harness: observe -> extract -> select -> act, with decision
// matrix routing and updates, per-step metrics and logs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sis/decision_matrix.hpp"
#include "sis/detection_fusion.hpp"
#include "sis/garment_sim.hpp"
#include "sis/jsonl.hpp"
#include "sis/metrics.hpp"

namespace sis {

enum class AblationMode { sis, ab_dm, ab_si, ab_mi };
const char* to_string(AblationMode m);
AblationMode ablation_mode_from_string(const std::string& s);  // accepts "ab-dm" and "ab_dm"

struct ExperimentConfig {
    int n_trials = 20;
    int t_max = 5;
    double success_threshold = kSuccessThreshold;
    double matrix_switch_threshold = kMatrixSwitchThreshold;
    // A trial stops early once coverage reaches this; remaining steps repeat the last value.
    double flatten_threshold = 0.95;
    AblationMode mode = AblationMode::sis;
    std::uint64_t seed = 0;
    bool include_failures = false;
    FusionConfig fusion;
    SimConfig sim;
};

void validate(const ExperimentConfig& cfg);

// Reads {"experiment": {...}, "sim": {...}, "fusion": {...}}; absent keys keep defaults.
// Unknown keys raise InputError.
ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig base = {});
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct Matrices {
    DecisionMatrix nint{MatrixLabel::nint};
    DecisionMatrix int_{MatrixLabel::int_};

    static Matrices from_init(const DecisionMatrix& init);
};

struct StepResult {
    GarmentState state;             // configuration after the step
    StepMetrics metrics;            // of the configuration after the step
    double ncov_prev = 0.0;
    std::optional<GraspDecision> decision;
    std::optional<MatrixLabel> matrix_used;
    std::size_t n_candidates = 0;
    jsonl::Json log;                // one episode-log record
};

// Candidate assembly for a detector output under an ablation mode.
std::vector<GraspCandidate> assemble_candidates(const GarmentSim::DetectorOutput& det, AblationMode mode,
                                                const FusionConfig& fusion);

StepResult run_episode_step(const GarmentSim& sim, const GarmentState& state, const Matrices& matrices,
                            const ExperimentConfig& cfg, std::uint64_t step_seed);

struct TrialResult {
    EpisodeMetrics metrics;  // padded to t_max
    int completed_at = 0;
    std::vector<jsonl::Json> log;
};

// Runs one trial from a fresh randomized configuration and applies the matrix updates
// for that trial to `matrices` (none in ab_mi mode).
TrialResult run_trial(const GarmentSim& sim, Matrices& matrices, const ExperimentConfig& cfg, int trial_index);

struct ExperimentResult {
    std::vector<EpisodeMetrics> trials;
    std::vector<StepAggregate> aggregate;
    Matrices matrices;
    std::vector<jsonl::Json> log;
};

ExperimentResult run_experiment(const GarmentSim& sim, Matrices matrices, const ExperimentConfig& cfg);

// metrics.csv, aggregate.csv, episodes.jsonl, matrix_nint.json, matrix_int.json
void write_experiment_outputs(const std::string& dir, const ExperimentResult& result, const ExperimentConfig& cfg);

struct IngestResult {
    DecisionMatrix matrix;
    std::vector<std::string> warnings;
};
IngestResult ingest_demo_log(const std::string& path, int t_max);

// Synthetic demonstrations: for every CSST, randomize until a pair of that combination is
// visible, grasp its farthest pair, then continue with a fixed demonstrator heuristic.
struct DemoConfig {
    int trials_per_cell = 10;
    int t_max = 5;
    double flatten_threshold = 0.95;
    std::uint64_t seed = 0;
    int max_randomize_attempts = 400;
    SimConfig sim = demonstrator_sim();

    static SimConfig demonstrator_sim();
};
std::vector<TrialRecord> generate_demonstrations(const GarmentModel& model, const DemoConfig& cfg,
                                                 const FusionConfig& fusion = {});

// Text report of a per-step metrics CSV.
struct Report {
    std::vector<StepAggregate> steps;
    std::string table;  // human-readable, success rates as percentages
    std::string csv;    // aggregate CSV
};
Report make_report(const std::vector<EpisodeMetrics>& trials, double threshold, bool include_failures);

}  // namespace sis
