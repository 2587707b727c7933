#include "sis/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/random.hpp"

namespace sis {

const char* to_string(AblationMode m) {
    switch (m) {
        case AblationMode::sis: return "sis";
        case AblationMode::ab_dm: return "ab-dm";
        case AblationMode::ab_si: return "ab-si";
        case AblationMode::ab_mi: return "ab-mi";
    }
    return "?";
}

AblationMode ablation_mode_from_string(const std::string& s) {
    std::string k = s;
    std::replace(k.begin(), k.end(), '_', '-');
    if (k == "sis") return AblationMode::sis;
    if (k == "ab-dm") return AblationMode::ab_dm;
    if (k == "ab-si") return AblationMode::ab_si;
    if (k == "ab-mi") return AblationMode::ab_mi;
    throw InputError(fmt::format("unknown mode '{}' (expected sis, ab-dm, ab-si, ab-mi)", s));
}

void validate(const ExperimentConfig& cfg) {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError(fmt::format("{} must be in [0,1]", name));
    };
    unit(cfg.success_threshold, "success_threshold");
    unit(cfg.matrix_switch_threshold, "matrix_switch_threshold");
    unit(cfg.flatten_threshold, "flatten_threshold");
    unit(cfg.sim.recall_scd1, "recall_scd1");
    unit(cfg.sim.recall_scd2, "recall_scd2");
    unit(cfg.sim.shake_out_probability, "shake_out_probability");
    if (cfg.t_max < 1) throw InputError("T_max must be >= 1");
    if (cfg.n_trials < 1) throw InputError("n_trials must be >= 1");
    validate(cfg.fusion);
}

// Config files -----------------------------------------------------------------

namespace {

using jsonl::Json;

template <typename T>
void read_key(const Json& section, const char* key, T& out) {
    auto it = section.find(key);
    if (it == section.end()) return;
    try {
        out = it->get<T>();
    } catch (const Json::exception&) {
        throw InputError(fmt::format("config key '{}' has the wrong type", key));
    }
}

void reject_unknown(const Json& section, std::initializer_list<const char*> known, const char* name) {
    for (const auto& [key, value] : section.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw InputError(fmt::format("unknown key '{}' in config section '{}'", key, name));
    }
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text, ExperimentConfig cfg) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(fmt::format("malformed config: {}", e.what()));
    }
    reject_unknown(j, {"experiment", "sim", "fusion"}, "<root>");
    if (auto it = j.find("experiment"); it != j.end()) {
        const Json& e = *it;
        reject_unknown(e,
                       {"n_trials", "T_max", "success_threshold", "matrix_switch_threshold", "flatten_threshold",
                        "mode", "seed", "include_failures"},
                       "experiment");
        read_key(e, "n_trials", cfg.n_trials);
        read_key(e, "T_max", cfg.t_max);
        read_key(e, "success_threshold", cfg.success_threshold);
        read_key(e, "matrix_switch_threshold", cfg.matrix_switch_threshold);
        read_key(e, "flatten_threshold", cfg.flatten_threshold);
        read_key(e, "seed", cfg.seed);
        read_key(e, "include_failures", cfg.include_failures);
        std::string mode = to_string(cfg.mode);
        read_key(e, "mode", mode);
        cfg.mode = ablation_mode_from_string(mode);
    }
    if (auto it = j.find("sim"); it != j.end()) {
        const Json& s = *it;
        reject_unknown(s,
                       {"max_folds", "rotation_noise_deg", "translation_noise_px", "detection_jitter_px",
                        "recall_scd1", "recall_scd2", "confidence_noise", "grasp_tolerance_px",
                        "flop_min_overhang_px", "shake_out_probability", "drop_point", "max_segment_px", "min_visible_px", "lambda_thres",
                        "randomize_ncov_below", "min_fold_fraction"},
                       "sim");
        SimConfig& c = cfg.sim;
        read_key(s, "max_folds", c.max_folds);
        read_key(s, "rotation_noise_deg", c.rotation_noise_deg);
        read_key(s, "translation_noise_px", c.translation_noise_px);
        read_key(s, "detection_jitter_px", c.detection_jitter_px);
        read_key(s, "recall_scd1", c.recall_scd1);
        read_key(s, "recall_scd2", c.recall_scd2);
        read_key(s, "confidence_noise", c.confidence_noise);
        read_key(s, "grasp_tolerance_px", c.grasp_tolerance_px);
        read_key(s, "flop_min_overhang_px", c.flop_min_overhang_px);
        read_key(s, "shake_out_probability", c.shake_out_probability);
        read_key(s, "max_segment_px", c.max_segment_px);
        read_key(s, "min_visible_px", c.min_visible_px);
        read_key(s, "lambda_thres", c.lambda_thres);
        read_key(s, "randomize_ncov_below", c.randomize_ncov_below);
        read_key(s, "min_fold_fraction", c.min_fold_fraction);
        if (auto dp = s.find("drop_point"); dp != s.end()) {
            if (!dp->is_array() || dp->size() != 2) throw InputError("drop_point must be [x, y]");
            c.drop_point = {(*dp)[0].get<double>(), (*dp)[1].get<double>()};
        }
    }
    if (auto it = j.find("fusion"); it != j.end()) {
        const Json& f = *it;
        reject_unknown(f, {"max_per_type", "dedup_radius"}, "fusion");
        read_key(f, "dedup_radius", cfg.fusion.dedup_radius);
        if (auto mp = f.find("max_per_type"); mp != f.end()) {
            if (!mp->is_array() || mp->size() != 3) throw InputError("max_per_type must have 3 entries");
            for (std::size_t i = 0; i < 3; ++i) cfg.fusion.max_per_type[i] = (*mp)[i].get<int>();
        }
    }
    validate(cfg);
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    Json j;
    j["experiment"] = {{"n_trials", cfg.n_trials},
                       {"T_max", cfg.t_max},
                       {"success_threshold", cfg.success_threshold},
                       {"matrix_switch_threshold", cfg.matrix_switch_threshold},
                       {"flatten_threshold", cfg.flatten_threshold},
                       {"mode", to_string(cfg.mode)},
                       {"seed", cfg.seed},
                       {"include_failures", cfg.include_failures}};
    const SimConfig& c = cfg.sim;
    j["sim"] = {{"max_folds", c.max_folds},
                {"rotation_noise_deg", c.rotation_noise_deg},
                {"translation_noise_px", c.translation_noise_px},
                {"detection_jitter_px", c.detection_jitter_px},
                {"recall_scd1", c.recall_scd1},
                {"recall_scd2", c.recall_scd2},
                {"confidence_noise", c.confidence_noise},
                {"grasp_tolerance_px", c.grasp_tolerance_px},
                {"flop_min_overhang_px", c.flop_min_overhang_px},
                {"shake_out_probability", c.shake_out_probability},
                {"drop_point", {c.drop_point.x, c.drop_point.y}},
                {"max_segment_px", c.max_segment_px},
                {"min_visible_px", c.min_visible_px},
                {"lambda_thres", c.lambda_thres},
                {"randomize_ncov_below", c.randomize_ncov_below},
                {"min_fold_fraction", c.min_fold_fraction}};
    j["fusion"] = {{"max_per_type", cfg.fusion.max_per_type}, {"dedup_radius", cfg.fusion.dedup_radius}};
    return j.dump(2) + "\n";
}

Matrices Matrices::from_init(const DecisionMatrix& init) {
    Matrices m{init, init};
    m.nint.set_label(MatrixLabel::nint);
    m.int_.set_label(MatrixLabel::int_);
    return m;
}

// Episode step ---------------------------------------------------------------------

namespace {

enum SeedPurpose : std::uint64_t { kDetect = 1, kFling = 2, kRandomize = 3, kInitial = 4 };

Json point_json(Vec2 p) { return Json::array({p.x, p.y}); }

double unit_clamp(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::vector<GraspCandidate> assemble_candidates(const GarmentSim::DetectorOutput& det, AblationMode mode,
                                                const FusionConfig& fusion) {
    std::vector<GraspCandidate> out;
    if (mode != AblationMode::ab_si) {
        for (const auto& box : det.seam_boxes)
            for (const SeamPoint& sp : grasp_candidates_from_box(box))
                out.push_back({segment_type_of(sp.category), sp.point, Provenance::line_segment});
    }
    const auto crossings = mode == AblationMode::ab_si ? merge({}, det.scd2, fusion) : merge(det.scd1, det.scd2, fusion);
    for (const auto& c : crossings) out.push_back({segment_type_of(c.type), c.point(), Provenance::crossing});
    return out;
}

StepResult run_episode_step(const GarmentSim& sim, const GarmentState& state, const Matrices& matrices,
                            const ExperimentConfig& cfg, std::uint64_t step_seed) {
    StepResult r;
    const GarmentObservation obs = sim.render(state);
    r.ncov_prev = obs.ncov;
    const auto det = sim.detector_surrogate(obs, derive_seed(step_seed, {kDetect}));
    const auto candidates = assemble_candidates(det, cfg.mode, cfg.fusion);
    r.n_candidates = candidates.size();

    const bool intermediate =
        cfg.mode != AblationMode::ab_dm && is_intermediate(obs.ncov, cfg.matrix_switch_threshold);
    const DecisionMatrix& m = intermediate ? matrices.int_ : matrices.nint;
    r.matrix_used = m.label();

    Json action;
    r.state = state;
    try {
        r.decision = select(candidates, m);
        action = {{"type", "grasp_fling"},
                  {"p_left", point_json(r.decision->p_left)},
                  {"p_right", point_json(r.decision->p_right)},
                  {"csst", Json::array({r.decision->csst.k, r.decision->csst.l})},
                  {"score", r.decision->score}};
        try {
            r.state = sim.grasp_fling(state, r.decision->p_left, r.decision->p_right, derive_seed(step_seed, {kFling}));
        } catch (const GraspMiss& e) {
            r.metrics.excluded = true;
            action["failure"] = "grasp_miss";
        }
    } catch (const NoFeasiblePair&) {
        r.decision.reset();
        r.matrix_used.reset();
        r.state = sim.randomize(state, derive_seed(step_seed, {kRandomize}));
        action = {{"type", "randomize"}, {"reason", "no_feasible_pair"}};
    }

    const GarmentObservation after = sim.render(r.state);
    r.metrics.ncov = after.ncov;
    r.metrics.iou = after.iou;

    r.log = {{"state_digest", state_digest(state)},
             {"matrix", r.matrix_used ? Json(to_string(*r.matrix_used)) : Json(nullptr)},
             {"action", std::move(action)},
             {"observation",
              {{"ncov", obs.ncov},
               {"segments", obs.visible_segments.size()},
               {"crossings", obs.visible_crossings.size()},
               {"candidates", candidates.size()}}},
             {"result_digest", state_digest(r.state)},
             {"ncov", r.metrics.ncov},
             {"iou", r.metrics.iou},
             {"excluded", r.metrics.excluded}};
    return r;
}

TrialResult run_trial(const GarmentSim& sim, Matrices& matrices, const ExperimentConfig& cfg, int trial_index) {
    validate(cfg);
    const std::uint64_t trial_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(trial_index)});
    GarmentState state = sim.randomize(GarmentState::flat(), derive_seed(trial_seed, {kInitial}));

    TrialResult t;
    t.metrics.trial_id = fmt::format("{}", trial_index);
    t.metrics.initial_ncov = sim.render(state).ncov;

    struct Executed {
        std::optional<GraspDecision> decision;
        std::optional<MatrixLabel> matrix;
        double ncov_prev;
        bool excluded;
    };
    std::vector<Executed> executed;
    std::vector<double> raw;

    for (int step = 1; step <= cfg.t_max; ++step) {
        StepResult r = run_episode_step(sim, state, matrices, cfg,
                                        derive_seed(trial_seed, {static_cast<std::uint64_t>(step)}));
        r.log["trial"] = trial_index;
        r.log["step"] = step;
        t.log.push_back(std::move(r.log));
        t.metrics.per_step.push_back(r.metrics);
        executed.push_back({r.decision, r.matrix_used, r.ncov_prev, r.metrics.excluded});
        raw.push_back(unit_clamp(r.metrics.ncov));
        state = r.state;
        t.completed_at = step;
        if (r.metrics.ncov >= cfg.flatten_threshold) break;
    }
    while (static_cast<int>(t.metrics.per_step.size()) < cfg.t_max) {
        StepMetrics pad = t.metrics.per_step.back();
        pad.excluded = false;
        t.metrics.per_step.push_back(pad);
    }

    if (cfg.mode == AblationMode::ab_mi) return t;

    // Trial-level update of the non-intermediate matrix with the first grasp's CSST.
    const Executed& first = executed.front();
    if (first.decision && first.matrix == MatrixLabel::nint && !first.excluded &&
        !is_intermediate(first.ncov_prev, cfg.matrix_switch_threshold))
        matrices.nint = record_trial(std::move(matrices.nint), first.decision->csst, raw, t.completed_at, cfg.t_max);

    // Step-level updates of the intermediate matrix, in step order.
    const auto padded = pad_ncovs(raw, t.completed_at, cfg.t_max);
    for (std::size_t i = 0; i < executed.size(); ++i) {
        const Executed& e = executed[i];
        if (e.decision && e.matrix == MatrixLabel::int_ && !e.excluded)
            matrices.int_ = record_step(std::move(matrices.int_), e.decision->csst, padded, static_cast<int>(i) + 1);
    }
    return t;
}

ExperimentResult run_experiment(const GarmentSim& sim, Matrices matrices, const ExperimentConfig& cfg) {
    validate(cfg);
    ExperimentResult out;
    for (int i = 0; i < cfg.n_trials; ++i) {
        TrialResult t = run_trial(sim, matrices, cfg, i);
        out.trials.push_back(std::move(t.metrics));
        for (auto& l : t.log) out.log.push_back(std::move(l));
    }
    out.aggregate = aggregate(out.trials, cfg.success_threshold, cfg.include_failures);
    out.matrices = std::move(matrices);
    return out;
}

void write_experiment_outputs(const std::string& dir, const ExperimentResult& result, const ExperimentConfig& cfg) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path d(dir);
    jsonl::write_file((d / "metrics.csv").string(), metrics_csv(result.trials, cfg.success_threshold));
    jsonl::write_file((d / "aggregate.csv").string(), aggregate_csv(result.aggregate));
    std::vector<std::string> lines;
    for (const auto& l : result.log) lines.push_back(l.dump());
    jsonl::write_lines((d / "episodes.jsonl").string(), lines);
    save_matrix((d / "matrix_nint.json").string(), result.matrices.nint);
    save_matrix((d / "matrix_int.json").string(), result.matrices.int_);
}

IngestResult ingest_demo_log(const std::string& path, int t_max) {
    auto records = read_trial_log(path);
    IngestResult r{init_from_demos(records, t_max), {}};
    if (records.empty()) r.warnings.push_back(fmt::format("{}: no demonstration records; matrix is empty", path));
    return r;
}

// Demonstrations -------------------------------------------------------------------

SimConfig DemoConfig::demonstrator_sim() {
    // Human demonstrators place the garment precisely and smooth small overhangs by hand.
    SimConfig c;
    c.rotation_noise_deg = 0.0;
    c.translation_noise_px = 0.0;
    c.flop_min_overhang_px = 150.0;
    return c;
}

namespace {

// Demonstrator heuristic for follow-up steps: both shoulders when visible, otherwise
// the two crossings farthest apart, otherwise the farthest pair of any candidates.
std::optional<std::pair<Vec2, Vec2>> demonstrator_pick(const std::vector<GraspCandidate>& cands) {
    auto farthest = [&](auto&& keep) -> std::optional<std::pair<Vec2, Vec2>> {
        std::optional<std::pair<Vec2, Vec2>> best;
        double best_d = 0.0;
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                if (!keep(cands[i]) || !keep(cands[j])) continue;
                double d = distance(cands[i].point, cands[j].point);
                if (d > best_d) {
                    best_d = d;
                    best = cands[i].point.x <= cands[j].point.x ? std::pair{cands[i].point, cands[j].point}
                                                               : std::pair{cands[j].point, cands[i].point};
                }
            }
        return best;
    };
    if (auto p = farthest([](const GraspCandidate& c) { return c.type == SegmentType::shoulder; })) return p;
    if (auto p = farthest([](const GraspCandidate& c) { return c.provenance == Provenance::crossing; })) return p;
    return farthest([](const GraspCandidate&) { return true; });
}

}  // namespace

std::vector<TrialRecord> generate_demonstrations(const GarmentModel& model, const DemoConfig& cfg,
                                                 const FusionConfig& fusion) {
    SimConfig perception = cfg.sim;
    perception.detection_jitter_px = 0.0;
    perception.recall_scd1 = 1.0;
    perception.recall_scd2 = 1.0;
    GarmentSim sim(model, perception);

    std::vector<TrialRecord> out;
    for (int k = 1; k <= kNumSegmentTypes; ++k) {
        for (int l = 1; l <= k; ++l) {
            const Csst target{k, l};
            DecisionMatrix only(MatrixLabel::init, cfg.t_max);
            only.set_cell(target, {1.0, 1});
            for (int trial = 0; trial < cfg.trials_per_cell; ++trial) {
                const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(k),
                                                                  static_cast<std::uint64_t>(l),
                                                                  static_cast<std::uint64_t>(trial)});
                // Randomize until the target combination is available.
                std::optional<std::pair<GarmentState, GraspDecision>> start;
                for (int a = 0; a < cfg.max_randomize_attempts && !start; ++a) {
                    GarmentState s = sim.randomize(GarmentState::flat(),
                                                   derive_seed(seed, {static_cast<std::uint64_t>(a), kRandomize}));
                    const auto det = sim.detector_surrogate(sim.render(s), derive_seed(seed, {kDetect}));
                    const auto cands = assemble_candidates(det, AblationMode::sis, fusion);
                    try {
                        start.emplace(s, select(cands, only));
                    } catch (const NoFeasiblePair&) {
                    }
                }
                if (!start) break;  // combination not reachable from random drops; leave cell empty

                GarmentState state = start->first;
                std::vector<double> ncovs;
                std::pair<Vec2, Vec2> grasp{start->second.p_left, start->second.p_right};
                for (int step = 1; step <= cfg.t_max; ++step) {
                    const std::uint64_t step_seed = derive_seed(seed, {1000u + static_cast<std::uint64_t>(step)});
                    try {
                        state = sim.grasp_fling(state, grasp.first, grasp.second, derive_seed(step_seed, {kFling}));
                    } catch (const GraspMiss&) {
                    }
                    const double nc = unit_clamp(sim.render(state).ncov);
                    ncovs.push_back(nc);
                    if (nc >= cfg.flatten_threshold || step == cfg.t_max) break;
                    const auto det = sim.detector_surrogate(sim.render(state), derive_seed(step_seed, {kDetect}));
                    auto pick = demonstrator_pick(assemble_candidates(det, AblationMode::sis, fusion));
                    if (!pick) {
                        state = sim.randomize(state, derive_seed(step_seed, {kRandomize}));
                        continue;
                    }
                    grasp = *pick;
                }
                out.push_back({target, ncovs, static_cast<int>(ncovs.size())});
            }
        }
    }
    return out;
}

// Report -------------------------------------------------------------------------

Report make_report(const std::vector<EpisodeMetrics>& trials, double threshold, bool include_failures) {
    Report r;
    r.steps = aggregate(trials, threshold, include_failures);
    r.csv = aggregate_csv(r.steps);
    r.table = fmt::format("{} trials, success threshold {}\n", trials.size(), threshold);
    r.table += fmt::format("{:>4} {:>4} {:>10} {:>10} {:>10} {:>10} {:>9}\n", "step", "n", "mean_ncov", "ci95_ncov",
                           "mean_iou", "ci95_iou", "success");
    for (const auto& s : r.steps)
        r.table += fmt::format("{:>4} {:>4} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>8.1f}%\n", s.step, s.n,
                               s.ncov.mean, s.ncov.ci95, s.iou.mean, s.iou.ci95, 100.0 * s.success_rate);
    return r;
}

}  // namespace sis
