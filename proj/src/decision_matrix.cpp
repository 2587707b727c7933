#include "sis/decision_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include <fmt/format.h>

#include "sis/errors.hpp"

namespace sis {

SegmentType segment_type_from_int(int k) {
    if (k < 1 || k > kNumSegmentTypes) throw InputError(fmt::format("segment type {} not in 1..6", k));
    return static_cast<SegmentType>(k);
}

SegmentType segment_type_of(CrossingType c) { return static_cast<SegmentType>(static_cast<int>(c)); }

SegmentType segment_type_of(SeamCategory j) {
    switch (j) {
        case SeamCategory::solid: return SegmentType::solid;
        case SeamCategory::dotted:
        case SeamCategory::inward: return SegmentType::dotted;
        case SeamCategory::neckline: return SegmentType::neckline;
    }
    throw InputError("bad seam category");
}

const char* to_string(SegmentType t) {
    switch (t) {
        case SegmentType::shoulder: return "shoulder";
        case SegmentType::bottom_hem: return "bottom_hem";
        case SegmentType::neck_point: return "neck_point";
        case SegmentType::solid: return "solid";
        case SegmentType::dotted: return "dotted";
        case SegmentType::neckline: return "neckline";
    }
    return "?";
}

Csst Csst::of(SegmentType a, SegmentType b) {
    int x = static_cast<int>(a), y = static_cast<int>(b);
    return {std::max(x, y), std::min(x, y)};
}

Csst Csst::checked(int k, int l) {
    if (l < 1 || k > kNumSegmentTypes || k < l)
        throw InputError(fmt::format("invalid CSST ({}, {}): need 1 <= l <= k <= 6", k, l));
    return {k, l};
}

const char* to_string(MatrixLabel label) {
    switch (label) {
        case MatrixLabel::init: return "init";
        case MatrixLabel::nint: return "nint";
        case MatrixLabel::int_: return "int";
    }
    return "?";
}

MatrixLabel matrix_label_from_string(const std::string& s) {
    if (s == "init") return MatrixLabel::init;
    if (s == "nint") return MatrixLabel::nint;
    if (s == "int") return MatrixLabel::int_;
    throw DataError(fmt::format("unknown matrix label '{}'", s));
}

DecisionMatrix::DecisionMatrix(MatrixLabel label, int t_max) : label_(label), t_max_(t_max) {
    if (t_max < 1) throw InputError("T_max must be >= 1");
}

bool DecisionMatrix::empty() const {
    for (const auto& row : cells_)
        for (const auto& c : row)
            if (c.populated()) return false;
    return true;
}

std::vector<Csst> DecisionMatrix::populated_cells() const {
    std::vector<Csst> out;
    for (int k = 1; k <= kNumSegmentTypes; ++k)
        for (int l = 1; l <= k; ++l)
            if (populated({k, l})) out.push_back({k, l});
    return out;
}

void DecisionMatrix::add_reward(Csst c, double reward) {
    c = Csst::checked(c.k, c.l);
    if (!(reward >= 0.0 && reward <= 1.0)) throw InputError(fmt::format("reward {} outside [0,1]", reward));
    MatrixCell& cell = cells_[c.k - 1][c.l - 1];
    cell.count += 1;
    cell.u += (reward - cell.u) / static_cast<double>(cell.count);
}

void DecisionMatrix::set_cell(Csst c, MatrixCell cell) {
    c = Csst::checked(c.k, c.l);
    if (cell.count < 0) throw InputError("negative trial count");
    if (cell.count > 0 && !(cell.u >= 0.0 && cell.u <= 1.0)) throw InputError("score outside [0,1]");
    cells_[c.k - 1][c.l - 1] = cell;
}

double trial_reward(std::span<const double> ncovs, int T) {
    if (T < 1 || ncovs.size() != static_cast<std::size_t>(T))
        throw InputError(fmt::format("trial_reward: expected {} coverages, got {}", T, ncovs.size()));
    double sum = 0.0;
    for (double v : ncovs) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError(fmt::format("coverage {} outside [0,1]", v));
        sum += v;
    }
    return sum / static_cast<double>(T);
}

std::vector<double> pad_ncovs(std::span<const double> raw_ncovs, int completed_at, int t_max) {
    if (completed_at < 1 || completed_at > t_max || raw_ncovs.size() != static_cast<std::size_t>(completed_at))
        throw InputError(fmt::format("trial completed at step {} with {} coverages (T_max {})", completed_at,
                                     raw_ncovs.size(), t_max));
    std::vector<double> out(raw_ncovs.begin(), raw_ncovs.end());
    out.resize(static_cast<std::size_t>(t_max), raw_ncovs.back());
    return out;
}

DecisionMatrix record_trial(DecisionMatrix m, Csst csst, std::span<const double> raw_ncovs, int completed_at,
                            int t_max) {
    csst = Csst::checked(csst.k, csst.l);
    auto padded = pad_ncovs(raw_ncovs, completed_at, t_max);
    m.add_reward(csst, trial_reward(padded, t_max));
    return m;
}

DecisionMatrix record_step(DecisionMatrix m, Csst csst, std::span<const double> padded_ncovs, int step) {
    csst = Csst::checked(csst.k, csst.l);
    const int t_max = static_cast<int>(padded_ncovs.size());
    if (step < 1 || step > t_max) throw InputError(fmt::format("step {} outside 1..{}", step, t_max));
    auto tail = padded_ncovs.subspan(static_cast<std::size_t>(step - 1));
    m.add_reward(csst, trial_reward(tail, static_cast<int>(tail.size())));
    return m;
}

DecisionMatrix init_from_demos(std::span<const TrialRecord> demos, int t_max) {
    DecisionMatrix m(MatrixLabel::init, t_max);
    for (const auto& rec : demos) m = record_trial(std::move(m), rec.csst, rec.ncov_per_step, rec.completed_at_step, t_max);
    return m;
}

bool is_intermediate(double ncov_prev, double threshold) { return ncov_prev >= threshold; }

const DecisionMatrix& pick_matrix(double ncov_prev, const DecisionMatrix& m_nint, const DecisionMatrix& m_int,
                                  double threshold) {
    return is_intermediate(ncov_prev, threshold) ? m_int : m_nint;
}

namespace {

// Lexicographic key of an already left/right-assigned pair.
bool pair_less(Vec2 l1, Vec2 r1, Vec2 l2, Vec2 r2) {
    return std::tie(l1.x, l1.y, r1.x, r1.y) < std::tie(l2.x, l2.y, r2.x, r2.y);
}

std::pair<Vec2, Vec2> assign_hands(Vec2 a, Vec2 b) {
    if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
    return {a, b};
}

struct BestPair {
    Vec2 left, right;
    double dist = -1.0;
};

}  // namespace

GraspDecision select(std::span<const GraspCandidate> candidates, const DecisionMatrix& m) {
    std::array<std::array<std::optional<BestPair>, kNumSegmentTypes>, kNumSegmentTypes> best{};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            Csst c = Csst::of(candidates[i].type, candidates[j].type);
            if (!m.populated(c)) continue;
            double d = distance(candidates[i].point, candidates[j].point);
            if (d <= 0.0) continue;
            auto [left, right] = assign_hands(candidates[i].point, candidates[j].point);
            auto& slot = best[c.k - 1][c.l - 1];
            if (!slot || d > slot->dist || (d == slot->dist && pair_less(left, right, slot->left, slot->right)))
                slot = BestPair{left, right, d};
        }
    }

    std::optional<GraspDecision> chosen;
    for (int k = 1; k <= kNumSegmentTypes; ++k) {
        for (int l = 1; l <= k; ++l) {
            const auto& slot = best[k - 1][l - 1];
            if (!slot) continue;
            double u = m.cell({k, l}).u;
            // (k, l) is visited in lexicographic order, so strict comparisons keep the smaller index on ties.
            if (!chosen || u > chosen->score || (u == chosen->score && slot->dist > chosen->distance))
                chosen = GraspDecision{slot->left, slot->right, {k, l}, u, slot->dist};
        }
    }
    if (!chosen)
        throw NoFeasiblePair(fmt::format("no populated CSST realized by {} candidates", candidates.size()));
    return *chosen;
}

// Files -----------------------------------------------------------------------

using jsonl::Json;

std::string matrix_to_json(const DecisionMatrix& m) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["label"] = to_string(m.label());
    j["T_max"] = m.t_max();
    Json cells = Json::array();
    for (Csst c : m.populated_cells()) {
        Json e;
        e["k"] = c.k;
        e["l"] = c.l;
        e["u"] = m.cell(c).u;
        e["M"] = m.cell(c).count;
        cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
    return j.dump(2) + "\n";
}

DecisionMatrix matrix_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw DataError(fmt::format("malformed matrix JSON: {}", e.what()));
    }
    if (jsonl::get_int(j, "schema_version") != kSchemaVersion) throw DataError("unsupported matrix schema_version");
    DecisionMatrix m(matrix_label_from_string(jsonl::get_string(j, "label")), static_cast<int>(jsonl::get_int(j, "T_max")));
    for (const Json& e : jsonl::get_array(j, "cells")) {
        try {
            Csst c = Csst::checked(static_cast<int>(jsonl::get_int(e, "k")), static_cast<int>(jsonl::get_int(e, "l")));
            m.set_cell(c, {jsonl::get_number(e, "u"), jsonl::get_int(e, "M")});
        } catch (const InputError& err) {
            throw DataError(err.what());
        }
    }
    return m;
}

void save_matrix(const std::string& path, const DecisionMatrix& m) { jsonl::write_file(path, matrix_to_json(m)); }

DecisionMatrix load_matrix(const std::string& path) {
    try {
        return matrix_from_json(jsonl::read_file(path));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

std::string trial_to_json_line(const TrialRecord& rec) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["csst"] = Json::array({rec.csst.k, rec.csst.l});
    j["ncov_per_step"] = rec.ncov_per_step;
    j["completed_at_step"] = rec.completed_at_step;
    return j.dump();
}

TrialRecord trial_from_json(const Json& j) {
    if (jsonl::get_int(j, "schema_version") != kSchemaVersion) throw DataError("unsupported schema_version");
    const Json& c = jsonl::get_array(j, "csst");
    if (c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
        throw DataError("csst must be [k, l]");
    TrialRecord rec;
    try {
        rec.csst = Csst::checked(c[0].get<int>(), c[1].get<int>());
    } catch (const InputError& e) {
        throw DataError(e.what());
    }
    for (const Json& v : jsonl::get_array(j, "ncov_per_step")) {
        if (!v.is_number()) throw DataError("ncov_per_step entries must be numbers");
        rec.ncov_per_step.push_back(v.get<double>());
    }
    rec.completed_at_step = static_cast<int>(jsonl::get_int(j, "completed_at_step"));
    if (rec.ncov_per_step.size() != static_cast<std::size_t>(rec.completed_at_step))
        throw DataError("ncov_per_step length must equal completed_at_step");
    return rec;
}

std::vector<TrialRecord> read_trial_log(const std::string& path) {
    std::vector<TrialRecord> out;
    jsonl::for_each_line(path, [&](const Json& j, std::size_t) { out.push_back(trial_from_json(j)); });
    return out;
}

void write_trial_log(const std::string& path, std::span<const TrialRecord> records) {
    std::vector<std::string> lines;
    for (const auto& r : records) lines.push_back(trial_to_json_line(r));
    jsonl::write_lines(path, lines);
}

}  // namespace sis
