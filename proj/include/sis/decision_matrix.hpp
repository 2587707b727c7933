#pragma once

// Decision Matrix Iteration Method.
//
// A decision matrix scores every unordered combination of two seam segment types (CSST)
// by the mean trial reward observed when grasping that combination first. Rewards are
// average normalized coverage over a trial, with early-finished trials padded by
// repeating their last coverage value.

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sis/detection_fusion.hpp"
#include "sis/geometry.hpp"
#include "sis/jsonl.hpp"
#include "sis/seam_codec.hpp"

namespace sis {

enum class SegmentType : int { shoulder = 1, bottom_hem = 2, neck_point = 3, solid = 4, dotted = 5, neckline = 6 };
inline constexpr int kNumSegmentTypes = 6;

SegmentType segment_type_from_int(int k);
SegmentType segment_type_of(CrossingType c);
SegmentType segment_type_of(SeamCategory j);  // inward seams are treated as dotted
const char* to_string(SegmentType t);

// Canonical CSST index (k, l) with k >= l.
struct Csst {
    int k = 1;
    int l = 1;

    static Csst of(SegmentType a, SegmentType b);
    static Csst checked(int k, int l);  // throws InputError unless 1 <= l <= k <= 6
    friend auto operator<=>(const Csst&, const Csst&) = default;
};

enum class MatrixLabel { init, nint, int_ };
const char* to_string(MatrixLabel label);
MatrixLabel matrix_label_from_string(const std::string& s);

struct MatrixCell {
    double u = 0.0;
    long long count = 0;

    bool populated() const { return count > 0; }
    friend bool operator==(const MatrixCell&, const MatrixCell&) = default;
};

class DecisionMatrix {
public:
    explicit DecisionMatrix(MatrixLabel label = MatrixLabel::init, int t_max = 5);

    MatrixLabel label() const { return label_; }
    void set_label(MatrixLabel label) { label_ = label; }
    int t_max() const { return t_max_; }

    const MatrixCell& cell(Csst c) const { return cells_[c.k - 1][c.l - 1]; }
    bool populated(Csst c) const { return cell(c).populated(); }
    bool empty() const;
    std::vector<Csst> populated_cells() const;

    // Incremental mean: M <- M + 1, u <- u + (R - u) / M.
    void add_reward(Csst c, double reward);
    // Direct cell assignment for loading files and building fixtures.
    void set_cell(Csst c, MatrixCell cell);

    friend bool operator==(const DecisionMatrix&, const DecisionMatrix&) = default;

private:
    MatrixLabel label_;
    int t_max_;
    std::array<std::array<MatrixCell, kNumSegmentTypes>, kNumSegmentTypes> cells_{};
};

// (1/T) * sum of the per-step coverages. Requires ncovs.size() == T >= 1, entries in [0,1].
double trial_reward(std::span<const double> ncovs, int T);

// Repeats the last value of raw_ncovs up to length t_max. Requires
// raw_ncovs.size() == completed_at, 1 <= completed_at <= t_max.
std::vector<double> pad_ncovs(std::span<const double> raw_ncovs, int completed_at, int t_max);

// Trial-level update of cell csst with the padded trial reward.
DecisionMatrix record_trial(DecisionMatrix m, Csst csst, std::span<const double> raw_ncovs, int completed_at,
                            int t_max);

// Step-level update: reward over the padded coverages from step (1-based) through t_max.
DecisionMatrix record_step(DecisionMatrix m, Csst csst, std::span<const double> padded_ncovs, int step);

struct TrialRecord {
    Csst csst;
    std::vector<double> ncov_per_step;  // raw, length == completed_at_step
    int completed_at_step = 0;
};

DecisionMatrix init_from_demos(std::span<const TrialRecord> demos, int t_max);

inline constexpr double kMatrixSwitchThreshold = 0.4;

// Intermediate-configuration matrix iff ncov_prev >= threshold.
bool is_intermediate(double ncov_prev, double threshold = kMatrixSwitchThreshold);
const DecisionMatrix& pick_matrix(double ncov_prev, const DecisionMatrix& m_nint, const DecisionMatrix& m_int,
                                  double threshold = kMatrixSwitchThreshold);

enum class Provenance { line_segment, crossing };

struct GraspCandidate {
    SegmentType type;
    Vec2 point;
    Provenance provenance = Provenance::line_segment;
};

struct GraspDecision {
    Vec2 p_left;
    Vec2 p_right;
    Csst csst;
    double score = 0.0;
    double distance = 0.0;
};

// Highest-scoring feasible CSST, then its most distant realizing pair. Pairs of coincident
// points are not considered. Throws NoFeasiblePair when nothing is feasible.
GraspDecision select(std::span<const GraspCandidate> candidates, const DecisionMatrix& m);

// Files -----------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

std::string matrix_to_json(const DecisionMatrix& m);
DecisionMatrix matrix_from_json(const std::string& text);
void save_matrix(const std::string& path, const DecisionMatrix& m);
DecisionMatrix load_matrix(const std::string& path);

std::string trial_to_json_line(const TrialRecord& rec);
TrialRecord trial_from_json(const nlohmann::ordered_json& j);
std::vector<TrialRecord> read_trial_log(const std::string& path);
void write_trial_log(const std::string& path, std::span<const TrialRecord> records);

}  // namespace sis
