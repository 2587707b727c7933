#include "sis/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/kernels/mask_kernels.hpp"

namespace sis {

double ncov(const CoverageMask& mask, std::uint64_t cov_max) {
    if (cov_max == 0) throw InputError("cov_max must be positive");
    return static_cast<double>(mask.popcount()) / static_cast<double>(cov_max);
}

double iou(const CoverageMask& a, const CoverageMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) throw InputError("iou: mask dimensions differ");
    const auto& k = kernels::active_kernels();
    const std::uint64_t uni = k.or_popcount(a.words().data(), b.words().data(), a.words().size());
    if (uni == 0) return 0.0;
    const std::uint64_t inter = k.and_popcount(a.words().data(), b.words().data(), a.words().size());
    return static_cast<double>(inter) / static_cast<double>(uni);
}

bool success_at(const EpisodeMetrics& m, std::size_t step, double threshold) {
    if (step < 1 || step > m.per_step.size())
        throw InputError(fmt::format("step {} outside 1..{}", step, m.per_step.size()));
    const StepMetrics& s = m.per_step[step - 1];
    return s.ncov >= threshold && s.iou >= threshold;
}

MeanCi mean_ci95(std::span<const double> values) {
    MeanCi r;
    const std::size_t n = values.size();
    if (n == 0) {
        r.mean = std::nan("");
        r.degenerate = true;
        return r;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(n);
    if (n < 2) {
        r.degenerate = true;
        return r;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(n));
    return r;
}

std::vector<StepAggregate> aggregate(std::span<const EpisodeMetrics> trials, double threshold, bool include_excluded) {
    if (trials.empty()) throw InputError("aggregate: no trials");
    const std::size_t steps = trials.front().per_step.size();
    for (const auto& t : trials)
        if (t.per_step.size() != steps) throw InputError("aggregate: trials have different padded lengths");

    std::vector<StepAggregate> out;
    for (std::size_t s = 1; s <= steps; ++s) {
        std::vector<double> nc, io;
        std::size_t successes = 0;
        for (const auto& t : trials) {
            const StepMetrics& m = t.per_step[s - 1];
            if (m.excluded && !include_excluded) continue;
            nc.push_back(m.ncov);
            io.push_back(m.iou);
            if (success_at(t, s, threshold)) ++successes;
        }
        StepAggregate a;
        a.step = s;
        a.n = nc.size();
        a.ncov = mean_ci95(nc);
        a.iou = mean_ci95(io);
        a.success_rate = a.n ? static_cast<double>(successes) / static_cast<double>(a.n) : 0.0;
        out.push_back(a);
    }
    return out;
}

std::string metrics_csv(std::span<const EpisodeMetrics> trials, double threshold) {
    std::string out = fmt::format("trial_id,step,ncov,iou,success@{},excluded\n", threshold);
    for (const auto& t : trials)
        for (std::size_t s = 1; s <= t.per_step.size(); ++s) {
            const StepMetrics& m = t.per_step[s - 1];
            out += fmt::format("{},{},{},{},{},{}\n", t.trial_id, s, m.ncov, m.iou,
                               success_at(t, s, threshold) ? 1 : 0, m.excluded ? "true" : "false");
        }
    return out;
}

std::string aggregate_csv(std::span<const StepAggregate> steps) {
    std::string out = "step,mean_ncov,ci95_ncov,mean_iou,ci95_iou,success_rate\n";
    for (const auto& a : steps)
        out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.4f}\n", a.step, a.ncov.mean, a.ncov.ci95, a.iou.mean,
                           a.iou.ci95, a.success_rate);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(field);
    }
    return out;
}

double parse_double(const std::string& s, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(fmt::format("line {}: '{}' is not a number", lineno, s));
    }
}

}  // namespace

std::vector<EpisodeMetrics> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("metrics CSV is empty");
    auto header = split_csv_line(line);
    int c_trial = -1, c_step = -1, c_ncov = -1, c_iou = -1, c_excl = -1;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        const auto& h = header[static_cast<std::size_t>(i)];
        if (h == "trial_id") c_trial = i;
        else if (h == "step") c_step = i;
        else if (h == "ncov") c_ncov = i;
        else if (h == "iou") c_iou = i;
        else if (h == "excluded") c_excl = i;
    }
    if (c_trial < 0 || c_step < 0 || c_ncov < 0 || c_iou < 0)
        throw DataError("metrics CSV header must contain trial_id, step, ncov, iou");

    std::vector<EpisodeMetrics> trials;
    std::map<std::string, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() < header.size()) throw DataError(fmt::format("line {}: expected {} fields", lineno, header.size()));
        const std::string& id = f[static_cast<std::size_t>(c_trial)];
        auto [it, inserted] = index.emplace(id, trials.size());
        if (inserted) trials.push_back(EpisodeMetrics{id, 0.0, {}});
        EpisodeMetrics& t = trials[it->second];
        const double step = parse_double(f[static_cast<std::size_t>(c_step)], lineno);
        if (step != static_cast<double>(t.per_step.size() + 1))
            throw DataError(fmt::format("line {}: trial {} steps out of order", lineno, id));
        StepMetrics m;
        m.ncov = parse_double(f[static_cast<std::size_t>(c_ncov)], lineno);
        m.iou = parse_double(f[static_cast<std::size_t>(c_iou)], lineno);
        if (c_excl >= 0) m.excluded = f[static_cast<std::size_t>(c_excl)] == "true";
        t.per_step.push_back(m);
    }
    return trials;
}

}  // namespace sis
