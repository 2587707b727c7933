#include "cli.hpp"

#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sis/errors.hpp"
#include "sis/harness.hpp"

#ifndef SIS_DATA_DIR
#define SIS_DATA_DIR "data"
#endif

namespace sis::cli {

namespace {

namespace fs = std::filesystem;

std::string data_path(const char* name) { return (fs::path(SIS_DATA_DIR) / name).string(); }

struct RunArgs {
    std::string mode;
    int trials = 0;
    std::uint64_t seed = 0;
    std::string config;
    std::string out = "out";
    std::string matrix_in;
    std::string init_matrix = data_path("matrix_init.json");
    std::string garment = data_path("garment_tshirt_v1.json");
    bool include_failures = false;
};

int cmd_run(const RunArgs& a, const CLI::App& sub, std::ostream& out) {
    ExperimentConfig cfg;
    if (!a.config.empty()) {
        if (!fs::exists(a.config)) throw InputError(fmt::format("{}: config file not found", a.config));
        cfg = experiment_config_from_json(jsonl::read_file(a.config), cfg);
    }
    if (sub.count("--mode")) cfg.mode = ablation_mode_from_string(a.mode);
    if (sub.count("--trials")) cfg.n_trials = a.trials;
    if (sub.count("--seed")) cfg.seed = a.seed;
    if (sub.count("--include-failures")) cfg.include_failures = a.include_failures;
    validate(cfg);

    const GarmentModel model = GarmentModel::load(a.garment);
    Matrices m;
    if (!a.matrix_in.empty()) {
        m.nint = load_matrix((fs::path(a.matrix_in) / "matrix_nint.json").string());
        m.int_ = load_matrix((fs::path(a.matrix_in) / "matrix_int.json").string());
        if (cfg.mode == AblationMode::ab_mi) {
            const DecisionMatrix init = load_matrix(a.init_matrix);
            m.nint = Matrices::from_init(init).nint;
        }
    } else {
        m = Matrices::from_init(load_matrix(a.init_matrix));
    }
    if (m.nint.t_max() != cfg.t_max || m.int_.t_max() != cfg.t_max)
        throw InputError(fmt::format("matrix T_max {} does not match configured T_max {}", m.nint.t_max(), cfg.t_max));

    GarmentSim sim(model, cfg.sim);
    const ExperimentResult result = run_experiment(sim, std::move(m), cfg);
    write_experiment_outputs(a.out, result, cfg);
    jsonl::write_file((fs::path(a.out) / "config.json").string(), experiment_config_to_json(cfg));
    out << make_report(result.trials, cfg.success_threshold, cfg.include_failures).table;
    out << fmt::format("outputs written to {}\n", a.out);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Seam-informed garment unfolding: matrices, experiments, reports"};
    app.require_subcommand(1);

    // init-matrix
    std::string demo_path, init_out;
    int init_tmax = 5;
    auto* init = app.add_subcommand("init-matrix", "Build the initial decision matrix from a demonstration log");
    init->add_option("demo", demo_path, "Demonstration trials (JSONL)")->required();
    init->add_option("--out", init_out, "Write the matrix here instead of stdout");
    init->add_option("--t-max", init_tmax, "Horizon used for padding")->check(CLI::PositiveNumber);

    // run
    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Run seeded unfolding trials");
    run_cmd->add_option("--mode", ra.mode, "sis, ab-dm, ab-si or ab-mi");
    run_cmd->add_option("--trials", ra.trials, "Number of trials");
    run_cmd->add_option("--seed", ra.seed, "Experiment seed");
    run_cmd->add_option("--config", ra.config, "JSON config file; flags override it");
    run_cmd->add_option("--out", ra.out, "Output directory")->capture_default_str();
    run_cmd->add_option("--matrix-in", ra.matrix_in, "Directory with matrix_nint.json and matrix_int.json");
    run_cmd->add_option("--init-matrix", ra.init_matrix, "Initial matrix")->capture_default_str();
    run_cmd->add_option("--garment", ra.garment, "Garment model")->capture_default_str();
    run_cmd->add_flag("--include-failures", ra.include_failures, "Keep grasp misses in aggregates");

    // report
    std::string report_in, report_out;
    double report_thr = kSuccessThreshold;
    bool report_fail = false;
    auto* report = app.add_subcommand("report", "Aggregate a per-step metrics CSV");
    report->add_option("logs", report_in, "metrics.csv")->required();
    report->add_option("--threshold", report_thr, "Success threshold")->capture_default_str();
    report->add_flag("--include-failures", report_fail, "Keep excluded steps");
    report->add_option("--out", report_out, "Also write the aggregate CSV here");

    // demo
    std::string demo_out;
    DemoConfig dc;
    std::string demo_garment = data_path("garment_tshirt_v1.json");
    auto* demo = app.add_subcommand("demo", "Generate synthetic demonstration trials");
    demo->add_option("--out", demo_out, "Output JSONL")->required();
    demo->add_option("--seed", dc.seed, "Seed")->capture_default_str();
    demo->add_option("--trials-per-cell", dc.trials_per_cell, "Trials per combination")->capture_default_str();
    demo->add_option("--garment", demo_garment, "Garment model")->capture_default_str();

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*init) {
            IngestResult r = ingest_demo_log(demo_path, init_tmax);
            for (const auto& w : r.warnings) err << "warning: " << w << "\n";
            if (init_out.empty())
                out << matrix_to_json(r.matrix);
            else
                save_matrix(init_out, r.matrix);
        } else if (*run_cmd) {
            return cmd_run(ra, *run_cmd, out);
        } else if (*report) {
            const auto trials = parse_metrics_csv(jsonl::read_file(report_in));
            const Report r = make_report(trials, report_thr, report_fail);
            out << r.table;
            if (!report_out.empty()) jsonl::write_file(report_out, r.csv);
        } else if (*demo) {
            const auto records = generate_demonstrations(GarmentModel::load(demo_garment), dc);
            write_trial_log(demo_out, records);
            out << fmt::format("{} demonstration trials written to {}\n", records.size(), demo_out);
        }
    } catch (const InputError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

}  // namespace sis::cli
