// Command-line front end: every pipeline stage as a batch subcommand over a
// run directory. Exit codes: 0 success, 1 bad input or missing prerequisite
// stage, 2 I/O or internal failure.

#include "groupsift/run.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

using groupsift::RunDir;
using groupsift::SimConfig;
using groupsift::StageOptions;
using nlohmann::json;

struct CommonArgs {
    std::string out_dir;
    std::string data_dir;
    bool serial = false;

    StageOptions options() const {
        StageOptions opt;
        opt.data_dir = data_dir;
        opt.mode = serial ? groupsift::ExecMode::serial : groupsift::ExecMode::parallel;
        return opt;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_data_dir = true) {
    cmd->add_option("--out", args.out_dir, "Run directory")->required();
    if (with_data_dir) {
        cmd->add_option("--data-dir", args.data_dir,
                        "Override the bundled stopword/boilerplate data directory");
    }
    cmd->add_flag("--serial", args.serial, "Run kernels on one thread");
}

void print_stage(const RunDir& run, const std::string& stage) {
    const auto it = run.manifest().stages.find(stage);
    if (it == run.manifest().stages.end()) return;
    std::cout << stage << ": ok (run " << run.manifest().run_id << ")\n";
    for (const auto& [rel, hash] : it->second.outputs) {
        std::cout << "  " << rel << "  sha256:" << hash.substr(0, 12) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"groupsift: campaign clustering and junk-sender detection over "
                 "anonymized group-messaging exports"};
    app.require_subcommand(1);

    // --- simulate -----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic corpus with truth");
    CommonArgs sim_args;
    add_common(sim_cmd, sim_args);
    std::string sim_config_path;
    SimConfig sim_cfg;
    std::uint64_t sim_seed = sim_cfg.seed;
    sim_cmd->add_option("--config", sim_config_path, "Simulator config JSON file");
    auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Simulator seed");
    std::size_t sim_users = 0, sim_groups = 0, sim_templates = 0, sim_variants = 0;
    double sim_junk_frac = -1.0;
    std::string sim_salt;
    auto* users_opt = sim_cmd->add_option("--users", sim_users, "Number of humans");
    auto* groups_opt = sim_cmd->add_option("--groups", sim_groups, "Number of groups");
    auto* templates_opt =
        sim_cmd->add_option("--templates", sim_templates, "Campaign templates");
    auto* variants_opt =
        sim_cmd->add_option("--variants", sim_variants, "Variants per template");
    auto* junk_opt =
        sim_cmd->add_option("--junk-frac", sim_junk_frac, "Junk-sender fraction of humans");
    auto* salt_opt = sim_cmd->add_option("--salt", sim_salt, "Anonymization salt");
    std::size_t sim_evasive = 0;
    auto* evasive_opt = sim_cmd->add_option(
        "--evasive", sim_evasive, "Junk senders whose seed phone is removed in two groups");

    // --- ingest ---------------------------------------------------------------
    auto* ingest_cmd = app.add_subcommand("ingest", "Anonymize and canonicalize raw records");
    CommonArgs ingest_args;
    add_common(ingest_cmd, ingest_args, false);
    std::string ingest_in, ingest_salt;
    ingest_cmd->add_option("--in", ingest_in,
                           "Raw record file (defaults to the simulate stage output)");
    ingest_cmd->add_option("--salt", ingest_salt,
                           "Anonymization salt (defaults to the run config's)");

    // --- filter ---------------------------------------------------------------
    auto* filter_cmd = app.add_subcommand("filter", "Tokenize and drop low-entropy messages");
    CommonArgs filter_args;
    add_common(filter_cmd, filter_args);

    // --- cluster ----------------------------------------------------------------
    auto* cluster_cmd = app.add_subcommand("cluster", "Near-duplicate campaign clustering");
    CommonArgs cluster_args;
    add_common(cluster_cmd, cluster_args, false);
    groupsift::ClusterParams cluster_params;
    cluster_cmd->add_option("--verify-jaccard", cluster_params.verify_jaccard,
                            "Exact-similarity floor for candidate pairs");
    cluster_cmd->add_option("--lsh-seed", cluster_params.lsh.seed, "MinHash seed");

    // --- signals ---------------------------------------------------------------
    auto* signals_cmd = app.add_subcommand("signals", "Per-message URL/phone signals");
    CommonArgs signals_args;
    add_common(signals_cmd, signals_args, false);
    std::string reputation_path;
    signals_cmd->add_option("--reputation", reputation_path,
                            "Offline domain-reputation map (TSV)");

    // --- label -------------------------------------------------------------------
    auto* label_cmd = app.add_subcommand("label", "Label clusters and issue sender verdicts");
    CommonArgs label_args;
    add_common(label_cmd, label_args);
    std::string threshold_text = "0.5";
    std::string review_path;
    label_cmd->add_option("--threshold", threshold_text,
                          "Junk-fraction verdict threshold (strict >)");
    label_cmd->add_option("--review", review_path, "Reviewer decision file (TSV)");

    // --- train -----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train content + metadata classifiers");
    CommonArgs train_args;
    add_common(train_cmd, train_args);
    std::string model_name = "rf";
    groupsift::TrainConfig train_cfg;
    double trees = 0;
    train_cmd->add_option("--model", model_name, "Classifier: rf or lr")
        ->check(CLI::IsMember({"rf", "lr"}));
    auto* trees_opt = train_cmd->add_option("--trees", trees, "Forest size");
    train_cmd->add_option("--folds", train_cfg.folds, "Cross-validation folds (<=1 disables)");
    train_cmd->add_option("--split", train_cfg.split, "Train fraction");
    train_cmd->add_option("--seed", train_cfg.seed, "Training seed");

    // --- evaluate / report / score ----------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate saved models on the held-out split");
    CommonArgs eval_args;
    add_common(eval_cmd, eval_args, false);
    auto* report_cmd = app.add_subcommand("report", "Emit the analytics TSV bundle");
    CommonArgs report_args;
    add_common(report_cmd, report_args, false);
    auto* score_cmd = app.add_subcommand("score", "Score the run against simulator truth");
    CommonArgs score_args;
    add_common(score_cmd, score_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            if (!sim_config_path.empty()) {
                sim_cfg = SimConfig::from_json(
                    json::parse(groupsift::read_file(sim_config_path)));
            }
            if (sim_seed_opt->count()) sim_cfg.seed = sim_seed;
            if (users_opt->count()) sim_cfg.n_users = sim_users;
            if (groups_opt->count()) sim_cfg.n_groups = sim_groups;
            if (templates_opt->count()) sim_cfg.campaign.templates = sim_templates;
            if (variants_opt->count()) sim_cfg.campaign.variants_per_template = sim_variants;
            if (junk_opt->count()) sim_cfg.junk_sender_fraction = sim_junk_frac;
            if (salt_opt->count()) sim_cfg.salt = sim_salt;
            if (evasive_opt->count()) sim_cfg.behavior.evasive_junk_senders = sim_evasive;
            RunDir run = RunDir::create(sim_args.out_dir, sim_cfg.to_json());
            groupsift::stage_simulate(run, sim_cfg, sim_args.options());
            print_stage(run, "simulate");
        } else if (ingest_cmd->parsed()) {
            RunDir run = [&] {
                try {
                    return RunDir::open(ingest_args.out_dir);
                } catch (const std::runtime_error&) {
                    if (ingest_in.empty() || ingest_salt.empty()) throw;
                    // A fresh run over external data: the salt is the config.
                    return RunDir::create(ingest_args.out_dir, json{{"salt", ingest_salt}});
                }
            }();
            groupsift::stage_ingest(run, ingest_in, ingest_salt, ingest_args.options());
            print_stage(run, "ingest");
        } else if (filter_cmd->parsed()) {
            RunDir run = RunDir::open(filter_args.out_dir);
            groupsift::stage_filter(run, filter_args.options());
            print_stage(run, "filter");
        } else if (cluster_cmd->parsed()) {
            RunDir run = RunDir::open(cluster_args.out_dir);
            groupsift::stage_cluster(run, cluster_params, cluster_args.options());
            print_stage(run, "cluster");
        } else if (signals_cmd->parsed()) {
            RunDir run = RunDir::open(signals_args.out_dir);
            groupsift::stage_signals(run, reputation_path, signals_args.options());
            print_stage(run, "signals");
        } else if (label_cmd->parsed()) {
            RunDir run = RunDir::open(label_args.out_dir);
            groupsift::stage_label(run, groupsift::VerdictParams::from_decimal(threshold_text),
                                   review_path, label_args.options());
            print_stage(run, "label");
        } else if (train_cmd->parsed()) {
            RunDir run = RunDir::open(train_args.out_dir);
            train_cfg.model = model_name == "lr" ? groupsift::ModelKind::logistic_regression
                                                 : groupsift::ModelKind::random_forest;
            if (trees_opt->count()) train_cfg.hyperparams["n_estimators"] = trees;
            groupsift::stage_train(run, train_cfg, train_args.options());
            print_stage(run, "train");
        } else if (eval_cmd->parsed()) {
            RunDir run = RunDir::open(eval_args.out_dir);
            groupsift::stage_evaluate(run, eval_args.options());
            print_stage(run, "evaluate");
        } else if (report_cmd->parsed()) {
            RunDir run = RunDir::open(report_args.out_dir);
            groupsift::stage_report(run, report_args.options());
            print_stage(run, "report");
        } else if (score_cmd->parsed()) {
            RunDir run = RunDir::open(score_args.out_dir);
            groupsift::stage_score(run, score_args.options());
            print_stage(run, "score");
        }
    } catch (const groupsift::MissingStage& e) {
        std::cerr << "error: " << e.what() << " (run that stage first)\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
