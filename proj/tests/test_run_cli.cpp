#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groupsift/run.hpp"
#include "groupsift/scoring.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace groupsift;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    return dir;
}

SimConfig chain_config() {
    SimConfig cfg;
    cfg.n_groups = 4;
    cfg.n_users = 60;
    cfg.junk_sender_fraction = 0.1;
    cfg.campaign.templates = 8;
    cfg.campaign.variants_per_template = 6;
    cfg.campaign.phones_per_campaign = 2;
    cfg.campaign.span_days = 10;
    cfg.campaign.groups_per_campaign = 2;
    cfg.horizon_days = 20;
    cfg.low_entropy_rate = 0.15;
    cfg.legit_messages_mean = 3.0;
    cfg.legit_groups_max = 2;
    cfg.seed = 11;
    return cfg;
}

void run_chain(const std::string& root, const SimConfig& cfg) {
    RunDir run = RunDir::create(root, cfg.to_json());
    stage_simulate(run, cfg);
    stage_ingest(run);
    stage_filter(run);
    stage_cluster(run);
    stage_signals(run);
    stage_label(run);
    stage_train(run);
    stage_evaluate(run);
    stage_report(run);
    stage_score(run);
}

// Runs the installed binary; returns its exit code with output captured to `log`.
int cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(GROUPSIFT_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

} // namespace

TEST_CASE("run directories persist and reload their manifest") {
    const fs::path root = fresh_dir("groupsift_rundir");
    const json config{{"salt", "s1"}, {"n_users", 12}};

    RunDir run = RunDir::create(root.string(), config);
    CHECK(run.manifest().run_id.size() == 12);
    CHECK(run.manifest().config == config);
    CHECK(fs::exists(root / "manifest.json"));

    // Creating again with the same config re-opens; a different config is a bug.
    RunDir again = RunDir::create(root.string(), config);
    CHECK(again.manifest().run_id == run.manifest().run_id);
    CHECK_THROWS_AS(RunDir::create(root.string(), json{{"salt", "other"}}),
                    std::invalid_argument);

    // Stage records round-trip through the on-disk manifest.
    write_file_atomic(run.path("demo/out.txt"), "payload\n");
    run.record_stage("demo", json{{"k", 1}}, {}, {"demo/out.txt"});
    RunDir reopened = RunDir::open(root.string());
    CHECK(reopened.has_stage("demo"));
    const StageRecord& rec = reopened.manifest().stages.at("demo");
    CHECK(rec.params == json{{"k", 1}});
    REQUIRE(rec.outputs.count("demo/out.txt"));
    CHECK(rec.outputs.at("demo/out.txt").size() == 64); // sha256 hex

    // Manifest JSON round-trip is loss-free.
    const RunManifest back = RunManifest::from_json(reopened.manifest().to_json());
    CHECK(back.to_json().dump() == reopened.manifest().to_json().dump());

    CHECK_THROWS_AS(RunDir::open(fresh_dir("groupsift_norun").string()), std::runtime_error);
    fs::remove_all(root);
}

TEST_CASE("missing prerequisites are reported by stage name") {
    const fs::path root = fresh_dir("groupsift_prereq");
    RunDir run = RunDir::create(root.string(), chain_config().to_json());

    CHECK(!run.has_stage("simulate"));
    try {
        run.require_stages({"simulate", "ingest"});
        FAIL("expected MissingStage");
    } catch (const MissingStage& e) {
        CHECK(e.stage_name == "simulate");
        CHECK(std::string(e.what()) == "requires: simulate");
    }

    // Ingest with no explicit input needs the simulate stage's stream.
    CHECK_THROWS_AS(stage_ingest(run), MissingStage);
    fs::remove_all(root);
}

TEST_CASE("file helpers round-trip bytes and fail loudly") {
    const fs::path root = fresh_dir("groupsift_files");
    const std::string path = (root / "nested" / "blob.bin").string();
    const std::string payload = std::string("line\n\ttab\0binary", 16);
    write_file_atomic(path, payload);
    CHECK(read_file(path) == payload);
    CHECK(!fs::exists(path + ".tmp")); // rename consumed the temp file
    CHECK_THROWS_AS(read_file((root / "absent").string()), std::runtime_error);
    fs::remove_all(root);
}

TEST_CASE("the full stage chain is reproducible byte for byte") {
    const fs::path root_a = fresh_dir("groupsift_chain_a");
    const fs::path root_b = fresh_dir("groupsift_chain_b");
    const SimConfig cfg = chain_config();
    run_chain(root_a.string(), cfg);
    run_chain(root_b.string(), cfg);

    RunDir run = RunDir::open(root_a.string());
    for (const char* stage : {"simulate", "ingest", "filter", "cluster", "signals", "label",
                              "train", "evaluate", "report", "score"}) {
        CAPTURE(stage);
        CHECK(run.has_stage(stage));
    }
    for (const char* rel :
         {"sim/corpus_raw.jsonl", "sim/truth.json", "ingest/corpus.jsonl",
          "cluster/clusters.jsonl", "label/verdicts.tsv", "score/scorecard.tsv"}) {
        CAPTURE(rel);
        CHECK(fs::exists(run.path(rel)));
    }

    // Same config, fresh directory: identical manifest bytes, hashes included.
    const std::string manifest_a = read_file((root_a / "manifest.json").string());
    const std::string manifest_b = read_file((root_b / "manifest.json").string());
    CHECK(manifest_a == manifest_b);

    // The recorded scorecard parses and scores the planted campaigns highly.
    const std::string scorecard = read_file(run.path("score/scorecard.tsv"));
    CHECK(scorecard.find("cluster_recall") != std::string::npos);
    CHECK(scorecard.find("verdict_precision") != std::string::npos);

    fs::remove_all(root_a);
    fs::remove_all(root_b);
}

TEST_CASE("stages can be re-run without changing the manifest") {
    const fs::path root = fresh_dir("groupsift_rerun");
    const SimConfig cfg = chain_config();
    RunDir run = RunDir::create(root.string(), cfg.to_json());
    stage_simulate(run, cfg);
    stage_ingest(run);
    stage_filter(run);
    const std::string before = read_file((root / "manifest.json").string());

    RunDir reopened = RunDir::open(root.string());
    stage_filter(reopened); // idempotent over identical inputs
    CHECK(read_file((root / "manifest.json").string()) == before);
    fs::remove_all(root);
}

// ---------------------------------------------------------------------------
// The installed binary, driven the way an operator would.
// ---------------------------------------------------------------------------

TEST_CASE("the command-line chain runs end to end and reports stage hashes") {
    const fs::path root = fresh_dir("groupsift_cli_run");
    const fs::path log = root / "cli.log";
    fs::create_directories(root);
    const std::string out = " --out " + (root / "run").string();

    CHECK(cli("simulate" + out +
                  " --users 60 --groups 4 --templates 8 --variants 6 --junk-frac 0.1 --seed 7",
              log) == 0);
    CHECK(read_file(log.string()).find("simulate: ok") != std::string::npos);
    for (const char* stage :
         {"ingest", "filter", "cluster", "signals", "label", "train", "evaluate", "report",
          "score"}) {
        CAPTURE(stage);
        CHECK(cli(std::string(stage) + out, log) == 0);
        CHECK(read_file(log.string()).find(std::string(stage) + ": ok") != std::string::npos);
    }
    CHECK(fs::exists(root / "run" / "score" / "scorecard.tsv"));
    fs::remove_all(root);
}

TEST_CASE("the binary distinguishes user errors from missing directories") {
    const fs::path root = fresh_dir("groupsift_cli_err");
    const fs::path log = root / "cli.log";
    fs::create_directories(root);

    // No run directory at all: an I/O failure, not a usage error.
    CHECK(cli("cluster --out " + (root / "nothing").string(), log) == 2);

    // Skipping prerequisites is a usage error that names the missing stage.
    const std::string out = " --out " + (root / "run").string();
    CHECK(cli("simulate" + out + " --users 60 --groups 4 --templates 8 --seed 7", log) == 0);
    CHECK(cli("ingest" + out, log) == 0);
    CHECK(cli("train" + out, log) == 1);
    CHECK(read_file(log.string()).find("requires:") != std::string::npos);

    // Unknown subcommands never reach the pipeline.
    CHECK(cli("defragment" + out, log) != 0);
    fs::remove_all(root);
}
