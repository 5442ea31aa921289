#pragma once

// Batch-run orchestration: a run directory holds every stage's inputs and
// outputs plus a manifest recording parameters and content hashes. Manifests
// carry no timestamps or absolute paths, so two runs of the same pipeline on
// the same inputs produce byte-identical manifests wherever they execute.

#include "groupsift/dedup.hpp"
#include "groupsift/labeling.hpp"
#include "groupsift/model.hpp"
#include "groupsift/simgen.hpp"
#include "groupsift/util/parallel.hpp"

#include <json.hpp> // manifests hold json values, so the full type is needed

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace groupsift {

struct StageRecord {
    nlohmann::json params;                      // parameters the stage ran with
    std::map<std::string, std::string> inputs;  // run-relative path -> sha256
    std::map<std::string, std::string> outputs; // run-relative path -> sha256
};

struct RunManifest {
    std::string run_id; // first 12 hex chars of sha256(canonical config dump)
    std::string tool_version;
    nlohmann::json config;
    std::map<std::string, StageRecord> stages;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Thrown when a stage's prerequisite has not been recorded in the manifest.
struct MissingStage : std::runtime_error {
    explicit MissingStage(const std::string& stage)
        : std::runtime_error("requires: " + stage), stage_name(stage) {}
    std::string stage_name;
};

class RunDir {
public:
    /// Start (or re-open) a run rooted at `root`. If a manifest already
    /// exists it is loaded and `config` must match the recorded one; a fresh
    /// directory gets a new manifest with run_id derived from the config.
    static RunDir create(const std::string& root, const nlohmann::json& config);

    /// Re-open an existing run; throws std::runtime_error if there is none.
    static RunDir open(const std::string& root);

    const std::string& root() const { return root_; }
    const RunManifest& manifest() const { return manifest_; }

    /// Absolute path of a run-relative file.
    std::string path(const std::string& rel) const;

    bool has_stage(const std::string& name) const;
    /// Throws MissingStage for the first prerequisite not yet recorded.
    void require_stages(const std::vector<std::string>& names) const;

    /// Hash the listed files and persist the stage into the manifest
    /// (atomic tmp+rename write of manifest.json). Paths are run-relative.
    void record_stage(const std::string& name, nlohmann::json params,
                      const std::vector<std::string>& input_files,
                      const std::vector<std::string>& output_files);

private:
    RunDir(std::string root, RunManifest manifest);
    void save() const;

    std::string root_;
    RunManifest manifest_;
};

struct StageOptions {
    std::string data_dir;                 // empty -> bundled default
    ExecMode mode = ExecMode::parallel;
};

// Each stage loads what it needs from the run directory, writes its output
// files under a directory named after the stage, and records itself in the
// manifest. Prerequisites are enforced via MissingStage.

void stage_simulate(RunDir& run, const SimConfig& cfg, const StageOptions& opt = {});

/// `input_path` empty means "the simulate stage's raw stream"; `salt` empty
/// falls back to the salt recorded in the run config.
void stage_ingest(RunDir& run, const std::string& input_path = "",
                  const std::string& salt = "", const StageOptions& opt = {});

void stage_filter(RunDir& run, const StageOptions& opt = {});

void stage_cluster(RunDir& run, const ClusterParams& params = {},
                   const StageOptions& opt = {});

/// `reputation_path` empty uses the simulate stage's offline map when present;
/// URLs stay uncategorized when no map is available at all.
void stage_signals(RunDir& run, const std::string& reputation_path = "",
                   const StageOptions& opt = {});

void stage_label(RunDir& run, const VerdictParams& verdict = {},
                 const std::string& review_path = "", const StageOptions& opt = {});

void stage_train(RunDir& run, const TrainConfig& cfg = {}, const StageOptions& opt = {});

void stage_evaluate(RunDir& run, const StageOptions& opt = {});

void stage_report(RunDir& run, const StageOptions& opt = {});

void stage_score(RunDir& run, const StageOptions& opt = {});

// Shared file helpers (also used by tests).
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace groupsift
