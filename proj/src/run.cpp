#include "groupsift/run.hpp"

#include "groupsift/analytics.hpp"
#include "groupsift/corpus.hpp"
#include "groupsift/detect.hpp"
#include "groupsift/pergroup.hpp"
#include "groupsift/scoring.hpp"
#include "groupsift/signals.hpp"
#include "groupsift/textprep.hpp"
#include "groupsift/util/hash.hpp"
#include "groupsift/util/urlscan.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace groupsift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";

#ifdef GROUPSIFT_VERSION
constexpr const char* kToolVersion = GROUPSIFT_VERSION;
#else
constexpr const char* kToolVersion = "0.0.0";
#endif

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

std::vector<std::vector<std::string>> read_tsv_body(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) { // every bundled TSV starts with a column-name row
            header = false;
            continue;
        }
        if (!line.empty()) rows.push_back(split_tabs(line));
    }
    return rows;
}

Lang lang_from_name(const std::string& name) {
    for (Lang l : {Lang::hi, Lang::en, Lang::te, Lang::ta, Lang::other}) {
        if (name == lang_name(l)) return l;
    }
    throw std::runtime_error("unknown language tag: " + name);
}

LabelSource label_source_from_name(const std::string& name) {
    for (LabelSource s :
         {LabelSource::seed_manual, LabelSource::dictionary_candidate, LabelSource::external}) {
        if (name == label_source_name(s)) return s;
    }
    throw std::runtime_error("unknown label source: " + name);
}

UserRef user_from_key(const std::string& key) {
    const std::size_t colon = key.find(':');
    if (colon == std::string::npos) throw std::runtime_error("malformed user key: " + key);
    UserRef u;
    u.country_code = key.substr(0, colon);
    u.digest = key.substr(colon + 1);
    return u;
}

// ---------------------------------------------------------------------------
// Loaders over the staged files. Every loader validates just enough to catch
// a run directory whose stages were produced by different pipelines.
// ---------------------------------------------------------------------------

Corpus load_corpus(const RunDir& run) {
    // The canonical corpus stores senders as {cc,digest}, so the salt used
    // here is irrelevant; a raw sender in this file would be a pipeline bug.
    IngestResult res = ingest_file(run.path("ingest/corpus.jsonl"), Anonymizer("canonical"));
    if (!res.errors.empty()) {
        throw std::runtime_error("ingest/corpus.jsonl is not canonical: line " +
                                 std::to_string(res.errors.front().line_no) + ": " +
                                 res.errors.front().reason);
    }
    return std::move(res.corpus);
}

std::vector<TokenizedMessage> load_kept(const RunDir& run) {
    std::ifstream in(run.path("filter/kept.jsonl"));
    if (!in) throw std::runtime_error("cannot open: " + run.path("filter/kept.jsonl"));
    std::vector<TokenizedMessage> kept;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        TokenizedMessage tm;
        tm.msg_id = j.at("id").get<std::string>();
        tm.language = lang_from_name(j.at("lang").get<std::string>());
        tm.tokens = j.at("tokens").get<std::vector<std::string>>();
        kept.push_back(std::move(tm));
    }
    return kept;
}

std::vector<MessageCluster> load_clusters(const RunDir& run) {
    std::ifstream in(run.path("cluster/clusters.jsonl"));
    if (!in) throw std::runtime_error("cannot open: " + run.path("cluster/clusters.jsonl"));
    std::vector<MessageCluster> clusters;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        MessageCluster c;
        c.cluster_id = j.at("cluster_id").get<std::string>();
        c.member_msg_ids = j.at("members").get<std::vector<std::string>>();
        c.representative_text = j.at("representative").get<std::string>();
        for (const auto& [day, count] : j.at("daily").items()) {
            c.daily_counts[std::stoll(day)] = count.get<std::uint64_t>();
        }
        for (const json& g : j.at("groups")) c.group_ids.insert(g.get<std::string>());
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::unordered_map<std::string, std::string> load_assignments(const RunDir& run) {
    std::unordered_map<std::string, std::string> out;
    for (const auto& row : read_tsv_body(run.path("cluster/assignments.tsv"))) {
        if (row.size() != 2) throw std::runtime_error("malformed assignments.tsv row");
        out.emplace(row[0], row[1]);
    }
    return out;
}

std::vector<ContentSignal> load_signals(const RunDir& run, const Corpus& corpus) {
    const auto rows = read_tsv_body(run.path("signals/message_signals.tsv"));
    if (rows.size() != corpus.messages.size()) {
        throw std::runtime_error("message_signals.tsv does not match the corpus");
    }
    std::vector<ContentSignal> signals(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 3 || rows[i][0] != corpus.messages[i].msg_id) {
            throw std::runtime_error("message_signals.tsv row " + std::to_string(i + 2) +
                                     " is out of step with the corpus");
        }
        signals[i] = {rows[i][1] == "1", rows[i][2] == "1"};
    }
    return signals;
}

std::vector<LabeledCluster> load_labels(const RunDir& run) {
    std::vector<LabeledCluster> labels;
    for (const auto& row : read_tsv_body(run.path("label/cluster_labels.tsv"))) {
        if (row.size() != 3) throw std::runtime_error("malformed cluster_labels.tsv row");
        labels.push_back({row[0], row[1] == "junk",
                          label_source_from_name(row[2])});
    }
    return labels;
}

std::vector<SenderVerdict> load_verdicts(const RunDir& run) {
    std::vector<SenderVerdict> verdicts;
    for (const auto& row : read_tsv_body(run.path("label/verdicts.tsv"))) {
        if (row.size() != 6) throw std::runtime_error("malformed verdicts.tsv row");
        SenderVerdict v;
        v.user = user_from_key(row[0]);
        if (v.user.country_code != row[1]) {
            throw std::runtime_error("verdicts.tsv country column disagrees with the key");
        }
        v.total_messages = std::stoull(row[2]);
        v.junk_messages = std::stoull(row[3]);
        v.junk_fraction = std::stod(row[4]);
        v.is_junk_sender = row[5] == "1";
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

GroundTruth load_truth(const RunDir& run) {
    return GroundTruth::from_json(json::parse(read_file(run.path("sim/truth.json"))));
}

std::string salt_from_config(const json& config) {
    if (config.is_object() && config.contains("salt") && config.at("salt").is_string()) {
        return config.at("salt").get<std::string>();
    }
    return "";
}

std::vector<MetadataProfile> profiles_for_run(const Corpus& corpus,
                                              std::span<const ContentSignal> signals) {
    ProfileOptions opts;
    opts.scope = ProfileScope::global;
    return build_profiles(corpus, signals, opts);
}

std::vector<int> removed_labels(std::span<const MetadataProfile> profiles) {
    std::vector<int> y;
    y.reserve(profiles.size());
    for (const MetadataProfile& p : profiles) y.push_back(p.removed >= 1 ? 1 : 0);
    return y;
}

json eval_to_json(const EvalReport& r) {
    return json{{"tp", r.tp},           {"fn", r.fn},
                {"fp", r.fp},           {"tn", r.tn},
                {"accuracy", r.accuracy}, {"precision", r.precision},
                {"recall", r.recall},   {"f1", r.f1}};
}

std::string eval_tsv_row(const std::string& name, const EvalReport& r) {
    return name + "\t" + std::to_string(r.tp) + "\t" + std::to_string(r.fn) + "\t" +
           std::to_string(r.fp) + "\t" + std::to_string(r.tn) + "\t" + fmt6(r.accuracy) +
           "\t" + fmt6(r.precision) + "\t" + fmt6(r.recall) + "\t" + fmt6(r.f1);
}

} // namespace

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read failed: " + path);
    return std::move(buf).str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Manifest / run directory
// ---------------------------------------------------------------------------

json RunManifest::to_json() const {
    json jstages = json::object();
    for (const auto& [name, record] : stages) {
        jstages[name] = json{{"params", record.params},
                             {"inputs", record.inputs},
                             {"outputs", record.outputs}};
    }
    return json{{"run_id", run_id},
                {"tool_version", tool_version},
                {"config", config},
                {"stages", std::move(jstages)}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    for (const auto& [name, jrec] : j.at("stages").items()) {
        StageRecord rec;
        rec.params = jrec.at("params");
        rec.inputs = jrec.at("inputs").get<std::map<std::string, std::string>>();
        rec.outputs = jrec.at("outputs").get<std::map<std::string, std::string>>();
        m.stages.emplace(name, std::move(rec));
    }
    return m;
}

RunDir::RunDir(std::string root, RunManifest manifest)
    : root_(std::move(root)), manifest_(std::move(manifest)) {}

RunDir RunDir::create(const std::string& root, const json& config) {
    fs::create_directories(root);
    const fs::path manifest_path = fs::path(root) / kManifestFile;
    if (fs::exists(manifest_path)) {
        RunDir run = open(root);
        if (run.manifest_.config != config) {
            throw std::invalid_argument("run directory already holds a different config: " +
                                        root);
        }
        return run;
    }
    RunManifest m;
    m.config = config;
    m.tool_version = kToolVersion;
    m.run_id = util::sha256_hex(config.dump()).substr(0, 12);
    RunDir run(root, std::move(m));
    run.save();
    return run;
}

RunDir RunDir::open(const std::string& root) {
    const fs::path manifest_path = fs::path(root) / kManifestFile;
    if (!fs::exists(manifest_path)) {
        throw std::runtime_error("no manifest in run directory: " + root);
    }
    return RunDir(root, RunManifest::from_json(json::parse(read_file(manifest_path.string()))));
}

std::string RunDir::path(const std::string& rel) const {
    return (fs::path(root_) / rel).string();
}

bool RunDir::has_stage(const std::string& name) const {
    return manifest_.stages.count(name) > 0;
}

void RunDir::require_stages(const std::vector<std::string>& names) const {
    for (const std::string& name : names) {
        if (!has_stage(name)) throw MissingStage(name);
    }
}

void RunDir::record_stage(const std::string& name, json params,
                          const std::vector<std::string>& input_files,
                          const std::vector<std::string>& output_files) {
    StageRecord rec;
    rec.params = std::move(params);
    for (const std::string& rel : input_files) rec.inputs[rel] = util::sha256_hex(read_file(path(rel)));
    for (const std::string& rel : output_files) rec.outputs[rel] = util::sha256_hex(read_file(path(rel)));
    manifest_.stages[name] = std::move(rec);
    save();
}

void RunDir::save() const {
    write_file_atomic(path(kManifestFile), manifest_.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

void stage_simulate(RunDir& run, const SimConfig& cfg, const StageOptions& opt) {
    SimResult result = generate(cfg, opt.data_dir);

    fs::create_directories(run.path("sim"));
    write_lines(result.raw_lines, run.path("sim/corpus_raw.jsonl"));
    write_file_atomic(run.path("sim/truth.json"), result.truth.to_json().dump(2) + "\n");
    write_lines(result.reputation_lines, run.path("sim/reputation.tsv"));
    write_file_atomic(run.path("sim/sim_config.json"), cfg.to_json().dump(2) + "\n");

    run.record_stage("simulate", cfg.to_json(), {},
                     {"sim/corpus_raw.jsonl", "sim/truth.json", "sim/reputation.tsv",
                      "sim/sim_config.json"});
}

void stage_ingest(RunDir& run, const std::string& input_path, const std::string& salt,
                  const StageOptions&) {
    std::string in_rel;
    std::string in_abs = input_path;
    if (input_path.empty()) {
        run.require_stages({"simulate"});
        in_rel = "sim/corpus_raw.jsonl";
        in_abs = run.path(in_rel);
    } else if (fs::path(input_path).is_relative() && fs::exists(run.path(input_path))) {
        in_rel = input_path;
        in_abs = run.path(input_path);
    }

    std::string effective_salt = salt.empty() ? salt_from_config(run.manifest().config) : salt;
    if (effective_salt.empty()) {
        throw std::invalid_argument(
            "ingest: no salt given and the run config does not carry one");
    }

    const Anonymizer anon(effective_salt);
    IngestResult result = ingest_file(in_abs, anon);

    fs::create_directories(run.path("ingest"));
    write_corpus_file(result.corpus, run.path("ingest/corpus.jsonl"));
    std::string errors = "line\tfield\treason\n";
    for (const IngestError& e : result.errors) {
        errors += std::to_string(e.line_no) + "\t" + e.field + "\t" + e.reason + "\n";
    }
    write_file_atomic(run.path("ingest/ingest_errors.tsv"), errors);

    json params{{"messages", result.corpus.messages.size()},
                {"events", result.corpus.events.size()},
                {"errors", result.errors.size()},
                {"input", in_rel.empty() ? fs::path(in_abs).filename().string() : in_rel}};
    std::vector<std::string> inputs;
    if (!in_rel.empty()) inputs.push_back(in_rel);
    run.record_stage("ingest", std::move(params), inputs,
                     {"ingest/corpus.jsonl", "ingest/ingest_errors.tsv"});
}

void stage_filter(RunDir& run, const StageOptions& opt) {
    run.require_stages({"ingest"});
    const Corpus corpus = load_corpus(run);
    const std::string data_dir = opt.data_dir.empty() ? default_data_dir() : opt.data_dir;
    const FilterConfig cfg = FilterConfig::load(data_dir);
    FilterResult result = filter_corpus(corpus, cfg, opt.mode);

    fs::create_directories(run.path("filter"));
    {
        std::vector<std::string> lines;
        lines.reserve(result.kept.size());
        for (const TokenizedMessage& tm : result.kept) {
            lines.push_back(json{{"id", tm.msg_id},
                                 {"lang", std::string(lang_name(tm.language))},
                                 {"tokens", tm.tokens}}
                                .dump());
        }
        write_lines(lines, run.path("filter/kept.jsonl"));
    }
    const FilterStats& s = result.stats;
    std::string stats = "category\tcount\n";
    stats += "total\t" + std::to_string(s.total) + "\n";
    stats += "kept\t" + std::to_string(s.kept) + "\n";
    stats += "dropped_url_only\t" + std::to_string(s.dropped_url_only) + "\n";
    stats += "dropped_emoji_only\t" + std::to_string(s.dropped_emoji_only) + "\n";
    stats += "dropped_boilerplate\t" + std::to_string(s.dropped_boilerplate) + "\n";
    stats += "dropped_language\t" + std::to_string(s.dropped_language) + "\n";
    stats += "dropped_too_short\t" + std::to_string(s.dropped_too_short) + "\n";
    write_file_atomic(run.path("filter/filter_stats.tsv"), stats);

    run.record_stage("filter",
                     json{{"min_tokens", cfg.min_tokens}, {"kept", s.kept}, {"total", s.total}},
                     {"ingest/corpus.jsonl"},
                     {"filter/kept.jsonl", "filter/filter_stats.tsv"});
}

void stage_cluster(RunDir& run, const ClusterParams& params, const StageOptions& opt) {
    run.require_stages({"ingest", "filter"});
    const Corpus corpus = load_corpus(run);
    const std::vector<TokenizedMessage> kept = load_kept(run);

    std::unordered_map<std::string, const Message*> by_id;
    for (const Message& m : corpus.messages) by_id.emplace(m.msg_id, &m);

    std::vector<ClusterInput> inputs;
    inputs.reserve(kept.size());
    for (const TokenizedMessage& tm : kept) {
        auto it = by_id.find(tm.msg_id);
        if (it == by_id.end()) {
            throw std::runtime_error("filter/kept.jsonl references unknown message " +
                                     tm.msg_id);
        }
        const Message& m = *it->second;
        inputs.push_back({m.msg_id, m.group_id, m.sender.key(), m.timestamp, m.text,
                          tm.tokens});
    }

    const std::vector<MessageCluster> clusters = build_clusters(inputs, params, opt.mode);

    fs::create_directories(run.path("cluster"));
    {
        std::vector<std::string> lines;
        lines.reserve(clusters.size());
        for (const MessageCluster& c : clusters) {
            json daily = json::object();
            for (const auto& [day, count] : c.daily_counts) {
                daily[std::to_string(day)] = count;
            }
            lines.push_back(json{{"cluster_id", c.cluster_id},
                                 {"members", c.member_msg_ids},
                                 {"representative", c.representative_text},
                                 {"daily", std::move(daily)},
                                 {"groups", c.group_ids}}
                                .dump());
        }
        write_lines(lines, run.path("cluster/clusters.jsonl"));
    }
    {
        std::string rows = "msg_id\tcluster_id\n";
        for (const MessageCluster& c : clusters) {
            for (const std::string& id : c.member_msg_ids) {
                rows += id + "\t" + c.cluster_id + "\n";
            }
        }
        write_file_atomic(run.path("cluster/assignments.tsv"), rows);
    }

    run.record_stage("cluster",
                     json{{"bands", params.lsh.bands},
                          {"rows_per_band", params.lsh.rows_per_band},
                          {"lsh_seed", params.lsh.seed},
                          {"verify_jaccard", params.verify_jaccard},
                          {"clusters", clusters.size()}},
                     {"ingest/corpus.jsonl", "filter/kept.jsonl"},
                     {"cluster/clusters.jsonl", "cluster/assignments.tsv"});
}

void stage_signals(RunDir& run, const std::string& reputation_path, const StageOptions& opt) {
    run.require_stages({"ingest"});
    const Corpus corpus = load_corpus(run);
    const std::vector<ContentSignal> signals = encode_signals(corpus.messages, opt.mode);

    fs::create_directories(run.path("signals"));
    {
        std::string rows = "msg_id\thas_url\thas_phone\n";
        for (std::size_t i = 0; i < corpus.messages.size(); ++i) {
            rows += corpus.messages[i].msg_id;
            rows += signals[i].has_url ? "\t1" : "\t0";
            rows += signals[i].has_phone ? "\t1\n" : "\t0\n";
        }
        write_file_atomic(run.path("signals/message_signals.tsv"), rows);
    }

    std::vector<UrlRecord> records;
    for (const Message& m : corpus.messages) {
        for (UrlRecord& r : extract_urls(m.text)) records.push_back(std::move(r));
    }

    std::string rep = reputation_path;
    if (rep.empty() && run.has_stage("simulate")) rep = run.path("sim/reputation.tsv");
    bool categorized = false;
    if (!rep.empty() && fs::exists(rep)) {
        OfflineReputationMap map = OfflineReputationMap::load(rep);
        categorize_urls(records, map);
        categorized = true;
    }

    {
        std::vector<std::string> lines;
        lines.reserve(records.size());
        for (const UrlRecord& r : records) {
            json j{{"raw", r.raw}, {"domain", r.domain}};
            if (r.category) j["category"] = *r.category;
            if (r.engines_flagged) j["engines"] = *r.engines_flagged;
            lines.push_back(j.dump());
        }
        write_lines(lines, run.path("signals/url_records.jsonl"));
    }
    {
        const MaliciousnessBuckets b = maliciousness_buckets(records);
        std::string rows = "bucket\tcount\n";
        rows += "flagged_3plus\t" + std::to_string(b.flagged_3plus) + "\n";
        rows += "flagged_9plus\t" + std::to_string(b.flagged_9plus) + "\n";
        rows += "clean\t" + std::to_string(b.clean) + "\n";
        write_file_atomic(run.path("signals/url_buckets.tsv"), rows);
    }

    run.record_stage("signals",
                     json{{"urls", records.size()}, {"reputation", categorized}},
                     {"ingest/corpus.jsonl"},
                     {"signals/message_signals.tsv", "signals/url_records.jsonl",
                      "signals/url_buckets.tsv"});
}

void stage_label(RunDir& run, const VerdictParams& verdict, const std::string& review_path,
                 const StageOptions& opt) {
    run.require_stages({"ingest", "filter", "cluster"});
    const Corpus corpus = load_corpus(run);
    const std::vector<TokenizedMessage> kept = load_kept(run);
    const std::vector<MessageCluster> clusters = load_clusters(run);
    const auto msg_to_cluster = load_assignments(run);
    const std::string data_dir = opt.data_dir.empty() ? default_data_dir() : opt.data_dir;

    const std::set<UserRef> seeds = seed_users(corpus.events);
    std::unordered_map<std::string, std::string> msg_to_sender;
    for (const Message& m : corpus.messages) msg_to_sender.emplace(m.msg_id, m.sender.key());

    const std::vector<LabeledCluster> seed_labels = seed_label(clusters, seeds, msg_to_sender);

    std::unordered_map<std::string, const TokenizedMessage*> tokens_by_msg;
    for (const TokenizedMessage& tm : kept) tokens_by_msg.emplace(tm.msg_id, &tm);

    // Dictionary built from the messages inside seed-labeled junk clusters.
    // Tokens come from URL-stripped text: link mechanics (scheme words, domain
    // fragments) would otherwise dominate the dictionary and flag any cluster
    // whose members merely carry a link.
    std::set<std::string> seed_junk_ids;
    for (const LabeledCluster& l : seed_labels) {
        if (l.junk) seed_junk_ids.insert(l.cluster_id);
    }
    std::unordered_map<std::string, const Message*> msg_by_id;
    for (const Message& m : corpus.messages) msg_by_id.emplace(m.msg_id, &m);
    std::vector<TokenizedMessage> junk_messages;
    for (const MessageCluster& c : clusters) {
        if (!seed_junk_ids.count(c.cluster_id)) continue;
        for (const std::string& id : c.member_msg_ids) {
            auto it = tokens_by_msg.find(id);
            auto mit = msg_by_id.find(id);
            if (it == tokens_by_msg.end() || mit == msg_by_id.end()) continue;
            const std::string& text = mit->second->text;
            junk_messages.push_back(
                {id, tokenize(util::strip_urls(text, util::scan_urls(text))),
                 it->second->language});
        }
    }

    JunkDictionary dict;
    std::vector<LabeledCluster> dict_labels;
    if (!junk_messages.empty()) {
        const StopwordTable stopwords = StopwordTable::load(data_dir);
        dict = build_dictionary(junk_messages, stopwords);
        dict_labels = dictionary_label(clusters, dict, tokens_by_msg);
    }

    std::vector<LabeledCluster> labels = merge_labels(seed_labels, dict_labels);
    if (!review_path.empty()) {
        apply_review(labels, load_review_file(review_path));
    }

    const std::vector<SenderVerdict> verdicts =
        sender_verdicts(corpus.messages, msg_to_cluster, labels, verdict);

    fs::create_directories(run.path("label"));
    {
        std::string rows = "user_key\n";
        for (const UserRef& u : seeds) rows += u.key() + "\n";
        write_file_atomic(run.path("label/seeds.tsv"), rows);
    }
    {
        std::string words;
        for (const std::string& w : dict.words) words += w + "\n";
        write_file_atomic(run.path("label/dictionary.txt"), words);
    }
    {
        std::string rows = "cluster_id\tlabel\tsource\n";
        for (const LabeledCluster& l : labels) {
            rows += l.cluster_id;
            rows += l.junk ? "\tjunk\t" : "\tnon_junk\t";
            rows += std::string(label_source_name(l.source)) + "\n";
        }
        write_file_atomic(run.path("label/cluster_labels.tsv"), rows);
    }
    {
        std::string rows = "user_key\tcountry\ttotal\tjunk\tfraction\tis_junk\n";
        for (const SenderVerdict& v : verdicts) {
            rows += v.user.key() + "\t" + v.user.country_code + "\t" +
                    std::to_string(v.total_messages) + "\t" + std::to_string(v.junk_messages) +
                    "\t" + fmt6(v.junk_fraction) + (v.is_junk_sender ? "\t1\n" : "\t0\n");
        }
        write_file_atomic(run.path("label/verdicts.tsv"), rows);
    }

    run.record_stage(
        "label",
        json{{"threshold_num", verdict.threshold_num},
             {"threshold_den", verdict.threshold_den},
             {"seed_users", seeds.size()},
             {"dictionary_words", dict.words.size()},
             {"labeled_clusters", labels.size()},
             {"reviewed", !review_path.empty()}},
        {"ingest/corpus.jsonl", "filter/kept.jsonl", "cluster/clusters.jsonl",
         "cluster/assignments.tsv"},
        {"label/seeds.tsv", "label/dictionary.txt", "label/cluster_labels.tsv",
         "label/verdicts.tsv"});
}

void stage_train(RunDir& run, const TrainConfig& cfg, const StageOptions& opt) {
    run.require_stages({"ingest", "filter", "cluster", "signals", "label"});
    const Corpus corpus = load_corpus(run);
    const std::vector<MessageCluster> clusters = load_clusters(run);
    const auto msg_to_cluster = load_assignments(run);
    const std::vector<ContentSignal> signals = load_signals(run, corpus);
    const std::vector<LabeledCluster> labels = load_labels(run);
    const std::vector<SenderVerdict> verdicts = load_verdicts(run);
    const std::string data_dir = opt.data_dir.empty() ? default_data_dir() : opt.data_dir;

    fs::create_directories(run.path("train"));
    json params{{"model", std::string(model_kind_name(cfg.model))},
                {"split", cfg.split},
                {"folds", cfg.folds},
                {"seed", cfg.seed},
                {"hyperparams", cfg.hyperparams}};
    std::vector<std::string> outputs;

    // --- Content model over cluster representatives ------------------------
    std::map<std::string, bool> label_of;
    for (const LabeledCluster& l : labels) label_of[l.cluster_id] = l.junk;

    const StopwordTable stopwords = StopwordTable::load(data_dir);
    std::vector<TokenizedMessage> reps;
    reps.reserve(clusters.size());
    for (const MessageCluster& c : clusters) {
        TokenizedMessage tm;
        tm.msg_id = c.cluster_id;
        tm.tokens = tokenize(c.representative_text);
        tm.language = detect_language(c.representative_text);
        reps.push_back(std::move(tm));
    }
    const HashingEmbedder embedder;
    const std::vector<ContentVector> vectors = embed_batch(reps, embedder, stopwords, opt.mode);

    FeatureMatrix content_x;
    content_x.cols = kContentDim;
    for (std::size_t d = 0; d < kContentDim; ++d) {
        content_x.feature_names.push_back("c" + std::to_string(d));
    }
    std::vector<int> content_y;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        content_x.push_row(std::span<const float>(vectors[i].values));
        auto it = label_of.find(clusters[i].cluster_id);
        content_y.push_back(it != label_of.end() && it->second ? 1 : 0);
    }

    const std::size_t junk_clusters = static_cast<std::size_t>(
        std::count(content_y.begin(), content_y.end(), 1));
    std::vector<bool> predicted_junk(clusters.size(), false);
    bool content_trained = false;
    if (clusters.size() >= 20 && junk_clusters >= 1 && junk_clusters < clusters.size()) {
        TrainConfig content_cfg = cfg;
        content_cfg.model = ModelKind::logistic_regression;
        content_cfg.hyperparams = {{"C", 100.0}, {"penalty", 1.0}, {"max_iter", 500.0}};
        const auto content_model = train(content_x, content_y, content_cfg, opt.mode);
        save_model(*content_model, run.path("train/content_model.json"));
        outputs.push_back("train/content_model.json");
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            predicted_junk[i] = content_model->predict(content_x.row(i)) == 1;
        }
        content_trained = true;
    } else {
        // Too little labeled structure for a model; fall back to the labels.
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            predicted_junk[i] = content_y[i] == 1;
        }
        params["content_model"] = "skipped: needs >= 20 clusters and both classes";
    }
    params["content_model_trained"] = content_trained;

    // Per-user junk fraction over clustered messages, per the content model.
    std::map<std::string, bool> cluster_predicted;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        cluster_predicted[clusters[i].cluster_id] = predicted_junk[i];
    }
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> user_counts; // total, junk
    for (const Message& m : corpus.messages) {
        auto it = msg_to_cluster.find(m.msg_id);
        if (it == msg_to_cluster.end()) continue;
        auto& [total, junk] = user_counts[m.sender.key()];
        ++total;
        if (cluster_predicted[it->second]) ++junk;
    }
    std::map<std::string, double> junk_fraction_by_user;
    {
        std::string rows = "user_key\tclustered\tjunk\tfraction\n";
        for (const auto& [key, counts] : user_counts) {
            const double frac = counts.first == 0
                                    ? 0.0
                                    : static_cast<double>(counts.second) /
                                          static_cast<double>(counts.first);
            junk_fraction_by_user[key] = frac;
            rows += key + "\t" + std::to_string(counts.first) + "\t" +
                    std::to_string(counts.second) + "\t" + fmt6(frac) + "\n";
        }
        write_file_atomic(run.path("train/content_fractions.tsv"), rows);
        outputs.push_back("train/content_fractions.tsv");
    }

    // --- Central metadata model (label: was the user ever removed) ---------
    const std::vector<MetadataProfile> profiles = profiles_for_run(corpus, signals);
    const std::vector<int> y = removed_labels(profiles);
    const std::size_t positives = static_cast<std::size_t>(
        std::count(y.begin(), y.end(), 1));

    bool metadata_trained = false;
    if (profiles.size() >= 25 && positives >= 2 && positives + 2 <= profiles.size()) {
        const SplitIndices split = stratified_split(y, cfg.split, cfg.seed);
        {
            std::string rows = "row\tuser_key\tpartition\n";
            std::vector<char> part(profiles.size(), 't');
            for (std::size_t r : split.test) part[r] = 'e';
            for (std::size_t r = 0; r < profiles.size(); ++r) {
                rows += std::to_string(r) + "\t" + profiles[r].user.key() +
                        (part[r] == 'e' ? "\ttest\n" : "\ttrain\n");
            }
            write_file_atomic(run.path("train/split.tsv"), rows);
            outputs.push_back("train/split.tsv");
        }
        const std::vector<int> y_train = label_rows(y, split.train);
        if (std::count(y_train.begin(), y_train.end(), 1) >= 1 &&
            std::count(y_train.begin(), y_train.end(), 0) >= 1 && y_train.size() >= 20) {
            for (const bool with_signal : {true, false}) {
                FeatureSpec spec;
                spec.with_signal = with_signal;
                spec.include_removed = false; // the label is "removed"
                const FeatureMatrix X = build_feature_matrix(profiles, spec);
                const FeatureMatrix X_train = matrix_rows(X, split.train);
                const auto model = train(X_train, y_train, cfg, opt.mode);
                const std::string file = with_signal ? "train/metadata_model.json"
                                                     : "train/metadata_model_nosignal.json";
                save_model(*model, run.path(file));
                outputs.push_back(file);
            }
            metadata_trained = true;
        }
    }
    if (!metadata_trained) {
        params["metadata_model"] =
            "skipped: needs >= 25 profiles, both classes, and a 20-sample training side";
    }
    params["metadata_model_trained"] = metadata_trained;
    params["profiles"] = profiles.size();
    params["removed_users"] = positives;

    // --- Importance contrast on junk-sender verdict labels -----------------
    try {
        const ImportanceReport imp = importance_report(corpus, signals, verdicts, cfg, opt.mode);
        std::string rows = "feature\twith_signal\twithout_signal\n";
        std::set<std::string> features;
        for (const auto& [f, v] : imp.with_signal) features.insert(f);
        for (const auto& [f, v] : imp.without_signal) features.insert(f);
        for (const std::string& f : features) {
            auto get = [&](const std::map<std::string, double>& m) {
                auto it = m.find(f);
                return it == m.end() ? std::string("-") : fmt6(it->second);
            };
            rows += f + "\t" + get(imp.with_signal) + "\t" + get(imp.without_signal) + "\n";
        }
        write_file_atomic(run.path("train/importance.tsv"), rows);
        outputs.push_back("train/importance.tsv");
        params["importance_eval"] = json{{"with_signal", eval_to_json(imp.eval_with)},
                                         {"without_signal", eval_to_json(imp.eval_without)}};
    } catch (const std::invalid_argument& e) {
        params["importance"] = std::string("skipped: ") + e.what();
    }

    // --- Per-group models ---------------------------------------------------
    PerGroupConfig pg;
    pg.train = cfg;
    const PerGroupSummary summary =
        train_per_group(corpus, signals, verdicts, junk_fraction_by_user, pg, opt.mode);
    {
        std::string rows = "group_id\ttrained\tskip_reason\tn_users\tn_junk_users\taccuracy\tf1\n";
        for (const GroupModelOutcome& o : summary.outcomes) {
            rows += o.group_id;
            rows += o.trained ? "\t1\t-" : "\t0\t" + o.skip_reason;
            rows += "\t" + std::to_string(o.n_users) + "\t" + std::to_string(o.n_junk_users);
            rows += o.trained ? "\t" + fmt6(o.eval.accuracy) + "\t" + fmt6(o.eval.f1) + "\n"
                              : "\t-\t-\n";
        }
        write_file_atomic(run.path("train/per_group.tsv"), rows);
        outputs.push_back("train/per_group.tsv");
    }
    params["per_group"] = json{{"trained", summary.trained_groups},
                               {"skipped", summary.skipped_groups},
                               {"skip_rate", summary.skip_rate},
                               {"mean_accuracy", summary.mean_accuracy},
                               {"mean_f1", summary.mean_f1}};

    std::sort(outputs.begin(), outputs.end());
    run.record_stage("train", std::move(params),
                     {"ingest/corpus.jsonl", "cluster/clusters.jsonl",
                      "cluster/assignments.tsv", "signals/message_signals.tsv",
                      "label/cluster_labels.tsv", "label/verdicts.tsv"},
                     outputs);
}

void stage_evaluate(RunDir& run, const StageOptions&) {
    run.require_stages({"ingest", "signals", "train"});
    const Corpus corpus = load_corpus(run);
    const std::vector<ContentSignal> signals = load_signals(run, corpus);
    const std::vector<MetadataProfile> profiles = profiles_for_run(corpus, signals);
    const std::vector<int> y = removed_labels(profiles);

    if (!std::filesystem::exists(run.path("train/split.tsv"))) {
        throw std::runtime_error(
            "evaluate: the train stage did not produce a split (metadata model skipped)");
    }
    std::vector<std::size_t> test_rows;
    for (const auto& row : read_tsv_body(run.path("train/split.tsv"))) {
        if (row.size() != 3) throw std::runtime_error("malformed split.tsv row");
        const auto r = static_cast<std::size_t>(std::stoull(row[0]));
        if (r >= profiles.size() || profiles[r].user.key() != row[1]) {
            throw std::runtime_error("split.tsv does not match the rebuilt profiles");
        }
        if (row[2] == "test") test_rows.push_back(r);
    }

    std::string rows = "model\ttp\tfn\tfp\ttn\taccuracy\tprecision\trecall\tf1\n";
    json params = json::object();
    const std::vector<int> y_test = label_rows(y, test_rows);
    for (const bool with_signal : {true, false}) {
        const std::string file = with_signal ? "train/metadata_model.json"
                                             : "train/metadata_model_nosignal.json";
        if (!std::filesystem::exists(run.path(file))) continue;
        const auto model = load_model(run.path(file));
        FeatureSpec spec;
        spec.with_signal = with_signal;
        spec.include_removed = false;
        const FeatureMatrix X = build_feature_matrix(profiles, spec);
        const EvalReport report = evaluate(*model, matrix_rows(X, test_rows), y_test);
        const std::string name = with_signal ? "metadata" : "metadata_nosignal";
        rows += eval_tsv_row(name, report) + "\n";
        params[name] = eval_to_json(report);
    }

    fs::create_directories(run.path("evaluate"));
    write_file_atomic(run.path("evaluate/eval.tsv"), rows);
    run.record_stage("evaluate", std::move(params),
                     {"train/split.tsv", "signals/message_signals.tsv"},
                     {"evaluate/eval.tsv"});
}

void stage_report(RunDir& run, const StageOptions&) {
    run.require_stages({"ingest", "cluster", "signals", "label"});
    const Corpus corpus = load_corpus(run);
    const std::vector<MessageCluster> clusters = load_clusters(run);
    const std::vector<ContentSignal> signals = load_signals(run, corpus);
    const std::vector<LabeledCluster> labels = load_labels(run);
    const std::vector<SenderVerdict> verdicts = load_verdicts(run);

    const std::vector<std::string> written =
        emit_report(corpus, clusters, labels, verdicts, signals, run.path("report"));

    std::vector<std::string> rel;
    for (const std::string& abs : written) {
        rel.push_back(fs::path(abs).lexically_relative(run.root()).generic_string());
    }
    run.record_stage("report", json{{"files", rel.size()}},
                     {"ingest/corpus.jsonl", "cluster/clusters.jsonl",
                      "label/cluster_labels.tsv", "label/verdicts.tsv",
                      "signals/message_signals.tsv"},
                     rel);
}

void stage_score(RunDir& run, const StageOptions&) {
    run.require_stages({"simulate", "cluster", "label"});
    const GroundTruth truth = load_truth(run);
    const std::vector<MessageCluster> clusters = load_clusters(run);
    const auto assignments = load_assignments(run);
    const std::vector<SenderVerdict> verdicts = load_verdicts(run);

    const json& config = run.manifest().config;
    if (!config.is_object() || !config.contains("seed")) {
        throw std::invalid_argument("score: run config carries no seed");
    }

    PipelineOutputs outputs;
    outputs.seed = config.at("seed").get<std::uint64_t>();
    outputs.clusters = clusters;
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        index_of[clusters[i].cluster_id] = i;
    }
    for (const auto& [msg, cluster_id] : assignments) {
        auto it = index_of.find(cluster_id);
        if (it == index_of.end()) {
            throw std::runtime_error("assignments.tsv references unknown cluster " + cluster_id);
        }
        outputs.msg_to_cluster.emplace(msg, it->second);
    }
    outputs.verdicts = verdicts;

    const Scorecard card = score_against_truth(outputs, truth);

    std::string rows = "metric\tvalue\n";
    rows += "cluster_recall\t" + fmt6(card.cluster_recall) + "\n";
    rows += "cluster_purity\t" + fmt6(card.cluster_purity) + "\n";
    rows += "verdict_precision\t" + fmt6(card.verdict_precision) + "\n";
    rows += "verdict_recall\t" + fmt6(card.verdict_recall) + "\n";
    for (const auto& [key, value] : card.extras) {
        rows += key + "\t" + fmt6(value) + "\n";
    }
    fs::create_directories(run.path("score"));
    write_file_atomic(run.path("score/scorecard.tsv"), rows);

    run.record_stage("score",
                     json{{"cluster_recall", card.cluster_recall},
                          {"cluster_purity", card.cluster_purity},
                          {"verdict_precision", card.verdict_precision},
                          {"verdict_recall", card.verdict_recall}},
                     {"sim/truth.json", "cluster/clusters.jsonl",
                      "cluster/assignments.tsv", "label/verdicts.tsv"},
                     {"score/scorecard.tsv"});
}

} // namespace groupsift
