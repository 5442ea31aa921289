// Benchmarks the parallel kernels against their serial reference paths and
// verifies that both produce identical results. Wall time is reported per
// kernel; on a single-core host the two columns are expected to be close.

#include "groupsift/dedup.hpp"
#include "groupsift/detect.hpp"
#include "groupsift/model.hpp"
#include "groupsift/signals.hpp"
#include "groupsift/simgen.hpp"
#include "groupsift/textprep.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

namespace {

using groupsift::ExecMode;

double time_ms(const std::function<void()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

void row(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-22s %10.1f ms %10.1f ms   %5.2fx   %s\n", name.c_str(), serial_ms,
                parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
                identical ? "identical" : "MISMATCH");
}

} // namespace

int main() {
    groupsift::SimConfig cfg;
    cfg.n_users = 1500;
    cfg.n_groups = 12;
    cfg.junk_sender_fraction = 0.2;
    cfg.campaign.templates = 300;
    cfg.campaign.variants_per_template = 12;
    cfg.seed = 42;
    std::printf("generating benchmark corpus...\n");
    const groupsift::SimResult sim = groupsift::generate(cfg);
    const groupsift::Corpus& corpus = sim.corpus;
    std::printf("corpus: %zu messages, %zu events\n\n", corpus.messages.size(),
                corpus.events.size());
    std::printf("%-22s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

    // Signal encoding.
    std::vector<groupsift::ContentSignal> sig_s, sig_p;
    const double enc_s = time_ms([&] { sig_s = encode_signals(corpus.messages, ExecMode::serial); });
    const double enc_p =
        time_ms([&] { sig_p = encode_signals(corpus.messages, ExecMode::parallel); });
    row("encode_signals", enc_s, enc_p, sig_s == sig_p);

    // Filtering (tokenize + classify).
    const groupsift::FilterConfig fcfg = groupsift::FilterConfig::load();
    groupsift::FilterResult kept_s, kept_p;
    const double fil_s =
        time_ms([&] { kept_s = filter_corpus(corpus, fcfg, ExecMode::serial); });
    const double fil_p =
        time_ms([&] { kept_p = filter_corpus(corpus, fcfg, ExecMode::parallel); });
    row("filter_corpus", fil_s, fil_p, kept_s.kept == kept_p.kept);

    // MinHash signatures.
    std::vector<groupsift::ClusterInput> inputs;
    {
        std::unordered_map<std::string, const groupsift::Message*> by_id;
        for (const groupsift::Message& m : corpus.messages) by_id.emplace(m.msg_id, &m);
        for (const groupsift::TokenizedMessage& tm : kept_p.kept) {
            const groupsift::Message& m = *by_id.at(tm.msg_id);
            inputs.push_back({m.msg_id, m.group_id, m.sender.key(), m.timestamp, m.text,
                              tm.tokens});
        }
    }
    const groupsift::LshParams lsh;
    std::vector<groupsift::ShingledMessage> shn_s, shn_p;
    const double sg_s =
        time_ms([&] { shn_s = compute_signatures(inputs, lsh, ExecMode::serial); });
    const double sg_p =
        time_ms([&] { shn_p = compute_signatures(inputs, lsh, ExecMode::parallel); });
    row("compute_signatures", sg_s, sg_p, shn_s == shn_p);

    // Full clustering.
    const groupsift::ClusterParams cparams;
    std::vector<groupsift::MessageCluster> cl_s, cl_p;
    const double cl_sm =
        time_ms([&] { cl_s = build_clusters(inputs, cparams, ExecMode::serial); });
    const double cl_pm =
        time_ms([&] { cl_p = build_clusters(inputs, cparams, ExecMode::parallel); });
    bool clusters_equal = cl_s.size() == cl_p.size();
    for (std::size_t i = 0; clusters_equal && i < cl_s.size(); ++i) {
        clusters_equal = cl_s[i].cluster_id == cl_p[i].cluster_id &&
                         cl_s[i].member_msg_ids == cl_p[i].member_msg_ids;
    }
    row("build_clusters", cl_sm, cl_pm, clusters_equal);

    // Embeddings.
    const groupsift::StopwordTable stopwords = groupsift::StopwordTable::load();
    const groupsift::HashingEmbedder embedder;
    std::vector<groupsift::ContentVector> em_s, em_p;
    const double em_sm = time_ms(
        [&] { em_s = embed_batch(kept_p.kept, embedder, stopwords, ExecMode::serial); });
    const double em_pm = time_ms(
        [&] { em_p = embed_batch(kept_p.kept, embedder, stopwords, ExecMode::parallel); });
    row("embed_batch", em_sm, em_pm, em_s == em_p);

    // Forest training.
    groupsift::ProfileOptions popts;
    const auto profiles = build_profiles(corpus, sig_p, popts);
    std::vector<int> y;
    for (const auto& p : profiles) y.push_back(p.removed >= 1 ? 1 : 0);
    groupsift::FeatureSpec spec;
    spec.include_removed = false;
    const groupsift::FeatureMatrix X = build_feature_matrix(profiles, spec);
    groupsift::TrainConfig tcfg;
    tcfg.folds = 1;
    tcfg.hyperparams["n_estimators"] = 100;
    std::unique_ptr<groupsift::Model> rf_s, rf_p;
    const double rf_sm = time_ms([&] { rf_s = train(X, y, tcfg, ExecMode::serial); });
    const double rf_pm = time_ms([&] { rf_p = train(X, y, tcfg, ExecMode::parallel); });
    row("train_forest", rf_sm, rf_pm, rf_s->to_json() == rf_p->to_json());

    return 0;
}
