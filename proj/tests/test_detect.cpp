#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groupsift/detect.hpp"
#include "groupsift/model.hpp"
#include "groupsift/pergroup.hpp"
#include "groupsift/signals.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace groupsift;

TEST_CASE("hashing embedder: zero vector for no tokens, deterministic, unit norm") {
    HashingEmbedder embedder;
    ContentVector empty = embedder.embed(std::vector<std::string>{});
    for (float v : empty.values) CHECK(v == 0.0f);

    std::vector<std::string> tokens{"free", "cash", "offer"};
    ContentVector a = embedder.embed(tokens);
    ContentVector b = embedder.embed(tokens);
    CHECK(a == b);

    double norm = 0;
    for (float v : a.values) norm += double(v) * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("disjoint-token texts are near-orthogonal under signed hashing") {
    HashingEmbedder embedder;
    std::mt19937_64 rng(11);
    double total = 0;
    const int pairs = 100;
    for (int p = 0; p < pairs; ++p) {
        std::vector<std::string> ta, tb;
        for (int i = 0; i < 12; ++i) {
            ta.push_back("left" + std::to_string(p) + "_" + std::to_string(rng() % 1000));
            tb.push_back("right" + std::to_string(p) + "_" + std::to_string(rng() % 1000));
        }
        ContentVector va = embedder.embed(ta);
        ContentVector vb = embedder.embed(tb);
        double dot = 0;
        for (std::size_t i = 0; i < kContentDim; ++i) {
            dot += double(va.values[i]) * vb.values[i];
        }
        total += std::abs(dot);
    }
    CHECK(total / pairs <= 0.05);
}

TEST_CASE("embed_batch filters stopwords per language: serial == parallel") {
    StopwordTable stopwords = StopwordTable::load();
    HashingEmbedder embedder;
    std::vector<TokenizedMessage> messages{
        {"m1", {"the", "free", "offer"}, Lang::en},
        {"m2", {"मुनाफ़ा", "व्यापार"}, Lang::hi},
        {"m3", {"anything", "goes"}, Lang::other}, // `other` keeps all tokens
    };
    auto serial = embed_batch(messages, embedder, stopwords, ExecMode::serial);
    auto parallel = embed_batch(messages, embedder, stopwords, ExecMode::parallel);
    REQUIRE(serial.size() == 3);
    CHECK(serial == parallel);

    // Stopword removal changed the embedding: "the free offer" == "free offer".
    CHECK(serial[0] == embedder.embed(std::vector<std::string>{"free", "offer"}));
}

namespace {

UserRef user(char tag, const std::string& cc = "91") {
    return UserRef{cc, std::string(64, tag)};
}

void post(Corpus& c, const UserRef& u, const std::string& group, std::int64_t ts,
          const std::string& text) {
    c.messages.push_back({"m" + std::to_string(c.messages.size()), group, u, ts, text, false,
                          std::nullopt});
}

void act(Corpus& c, const UserRef& u, const std::string& group, ActionKind kind,
         std::int64_t ts) {
    c.events.push_back({group, u, kind, ts, std::nullopt});
}

} // namespace

TEST_CASE("build_profiles counts per signal and excludes users below min_actions") {
    Corpus c;
    UserRef busy = user('a');
    UserRef quiet = user('b');
    UserRef foreign = user('c', "7");

    post(c, busy, "g1", 100, "see https://a.example");
    post(c, busy, "g1", 200, "more at https://b.example");
    post(c, busy, "g1", 300, "https://c.example again");
    act(c, busy, "g1", ActionKind::joined_via_link, 50);

    act(c, quiet, "g1", ActionKind::added, 60); // one action only -> excluded

    post(c, foreign, "g1", 400, "call 9876543210");
    post(c, foreign, "g1", 500, "plain note");
    c.finalize();

    auto signals = encode_signals(c.messages);
    auto profiles = build_profiles(c, signals);
    REQUIRE(profiles.size() == 2);

    const MetadataProfile& f = profiles[0]; // sorted by (group, key): cc 7 first
    CHECK(f.user == foreign);
    CHECK(f.non_domestic);
    CHECK(f.posted_phone == 1);
    CHECK(f.posted_simple == 1);
    CHECK(f.total_actions == 2);

    const MetadataProfile& b = profiles[1];
    CHECK(b.user == busy);
    CHECK_FALSE(b.non_domestic);
    CHECK(b.posted_url == 3);
    CHECK(b.posted_simple == 0);
    CHECK(b.joined_via_link == 1);
    CHECK(b.total_actions == 4);
    CHECK(b.posts_total == 3);
}

TEST_CASE("build_profiles per-group scope splits a user across groups") {
    Corpus c;
    UserRef u = user('a');
    post(c, u, "g1", 100, "first group note");
    post(c, u, "g1", 200, "second note");
    post(c, u, "g2", 300, "other group note");
    act(c, u, "g2", ActionKind::joined_via_link, 250);
    c.finalize();

    auto signals = encode_signals(c.messages);
    ProfileOptions opts;
    opts.scope = ProfileScope::per_group;
    auto profiles = build_profiles(c, signals, opts);
    REQUIRE(profiles.size() == 2);
    CHECK(profiles[0].group_id == "g1");
    CHECK(profiles[0].posted_simple == 2);
    CHECK(profiles[1].group_id == "g2");
    CHECK(profiles[1].posted_simple == 1);
    CHECK(profiles[1].joined_via_link == 1);

    // Global scope merges them into one profile with an empty group id.
    auto global = build_profiles(c, signals);
    REQUIRE(global.size() == 1);
    CHECK(global[0].group_id.empty());
    CHECK(global[0].posts_total == 3);
}

TEST_CASE("feature spec: signal ablation collapses post counts, leakage guard drops removed") {
    FeatureSpec full;
    CHECK(full.names() == std::vector<std::string>{
        "posted_simple", "posted_url", "posted_phone", "joined_via_link", "added",
        "added_by_admin", "left", "removed", "number_changed", "non_domestic"});

    FeatureSpec nosignal;
    nosignal.with_signal = false;
    CHECK(nosignal.names() == std::vector<std::string>{
        "posted_any", "joined_via_link", "added", "added_by_admin", "left", "removed",
        "number_changed", "non_domestic"});

    FeatureSpec noleak;
    noleak.include_removed = false;
    auto names = noleak.names();
    CHECK(std::find(names.begin(), names.end(), "removed") == names.end());
}

TEST_CASE("feature matrix rejects width mismatches") {
    FeatureMatrix X;
    std::vector<float> row3{1, 2, 3};
    X.push_row(row3);
    CHECK(X.cols == 3);
    std::vector<float> row2{1, 2};
    CHECK_THROWS_AS(X.push_row(row2), std::invalid_argument);
}

TEST_CASE("EvalReport::from_confusion matches hand arithmetic") {
    EvalReport r = EvalReport::from_confusion(87, 13, 11, 89);
    CHECK(r.accuracy == doctest::Approx(0.88).epsilon(1e-12));
    CHECK(r.precision == doctest::Approx(87.0 / 98.0).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.87).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(0.8787878787878789).epsilon(1e-12));

    // Metric consistency: recompute from the stored confusion counts.
    double n = double(r.tp + r.fn + r.fp + r.tn);
    CHECK(r.accuracy == doctest::Approx((r.tp + r.tn) / n).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(2 * r.precision * r.recall / (r.precision + r.recall))
                      .epsilon(1e-12));

    EvalReport perfect = EvalReport::from_confusion(10, 0, 0, 10);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.f1 == 1.0);

    // All-positive predictor on balanced data.
    EvalReport allpos = EvalReport::from_confusion(50, 0, 50, 0);
    CHECK(allpos.recall == 1.0);
    CHECK(allpos.accuracy == doctest::Approx(0.5));
}

namespace {

// Linearly separable toy set: y = [feature0 > 0], feature1 is noise.
std::pair<FeatureMatrix, std::vector<int>> separable_set(std::size_t n, std::uint64_t seed) {
    FeatureMatrix X;
    X.feature_names = {"f0", "f1"};
    X.cols = 2;
    std::vector<int> y;
    std::mt19937_64 rng(seed);
    auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    for (std::size_t i = 0; i < n; ++i) {
        int label = int(i % 2);
        float f0 = float(label ? 0.5 + u01() : -0.5 - u01());
        float f1 = float(u01() * 2 - 1);
        std::vector<float> row{f0, f1};
        X.push_row(row);
        y.push_back(label);
    }
    return {X, y};
}

} // namespace

TEST_CASE("LR and RF reach accuracy 1.0 on a separable toy set") {
    auto [X, y] = separable_set(60, 21);
    auto [Xt, yt] = separable_set(40, 22);

    for (ModelKind kind : {ModelKind::logistic_regression, ModelKind::random_forest}) {
        CAPTURE(model_kind_name(kind));
        TrainConfig cfg;
        cfg.model = kind;
        cfg.folds = 1;
        cfg.seed = 7;
        if (kind == ModelKind::random_forest) cfg.hyperparams["n_estimators"] = 50;
        auto model = train(X, y, cfg);
        EvalReport r = evaluate(*model, Xt, yt);
        CHECK(r.accuracy == 1.0);
    }
}

TEST_CASE("shuffled labels give chance-level cross-validation accuracy") {
    FeatureMatrix X;
    X.feature_names = {"f0", "f1", "f2"};
    X.cols = 3;
    std::vector<int> y;
    std::mt19937_64 rng(5);
    auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 200; ++i) {
        std::vector<float> row{float(u01()), float(u01()), float(u01())};
        X.push_row(row);
        y.push_back(int(i % 2)); // balanced labels, independent of features
    }
    std::shuffle(y.begin(), y.end(), std::mt19937_64(17));

    TrainConfig cfg;
    cfg.model = ModelKind::logistic_regression;
    cfg.folds = 5;
    cfg.seed = 3;
    auto model = train(X, y, cfg);
    REQUIRE(model->cv_scores.size() == 5);
    double mean = 0;
    for (double s : model->cv_scores) mean += s;
    mean /= 5;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.2)); // 0.5 +- 0.1 absolute
}

TEST_CASE("train guards: sample floor, single class, svm") {
    auto [X, y] = separable_set(10, 1);
    CHECK_THROWS_AS(train(X, y, TrainConfig{}), std::invalid_argument);

    auto [X2, y2] = separable_set(40, 2);
    std::fill(y2.begin(), y2.end(), 1);
    CHECK_THROWS_AS(train(X2, y2, TrainConfig{}), std::invalid_argument);

    auto [X3, y3] = separable_set(40, 3);
    TrainConfig svm;
    svm.model = ModelKind::svm;
    CHECK_THROWS_AS(train(X3, y3, svm), std::invalid_argument);
}

TEST_CASE("random forest: serial and parallel training produce identical models") {
    auto [X, y] = separable_set(50, 9);
    TrainConfig cfg;
    cfg.model = ModelKind::random_forest;
    cfg.folds = 1;
    cfg.seed = 11;
    cfg.hyperparams["n_estimators"] = 30;
    auto serial = train(X, y, cfg, ExecMode::serial);
    auto parallel = train(X, y, cfg, ExecMode::parallel);
    CHECK(serial->to_json() == parallel->to_json());
}

TEST_CASE("fixed seed reproduces predictions; models round-trip through files") {
    auto [X, y] = separable_set(50, 13);
    TrainConfig cfg;
    cfg.model = ModelKind::random_forest;
    cfg.folds = 1;
    cfg.seed = 99;
    cfg.hyperparams["n_estimators"] = 40;
    auto a = train(X, y, cfg);
    auto b = train(X, y, cfg);
    CHECK(a->to_json() == b->to_json());

    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "groupsift_test_model.json";
    save_model(*a, path.string());
    auto loaded = load_model(path.string());
    CHECK(loaded->kind() == ModelKind::random_forest);
    CHECK(loaded->feature_names == a->feature_names);
    CHECK(loaded->seed == a->seed);
    for (std::size_t r = 0; r < X.rows; ++r) {
        CHECK(loaded->predict(X.row(r)) == a->predict(X.row(r)));
        CHECK(loaded->predict_proba(X.row(r)) ==
              doctest::Approx(a->predict_proba(X.row(r))).epsilon(1e-12));
    }
    fs::remove(path);

    // LR round-trips too.
    TrainConfig lr;
    lr.model = ModelKind::logistic_regression;
    lr.folds = 1;
    auto m = train(X, y, lr);
    save_model(*m, path.string());
    auto lm = load_model(path.string());
    for (std::size_t r = 0; r < X.rows; ++r) {
        CHECK(lm->predict_proba(X.row(r)) ==
              doctest::Approx(m->predict_proba(X.row(r))).epsilon(1e-12));
    }
    fs::remove(path);
}

TEST_CASE("feature importance: normalized, zero for constant features, LR refuses") {
    // Feature 0 decides the label; feature 1 is constant.
    FeatureMatrix X;
    X.feature_names = {"decider", "constant"};
    X.cols = 2;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        int label = i % 2;
        std::vector<float> row{float(label ? 1.0 : -1.0), 5.0f};
        X.push_row(row);
        y.push_back(label);
    }
    TrainConfig cfg;
    cfg.model = ModelKind::random_forest;
    cfg.folds = 1;
    cfg.hyperparams["n_estimators"] = 30;
    auto model = train(X, y, cfg);
    auto importance = feature_importance(*model);
    double sum = 0;
    for (const auto& [name, w] : importance) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(importance.at("constant") == 0.0);
    CHECK(importance.at("decider") == doctest::Approx(1.0).epsilon(1e-9));

    TrainConfig lr;
    lr.model = ModelKind::logistic_regression;
    lr.folds = 1;
    auto linear = train(X, y, lr);
    CHECK_THROWS_AS(feature_importance(*linear), std::invalid_argument);
}

TEST_CASE("stratified_split: deterministic partition with per-class llround counts") {
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) y.push_back(i < 30 ? 0 : 1);
    SplitIndices s = stratified_split(y, 0.8, 9);
    CHECK(s.train.size() == 32); // 24 zeros + 8 ones
    CHECK(s.test.size() == 8);

    std::size_t train_ones = 0;
    for (std::size_t i : s.train) train_ones += y[i] == 1;
    CHECK(train_ones == 8);

    // Partition: disjoint, covering.
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    CHECK(all.size() == y.size());

    SplitIndices again = stratified_split(y, 0.8, 9);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
    SplitIndices other = stratified_split(y, 0.8, 10);
    CHECK(other.train != s.train);

    // Degenerate fractions always keep one sample on each side per class.
    std::vector<int> tiny{0, 0, 1, 1};
    SplitIndices t = stratified_split(tiny, 0.99, 1);
    CHECK(t.test.size() == 2);
    CHECK_THROWS_AS(stratified_split(tiny, 1.0, 1), std::invalid_argument);
}

TEST_CASE("matrix_rows and label_rows subset consistently") {
    auto [X, y] = separable_set(10, 4);
    std::vector<std::size_t> idx{1, 3, 5};
    FeatureMatrix sub = matrix_rows(X, idx);
    std::vector<int> suby = label_rows(y, idx);
    REQUIRE(sub.rows == 3);
    REQUIRE(suby.size() == 3);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(std::equal(sub.row(i).begin(), sub.row(i).end(), X.row(idx[i]).begin()));
        CHECK(suby[i] == y[idx[i]]);
    }
}

namespace {

// A corpus with one trainable group, one single-class group and one tiny group.
struct PerGroupFixture {
    Corpus corpus;
    std::vector<SenderVerdict> verdicts;
    std::map<std::string, double> junk_fraction;

    void add_member(const std::string& group, char tag, bool junk, const std::string& cc = "91") {
        UserRef u{cc, std::string(62, tag) + (group == "big" ? "bb" : group == "mono" ? "mm" : "tt")};
        std::int64_t base = 1000 + std::int64_t(corpus.messages.size()) * 10;
        if (junk) {
            post(corpus, u, group, base, "offer at https://deal.example now");
            post(corpus, u, group, base + 1, "more https://deal.example");
            corpus.events.push_back({group, u, ActionKind::joined_via_link, base - 5, std::nullopt});
        } else {
            post(corpus, u, group, base, "market day moved to friday");
            post(corpus, u, group, base + 1, "thanks for the directions");
            corpus.events.push_back({group, u, ActionKind::added, base - 5, std::nullopt});
        }
        SenderVerdict v;
        v.user = u;
        v.total_messages = 2;
        v.junk_messages = junk ? 2 : 0;
        v.junk_fraction = junk ? 1.0 : 0.0;
        v.is_junk_sender = junk;
        verdicts.push_back(v);
        junk_fraction[u.key()] = v.junk_fraction;
    }

    PerGroupFixture() {
        const char* tags = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMN";
        for (int i = 0; i < 40; ++i) add_member("big", tags[i], i % 4 == 0); // 10 junk
        // Large enough that flipping 10 users to junk clears the 20-sample
        // training floor after the 0.8 split (30 users -> 24 training rows).
        for (int i = 0; i < 30; ++i) add_member("mono", tags[i], false);
        for (int i = 0; i < 5; ++i) add_member("tiny", tags[i], i % 2 == 0);
        corpus.finalize();
        std::sort(verdicts.begin(), verdicts.end(),
                  [](const SenderVerdict& a, const SenderVerdict& b) {
                      return a.user.key() < b.user.key();
                  });
    }
};

} // namespace

TEST_CASE("train_per_group: trains big groups, skips tiny and single-class ones") {
    PerGroupFixture f;
    auto signals = encode_signals(f.corpus.messages);

    PerGroupConfig cfg;
    cfg.train.model = ModelKind::random_forest;
    cfg.train.folds = 1;
    cfg.train.seed = 5;
    cfg.train.hyperparams["n_estimators"] = 50;

    PerGroupSummary summary =
        train_per_group(f.corpus, signals, f.verdicts, f.junk_fraction, cfg);
    REQUIRE(summary.outcomes.size() == 3);

    const GroupModelOutcome& big = summary.outcomes[0];
    CHECK(big.group_id == "big");
    CHECK(big.trained);
    CHECK(big.n_users == 40);
    CHECK(big.n_junk_users == 10);
    CHECK(big.eval.tp + big.eval.fn + big.eval.fp + big.eval.tn == 8); // 20% test
    CHECK(big.eval.accuracy >= 0.75);

    const GroupModelOutcome& mono = summary.outcomes[1];
    CHECK(mono.group_id == "mono");
    CHECK_FALSE(mono.trained);
    CHECK(mono.skip_reason == "single_class");

    const GroupModelOutcome& tiny = summary.outcomes[2];
    CHECK(tiny.group_id == "tiny");
    CHECK_FALSE(tiny.trained);
    CHECK(tiny.skip_reason == "too_few_users");

    CHECK(summary.trained_groups == 1);
    CHECK(summary.skipped_groups == 2);
    CHECK(summary.skip_rate == doctest::Approx(2.0 / 3.0));
    CHECK(summary.mean_accuracy == doctest::Approx(big.eval.accuracy));
    CHECK(summary.sd_accuracy == 0.0); // single trained group: sd over n-1 is defined as 0
}

TEST_CASE("train_per_group summary statistics match a brute-force recomputation") {
    PerGroupFixture f;
    // Make `mono` trainable by flipping 10 users to junk.
    int flipped = 0;
    for (auto& v : f.verdicts) {
        if (flipped < 10 && v.user.digest.substr(62) == "mm") {
            v.junk_messages = 2;
            v.junk_fraction = 1.0;
            v.is_junk_sender = true;
            f.junk_fraction[v.user.key()] = 1.0;
            ++flipped;
        }
    }
    REQUIRE(flipped == 10);
    // And give those users junk-shaped behavior so the learner has signal.
    for (auto& m : f.corpus.messages) {
        if (m.group_id == "mono" && f.junk_fraction[m.sender.key()] == 1.0) {
            m.text = "offer at https://deal.example now";
        }
    }

    auto signals = encode_signals(f.corpus.messages);
    PerGroupConfig cfg;
    cfg.train.model = ModelKind::random_forest;
    cfg.train.folds = 1;
    cfg.train.seed = 5;
    cfg.train.hyperparams["n_estimators"] = 50;
    PerGroupSummary s = train_per_group(f.corpus, signals, f.verdicts, f.junk_fraction, cfg);

    std::vector<double> accs, f1s;
    for (const auto& o : s.outcomes) {
        if (o.trained) {
            accs.push_back(o.eval.accuracy);
            f1s.push_back(o.eval.f1);
        }
    }
    REQUIRE(accs.size() == s.trained_groups);
    REQUIRE(s.trained_groups == 2);

    auto mean = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        return m / double(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = mean(v), acc = 0;
        for (double x : v) acc += (x - m) * (x - m);
        return std::sqrt(acc / double(v.size() - 1));
    };
    CHECK(s.mean_accuracy == doctest::Approx(mean(accs)).epsilon(1e-12));
    CHECK(s.sd_accuracy == doctest::Approx(sd(accs)).epsilon(1e-12));
    CHECK(s.mean_f1 == doctest::Approx(mean(f1s)).epsilon(1e-12));
    CHECK(s.sd_f1 == doctest::Approx(sd(f1s)).epsilon(1e-12));
}

TEST_CASE("train_per_group: serial == parallel outcomes") {
    PerGroupFixture f;
    auto signals = encode_signals(f.corpus.messages);
    PerGroupConfig cfg;
    cfg.train.model = ModelKind::random_forest;
    cfg.train.folds = 1;
    cfg.train.seed = 2;
    cfg.train.hyperparams["n_estimators"] = 20;
    auto a = train_per_group(f.corpus, signals, f.verdicts, f.junk_fraction, cfg, ExecMode::serial);
    auto b = train_per_group(f.corpus, signals, f.verdicts, f.junk_fraction, cfg,
                             ExecMode::parallel);
    REQUIRE(a.outcomes.size() == b.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        CHECK(a.outcomes[i].trained == b.outcomes[i].trained);
        CHECK(a.outcomes[i].eval.accuracy == b.outcomes[i].eval.accuracy);
        CHECK(a.outcomes[i].eval.tp == b.outcomes[i].eval.tp);
    }
    CHECK(a.mean_accuracy == b.mean_accuracy);
}

TEST_CASE("importance_report: normalized columns, URL counter dominates when planted") {
    // A corpus where the URL counter is the only clean separator: everyone is
    // "added", posts_total has the same {3,4,5} distribution in both classes,
    // and simple-counts overlap; junk users differ only by swapping one simple
    // post for a URL post.
    Corpus corpus;
    std::vector<SenderVerdict> verdicts;
    for (int i = 0; i < 72; ++i) {
        const bool junk = i % 2 == 0;
        UserRef u{"91", std::string(62, static_cast<char>('a' + i % 26)) +
                            (i < 26 ? "q0" : i < 52 ? "q1" : "q2")};
        const std::int64_t base = 1000 + std::int64_t(i) * 100;
        corpus.events.push_back({"g", u, ActionKind::added, base - 5, std::nullopt});
        const int simple = (junk ? 2 : 3) + (i / 2) % 3; // junk 2..4, legit 3..5
        for (int p = 0; p < simple; ++p) {
            post(corpus, u, "g", base + p, "market day moved to friday again");
        }
        if (junk) post(corpus, u, "g", base + 50, "offer at https://deal.example now");
        SenderVerdict v;
        v.user = u;
        v.total_messages = std::uint64_t(simple) + (junk ? 1 : 0);
        v.junk_messages = junk ? 1 : 0;
        v.is_junk_sender = junk;
        verdicts.push_back(v);
    }
    corpus.finalize();

    auto signals = encode_signals(corpus.messages);
    TrainConfig cfg;
    cfg.model = ModelKind::random_forest;
    cfg.folds = 1;
    cfg.seed = 3;
    cfg.hyperparams["n_estimators"] = 60;

    ImportanceReport rep = importance_report(corpus, signals, verdicts, cfg);
    double sum_with = 0, sum_without = 0;
    for (const auto& [k, v] : rep.with_signal) sum_with += v;
    for (const auto& [k, v] : rep.without_signal) sum_without += v;
    CHECK(sum_with == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum_without == doctest::Approx(1.0).epsilon(1e-9));

    // posted_url is the sole perfect separator, so it must rank first.
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [k, v] : rep.with_signal) ranked.push_back({v, k});
    std::sort(ranked.rbegin(), ranked.rend());
    REQUIRE(ranked.size() >= 2);
    CHECK(ranked[0].second == "posted_url");
    CHECK(ranked[0].first > 0.5);

    // With the counter split out the model separates perfectly; collapsed to
    // posted_any the classes are indistinguishable by construction.
    CHECK(rep.eval_with.f1 > rep.eval_without.f1);

    // The ablation column has no signal-derived features.
    CHECK(rep.without_signal.count("posted_url") == 0);
    CHECK(rep.without_signal.count("posted_any") == 1);
}
