#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groupsift/corpus.hpp"
#include "groupsift/dedup.hpp"
#include "groupsift/scoring.hpp"
#include "groupsift/simgen.hpp"
#include "groupsift/textprep.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

using namespace groupsift;

namespace {

// Small but fully featured: campaigns, fillers, legit chatter, removals.
SimConfig small_config() {
    SimConfig cfg;
    cfg.n_groups = 4;
    cfg.n_users = 60;
    cfg.junk_sender_fraction = 0.1; // 6 junk humans
    cfg.campaign.templates = 8;
    cfg.campaign.variants_per_template = 6;
    cfg.campaign.phones_per_campaign = 2;
    cfg.campaign.span_days = 10;
    cfg.campaign.groups_per_campaign = 2;
    cfg.horizon_days = 20;
    cfg.low_entropy_rate = 0.15;
    cfg.legit_messages_mean = 3.0;
    cfg.legit_groups_max = 2;
    cfg.seed = 42;
    return cfg;
}

std::unordered_map<std::string, const Message*> index_by_id(const Corpus& c) {
    std::unordered_map<std::string, const Message*> by_id;
    for (const Message& m : c.messages) by_id.emplace(m.msg_id, &m);
    return by_id;
}

} // namespace

TEST_CASE("generation is deterministic for a fixed config") {
    const SimConfig cfg = small_config();
    SimResult a = generate(cfg);
    SimResult b = generate(cfg);
    CHECK(a.raw_lines == b.raw_lines);
    CHECK(a.reputation_lines == b.reputation_lines);
    CHECK(a.corpus == b.corpus);
    CHECK(a.truth.to_json().dump() == b.truth.to_json().dump());
}

TEST_CASE("the seed changes the stream") {
    SimConfig cfg = small_config();
    SimResult a = generate(cfg);
    cfg.seed = 43;
    SimResult b = generate(cfg);
    CHECK(a.raw_lines != b.raw_lines);
}

TEST_CASE("zero junk fraction produces a campaign-free corpus") {
    SimConfig cfg = small_config();
    cfg.junk_sender_fraction = 0.0;
    SimResult r = generate(cfg);

    CHECK(r.truth.campaigns.empty());
    CHECK(r.truth.junk_msg_ids.empty());
    CHECK(r.truth.junk_domain_engines.empty());
    CHECK(r.truth.evasive_seed_phone_keys.empty());
    for (const auto& [key, phone] : r.truth.phones) CHECK(!phone.junk);
    for (const auto& [id, cls] : r.truth.msg_truth_class) {
        CAPTURE(cls);
        CHECK(cls.rfind("tmpl:", 0) == std::string::npos);
    }
    CHECK(!r.corpus.messages.empty()); // legit chatter still flows
}

TEST_CASE("infeasible configurations are rejected up front") {
    {
        SimConfig cfg = small_config();
        cfg.campaign.span_days = cfg.horizon_days + 1;
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
    {
        SimConfig cfg = small_config();
        cfg.behavior.evasive_junk_senders = 1;
        cfg.campaign.groups_per_campaign = 1;
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
    {
        SimConfig cfg = small_config();
        cfg.junk_sender_fraction = 0.5; // 30 junk humans, only 8 templates
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
    {
        SimConfig cfg = small_config();
        cfg.salt.clear();
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
    {
        SimConfig cfg = small_config();
        cfg.low_entropy_rate = 1.0;
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
    {
        SimConfig cfg = small_config();
        cfg.legit_groups_max = cfg.n_groups + 1;
        CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
    }
}

TEST_CASE("ground truth indexes every message and every sender") {
    const SimConfig cfg = small_config();
    SimResult r = generate(cfg);
    const auto by_id = index_by_id(r.corpus);

    // Every message has exactly one truth class, and vice versa.
    CHECK(r.truth.msg_truth_class.size() == r.corpus.messages.size());
    for (const Message& m : r.corpus.messages) {
        auto it = r.truth.msg_truth_class.find(m.msg_id);
        REQUIRE(it != r.truth.msg_truth_class.end());
        const std::string& cls = it->second;
        const bool known = cls.rfind("tmpl:", 0) == 0 || cls.rfind("pool:", 0) == 0 ||
                           cls.rfind("low:", 0) == 0;
        CAPTURE(cls);
        CHECK(known);
        // Every sender resolves to a truth phone with matching identity.
        auto pit = r.truth.phones.find(m.sender.key());
        REQUIRE(pit != r.truth.phones.end());
        CHECK(pit->second.country_code == m.sender.country_code);
        CHECK(pit->second.digest == m.sender.digest);
    }

    // Day bounds hold for every timestamp.
    for (const Message& m : r.corpus.messages) {
        const std::int64_t day = epoch_day(m.timestamp);
        CHECK(day >= kSimBaseDay);
        CHECK(day < kSimBaseDay + static_cast<std::int64_t>(cfg.horizon_days));
    }

    // One raw line per message plus one per event.
    CHECK(r.raw_lines.size() == r.corpus.messages.size() + r.corpus.events.size());

    // Campaign message ids exist, carry the campaign's class, and are junk.
    std::set<std::string> union_of_campaigns;
    for (std::size_t c = 0; c < r.truth.campaigns.size(); ++c) {
        const TruthCampaign& tc = r.truth.campaigns[c];
        CHECK(!tc.msg_ids.empty());
        for (const std::string& id : tc.msg_ids) {
            REQUIRE(by_id.count(id));
            CHECK(r.truth.msg_truth_class.at(id) == "tmpl:" + std::to_string(c));
            CHECK(r.truth.junk_msg_ids.count(id) == 1);
            union_of_campaigns.insert(id);
        }
        // The rotation phones are junk phones credited with this campaign.
        for (const std::string& key : tc.phone_keys) {
            auto pit = r.truth.phones.find(key);
            REQUIRE(pit != r.truth.phones.end());
            CHECK(pit->second.junk);
            const auto& ids = pit->second.campaign_ids;
            CHECK(std::find(ids.begin(), ids.end(), tc.id) != ids.end());
        }
        // Schedule stays inside the horizon; expected-active days are planned days.
        for (std::int64_t day : tc.schedule_days) {
            CHECK(day >= kSimBaseDay);
            CHECK(day < kSimBaseDay + static_cast<std::int64_t>(cfg.horizon_days));
        }
        for (std::int64_t day : tc.active_days_expected) {
            CHECK(std::find(tc.schedule_days.begin(), tc.schedule_days.end(), day) !=
                  tc.schedule_days.end());
        }
    }
    // No forwarding configured, so junk messages are exactly the campaign posts.
    CHECK(union_of_campaigns ==
          std::set<std::string>(r.truth.junk_msg_ids.begin(), r.truth.junk_msg_ids.end()));

    // Fillers are never junk and always carry a low class.
    for (const std::string& id : r.truth.low_entropy_msg_ids) {
        CHECK(r.truth.junk_msg_ids.count(id) == 0);
        CHECK(r.truth.msg_truth_class.at(id).rfind("low:", 0) == 0);
    }
}

TEST_CASE("truth post-day spans match a recomputation that ignores fillers") {
    SimResult r = generate(small_config());

    std::unordered_map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
    for (const Message& m : r.corpus.messages) {
        if (r.truth.msg_truth_class.at(m.msg_id).rfind("low:", 0) == 0) continue;
        const std::int64_t day = epoch_day(m.timestamp);
        auto [it, fresh] = spans.try_emplace(m.sender.key(), day, day);
        if (!fresh) {
            it->second.first = std::min(it->second.first, day);
            it->second.second = std::max(it->second.second, day);
        }
    }
    for (const auto& [key, phone] : r.truth.phones) {
        auto it = spans.find(key);
        if (it == spans.end()) {
            CHECK(phone.first_post_day == -1);
            CHECK(phone.last_post_day == -1);
        } else {
            CHECK(phone.first_post_day == it->second.first);
            CHECK(phone.last_post_day == it->second.second);
        }
    }
}

TEST_CASE("campaign variants stay above the mutation floor") {
    SimConfig cfg = small_config();
    cfg.n_users = 30; // 3 junk humans
    cfg.campaign.templates = 3;
    cfg.campaign.variants_per_template = 8;
    cfg.campaign.mutation_jaccard_floor = 0.8;
    SimResult r = generate(cfg);
    const auto by_id = index_by_id(r.corpus);

    REQUIRE(r.truth.campaigns.size() == 3);
    for (const TruthCampaign& tc : r.truth.campaigns) {
        // Messages are emitted in variant order; the first one is the
        // unmutated template itself.
        const std::string& base = by_id.at(tc.msg_ids[0])->text;
        const auto base_shingles = shingle(tokenize(base));
        for (const std::string& id : tc.msg_ids) {
            const auto sh = shingle(tokenize(by_id.at(id)->text));
            CHECK(exact_jaccard(sh, base_shingles) >= cfg.campaign.mutation_jaccard_floor);
        }
    }
}

TEST_CASE("a mutation floor of 1.0 freezes every variant") {
    SimConfig cfg = small_config();
    cfg.n_users = 30;
    cfg.campaign.templates = 3;
    cfg.campaign.variants_per_template = 5;
    cfg.campaign.mutation_jaccard_floor = 1.0;
    SimResult r = generate(cfg);
    const auto by_id = index_by_id(r.corpus);

    for (const TruthCampaign& tc : r.truth.campaigns) {
        const std::string& base = by_id.at(tc.msg_ids[0])->text;
        for (const std::string& id : tc.msg_ids) CHECK(by_id.at(id)->text == base);
    }
}

TEST_CASE("planted junk vocabulary never leaks into neutral chatter") {
    SimResult r = generate(small_config());
    REQUIRE(!r.truth.planted_junk_words.empty());
    for (const Message& m : r.corpus.messages) {
        const std::string& cls = r.truth.msg_truth_class.at(m.msg_id);
        if (cls.rfind("pool:", 0) != 0) continue;
        for (const std::string& tok : tokenize(m.text)) {
            CAPTURE(m.text);
            CHECK(r.truth.planted_junk_words.count(tok) == 0);
        }
    }
}

TEST_CASE("declared fillers really classify as low entropy") {
    SimResult r = generate(small_config());
    const FilterConfig filter = FilterConfig::load();
    REQUIRE(!r.truth.low_entropy_msg_ids.empty());
    const auto by_id = index_by_id(r.corpus);
    for (const std::string& id : r.truth.low_entropy_msg_ids) {
        const std::string& cls = r.truth.msg_truth_class.at(id);
        // "low:<kind>:<i>" names the same kind the filter must assign.
        const std::string kind = cls.substr(4, cls.rfind(':') - 4);
        const LowEntropyClass got = classify_low_entropy(by_id.at(id)->text, filter);
        CAPTURE(by_id.at(id)->text);
        CHECK(std::string(low_entropy_class_name(got)) == kind);
    }
}

TEST_CASE("reputation lines cover every junk domain") {
    SimResult r = generate(small_config());
    std::set<std::string> listed;
    for (const std::string& line : r.reputation_lines) {
        const auto tab1 = line.find('\t');
        const auto tab2 = line.find('\t', tab1 + 1);
        REQUIRE(tab1 != std::string::npos);
        REQUIRE(tab2 != std::string::npos);
        listed.insert(line.substr(0, tab1));
    }
    for (const auto& [domain, engines] : r.truth.junk_domain_engines) {
        CAPTURE(domain);
        CHECK(listed.count(domain) == 1);
        CHECK(engines >= 0);
        // The TSV row carries the same engine count the truth records.
        const std::string needle = domain + "\t";
        bool matched = false;
        for (const std::string& line : r.reputation_lines) {
            if (line.rfind(needle, 0) != 0) continue;
            matched = line.substr(line.rfind('\t') + 1) == std::to_string(engines);
            break;
        }
        CHECK(matched);
    }
}

TEST_CASE("evasive seeding marks the first campaign of each evasive human") {
    SimConfig cfg = small_config();
    cfg.n_users = 30; // 3 junk humans
    cfg.campaign.templates = 3;
    cfg.behavior.evasive_junk_senders = 1;
    SimResult r = generate(cfg);

    REQUIRE(r.truth.evasive_seed_phone_keys.size() == 1);
    const std::string& seed_key = r.truth.evasive_seed_phone_keys[0];
    auto pit = r.truth.phones.find(seed_key);
    REQUIRE(pit != r.truth.phones.end());
    CHECK(pit->second.junk);
    // The seed campaign always carries a URL so removal policy can bite.
    CHECK(r.truth.campaigns[0].has_url);
    CHECK(r.truth.campaigns[0].phone_keys[0] == seed_key);
}

TEST_CASE("re-ingesting the raw stream reproduces the anonymized corpus") {
    const SimConfig cfg = small_config();
    SimResult r = generate(cfg);

    std::string stream;
    for (const std::string& line : r.raw_lines) {
        stream += line;
        stream += '\n';
    }
    std::istringstream in(stream);
    IngestResult ingested = ingest_stream(in, Anonymizer(cfg.salt));
    CHECK(ingested.errors.empty());
    CHECK(ingested.corpus == r.corpus);
}

TEST_CASE("config and truth round-trip through JSON") {
    SimConfig cfg = small_config();
    cfg.behavior.foreign_junk_prob = 0.25;
    cfg.behavior.evasive_junk_senders = 1;
    cfg.salt = "other-salt";
    const SimConfig back = SimConfig::from_json(cfg.to_json());
    CHECK(back.to_json().dump() == cfg.to_json().dump());

    // Partial configs keep defaults for missing keys.
    const SimConfig sparse = SimConfig::from_json(nlohmann::json{{"n_users", 7}});
    CHECK(sparse.n_users == 7);
    CHECK(sparse.n_groups == SimConfig{}.n_groups);
    CHECK_THROWS_AS(SimConfig::from_json(nlohmann::json::array()), std::invalid_argument);

    SimResult r = generate(small_config());
    const GroundTruth truth_back = GroundTruth::from_json(r.truth.to_json());
    CHECK(truth_back.to_json().dump() == r.truth.to_json().dump());
}

// ---------------------------------------------------------------------------
// Scoring against ground truth
// ---------------------------------------------------------------------------

namespace {

UserRef ref(char tag, const std::string& cc = "91") { return UserRef{cc, std::string(64, tag)}; }

GroundTruth tiny_truth() {
    GroundTruth truth;
    truth.seed = 9;
    TruthCampaign tc;
    tc.id = "camp000";
    tc.msg_ids = {"a", "b", "c", "d"};
    truth.campaigns.push_back(tc);
    for (const char* id : {"a", "b", "c", "d"}) truth.msg_truth_class[id] = "tmpl:0";
    truth.msg_truth_class["e"] = "pool:en:0";

    TruthPhone junk;
    junk.junk = true;
    junk.first_post_day = kSimBaseDay;
    junk.last_post_day = kSimBaseDay;
    truth.phones[ref('j').key()] = junk;
    TruthPhone legit;
    truth.phones[ref('l').key()] = legit;
    return truth;
}

SenderVerdict verdict(const UserRef& u, bool junk) {
    SenderVerdict v;
    v.user = u;
    v.is_junk_sender = junk;
    return v;
}

MessageCluster cluster_of(std::string id, std::vector<std::string> members) {
    MessageCluster c;
    c.cluster_id = std::move(id);
    c.member_msg_ids = std::move(members);
    return c;
}

} // namespace

TEST_CASE("a perfect reconstruction scores 1.0 on every axis") {
    const GroundTruth truth = tiny_truth();
    PipelineOutputs out;
    out.seed = 9;
    out.clusters = {cluster_of("c0", {"a", "b", "c", "d"}), cluster_of("c1", {"e"})};
    for (const char* id : {"a", "b", "c", "d"}) out.msg_to_cluster[id] = 0;
    out.msg_to_cluster["e"] = 1;
    out.verdicts = {verdict(ref('j'), true), verdict(ref('l'), false)};

    const Scorecard card = score_against_truth(out, truth);
    CHECK(card.cluster_recall == 1.0);
    CHECK(card.cluster_purity == 1.0);
    CHECK(card.verdict_precision == 1.0);
    CHECK(card.verdict_recall == 1.0);
    CHECK(card.extras.at("campaigns_scored") == 1.0);
    CHECK(card.extras.at("truth_junk_senders") == 1.0);
}

TEST_CASE("splitting a campaign in half halves cluster recall") {
    const GroundTruth truth = tiny_truth();
    PipelineOutputs out;
    out.seed = 9;
    out.clusters = {cluster_of("c0", {"a", "b"}), cluster_of("c1", {"c", "d"})};
    out.msg_to_cluster = {{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};

    const Scorecard card = score_against_truth(out, truth);
    CHECK(card.cluster_recall == 0.5);
    CHECK(card.cluster_purity == 1.0); // both halves are internally pure
}

TEST_CASE("a mixed cluster drags purity to the majority share") {
    const GroundTruth truth = tiny_truth();
    PipelineOutputs out;
    out.seed = 9;
    out.clusters = {cluster_of("c0", {"a", "b", "c", "e"})};
    out.msg_to_cluster = {{"a", 0}, {"b", 0}, {"c", 0}, {"e", 0}};

    const Scorecard card = score_against_truth(out, truth);
    CHECK(card.cluster_purity == 0.75); // 3 of 4 classed members agree
    CHECK(card.cluster_recall == 1.0);  // the surviving campaign posts co-locate
}

TEST_CASE("verdict precision counts false flags, recall counts misses") {
    const GroundTruth truth = tiny_truth();
    PipelineOutputs out;
    out.seed = 9;
    out.verdicts = {verdict(ref('j'), true), verdict(ref('l'), true)}; // one false flag
    Scorecard card = score_against_truth(out, truth);
    CHECK(card.verdict_precision == 0.5);
    CHECK(card.verdict_recall == 1.0);

    out.verdicts = {verdict(ref('j'), false)}; // miss the only junk phone
    card = score_against_truth(out, truth);
    CHECK(card.verdict_precision == 1.0); // vacuous: nothing flagged
    CHECK(card.verdict_recall == 0.0);
}

TEST_CASE("junk phones that never posted are excluded from recall") {
    GroundTruth truth = tiny_truth();
    TruthPhone silent;
    silent.junk = true; // first_post_day stays -1
    truth.phones[ref('s').key()] = silent;

    PipelineOutputs out;
    out.seed = 9;
    out.verdicts = {verdict(ref('j'), true)};
    const Scorecard card = score_against_truth(out, truth);
    CHECK(card.verdict_recall == 1.0); // the silent phone is not a scorable miss
    CHECK(card.extras.at("truth_junk_senders") == 1.0);
}

TEST_CASE("scoring refuses outputs from a different run") {
    const GroundTruth truth = tiny_truth();
    PipelineOutputs out;
    out.seed = 10;
    CHECK_THROWS_AS(score_against_truth(out, truth), std::invalid_argument);
}
