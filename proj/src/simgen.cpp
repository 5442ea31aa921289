#include "groupsift/simgen.hpp"

#include "groupsift/dedup.hpp"
#include "groupsift/textprep.hpp"
#include "groupsift/util/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace groupsift {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Vocabulary constants. The junk vocabulary seeds campaign templates; the
// noise vocabulary supplies mutation substitutions. They are disjoint so a
// mutated variant never drifts toward another campaign's token set.
// ---------------------------------------------------------------------------

constexpr const char* kJunkVocab[] = {
    "offer",    "loan",     "winner",  "lottery",  "cash",      "prize",    "earn",
    "income",   "work",     "home",    "click",    "join",      "limited",  "hurry",
    "deal",     "discount", "free",    "bonus",    "jackpot",   "invest",   "profit",
    "trading",  "crypto",   "forex",   "scheme",   "guaranteed","daily",    "payment",
    "upi",      "wallet",   "recharge","redeem",   "coupon",    "sale",     "exclusive",
    "vip",      "member",   "register","signup",   "claim",     "instant",  "transfer",
    "money",    "rupees",   "lakh",    "crore",    "double",    "triple",   "win",
    "lucky",    "draw",     "gift",    "voucher",  "card",      "credit",   "approval",
    "minutes",  "apply",    "now",     "today",    "earning",   "referral", "withdraw",
    "deposit",
};
constexpr std::size_t kJunkVocabSize = std::size(kJunkVocab);

// Mutation substitutes stay junk-flavored (and disjoint from the neutral
// sentence pools) so the planted vocabulary never leaks into legit traffic.
constexpr const char* kNoiseVocab[] = {
    "promo",    "cashback",  "rewards",  "points",    "combo",     "pack",
    "plan",     "prime",     "elite",    "gold",      "platinum",  "turbo",
    "boost",    "blast",     "bumper",   "dhamaka",   "mela",      "paisa",
    "kamao",    "jaldi",     "muft",     "sasta",     "mauka",     "badhiya",
    "jackpots", "megaoffer", "superfast","flat50",    "extra10",   "freebie",
    "topup",    "recharges", "unlocked", "premium",   "millionaire","fortune",
    "treasure", "goldmine",  "bonanza",  "winnings",
};
constexpr std::size_t kNoiseVocabSize = std::size(kNoiseVocab);

// Every entry below must also appear in data/boilerplate.txt; a test
// cross-checks this so filler messages are guaranteed to be filtered.
constexpr const char* kBoilerplateFillers[] = {
    "good morning", "gm", "hi", "thank you", "ok", "नमस्ते", "నమస్కారం", "வணக்கம்",
};

constexpr const char* kEmojiFillers[] = {
    "😀😀😀", "🙏", "👍👍", "🎉🎉🎉", "😂😂", "🌹🌹🌹", "🔥🔥",
};

constexpr const char* kJunkCategories[] = {"shopping", "finance", "social", "gaming",
                                           "promotions"};

constexpr std::size_t kTokensPerTemplate = 32;
constexpr std::size_t kMaxMutationSteps = 8;
constexpr std::size_t kLegitDomainPool = 20;
constexpr std::uint64_t kActiveDayFloor = 10; // planted msgs/day for "active"

// Stream tags keep each generation concern on an independent RNG stream, so
// reordering one phase never perturbs another.
constexpr std::uint64_t kTagCampaign = 0x63616d706169676eull;
constexpr std::uint64_t kTagLegit = 0x6c65676974757372ull;
constexpr std::uint64_t kTagHuman = 0x68756d616e666c67ull;
constexpr std::uint64_t kTagFiller = 0x66696c6c65726d73ull;
constexpr std::uint64_t kTagReputation = 0x7265707574617469ull;

// ---------------------------------------------------------------------------
// Deterministic RNG wrapper: std::uniform_*_distribution is implementation-
// defined, so indices and unit doubles are derived from raw engine output.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(util::splitmix64(seed)) {}

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

    double u01() {
        return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool bern(double p) { return u01() < p; }

    std::size_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::size_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= u01();
        } while (p > limit);
        return k - 1;
    }

    /// k distinct values from [0, n), order randomized.
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + index(n - i)]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 eng_;
};

std::string zero_pad(std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*zu", width, value);
    return buf;
}

void require(bool ok, const std::string& why) {
    if (!ok) throw std::invalid_argument("sim config: " + why);
}

void require_prob(double p, const std::string& name) {
    require(p >= 0.0 && p <= 1.0, name + " must be in [0, 1]");
}

void validate(const SimConfig& cfg) {
    require(cfg.n_groups >= 1, "need at least one group");
    require(cfg.n_users >= 1, "need at least one user");
    require(cfg.horizon_days >= 1, "horizon must cover at least one day");
    require(!cfg.salt.empty(), "salt must not be empty");
    require(cfg.legit_messages_mean >= 0.0, "legit_messages_mean must be >= 0");
    require(cfg.legit_groups_max >= 1 && cfg.legit_groups_max <= cfg.n_groups,
            "legit_groups_max must be in [1, n_groups]");
    require_prob(cfg.junk_sender_fraction, "junk_sender_fraction");
    require(cfg.low_entropy_rate >= 0.0 && cfg.low_entropy_rate < 1.0,
            "low_entropy_rate must be in [0, 1)");

    const CampaignKnobs& c = cfg.campaign;
    require(c.span_days >= 2, "campaign span must cover at least two days");
    require(c.span_days <= cfg.horizon_days, "campaign span exceeds the horizon");
    require(c.variants_per_template >= 1, "variants_per_template must be >= 1");
    require(c.phones_per_campaign >= 1, "phones_per_campaign must be >= 1");
    require(c.mutation_jaccard_floor > 0.0 && c.mutation_jaccard_floor <= 1.0,
            "mutation_jaccard_floor must be in (0, 1]");
    require(c.active_day_prob > 0.0 && c.active_day_prob <= 1.0,
            "active_day_prob must be in (0, 1]");
    require(c.groups_per_campaign >= 1 && c.groups_per_campaign <= cfg.n_groups,
            "groups_per_campaign must be in [1, n_groups]");

    const BehaviorKnobs& b = cfg.behavior;
    require_prob(b.junk_link_join_prob, "junk_link_join_prob");
    require_prob(b.legit_link_join_prob, "legit_link_join_prob");
    require_prob(b.removal_prob, "removal_prob");
    require_prob(b.foreign_junk_prob, "foreign_junk_prob");
    require_prob(b.junk_url_prob, "junk_url_prob");
    require_prob(b.junk_phone_prob, "junk_phone_prob");
    require_prob(b.legit_url_prob, "legit_url_prob");
    require_prob(b.legit_junk_prob, "legit_junk_prob");
    require_prob(b.junk_leave_prob, "junk_leave_prob");
    require_prob(b.legit_leave_prob, "legit_leave_prob");
    require_prob(b.flagged3_junk_domain_rate, "flagged3_junk_domain_rate");
    require_prob(b.flagged9_junk_domain_rate, "flagged9_junk_domain_rate");
    require(b.admin_removal_policy == "after_url_junk" || b.admin_removal_policy == "never",
            "admin_removal_policy must be 'after_url_junk' or 'never'");

    const auto junk_humans = static_cast<std::size_t>(
        std::llround(cfg.junk_sender_fraction * static_cast<double>(cfg.n_users)));
    if (junk_humans > 0) {
        require(junk_humans <= c.templates,
                "more junk senders than campaign templates; every junk sender needs a campaign");
    }
    require(b.evasive_junk_senders <= junk_humans,
            "more evasive senders than junk senders");
    if (b.evasive_junk_senders > 0) {
        require(c.groups_per_campaign >= 2,
                "evasive seeding needs at least two groups per campaign");
    }
}

struct SimPhone {
    std::string raw;
    UserRef ref;
    std::size_t human = 0;
    bool junk = false;
};

class Generator {
public:
    Generator(const SimConfig& cfg, const std::string& data_dir)
        : cfg_(cfg),
          anon_(cfg.salt),
          data_dir_(data_dir.empty() ? default_data_dir() : data_dir) {
        validate(cfg_);
    }

    SimResult run() {
        load_pools();
        plan_population();
        run_campaigns();
        run_legit();
        run_fillers();
        build_reputation();
        return assemble();
    }

private:
    // -- time/bookkeeping ----------------------------------------------------

    std::int64_t stamp(std::size_t day) {
        auto& seq = day_seq_[day];
        if (seq >= 86400) throw std::runtime_error("sim: more than 86400 records in one day");
        return (kSimBaseDay + static_cast<std::int64_t>(day)) * 86400 + seq++;
    }

    static std::int64_t to_epoch_day(std::size_t day) {
        return kSimBaseDay + static_cast<std::int64_t>(day);
    }

    std::size_t add_phone(std::string raw, std::size_t human, bool junk) {
        SimPhone ph;
        ph.raw = std::move(raw);
        ph.ref = anon_.anonymize(ph.raw);
        ph.human = human;
        ph.junk = junk;
        phones_.push_back(std::move(ph));
        return phones_.size() - 1;
    }

    bool is_member(std::size_t group, std::size_t phone) const {
        return membership_.count({group, phone}) > 0;
    }

    void ensure_member(std::size_t group, std::size_t phone, double link_prob, std::size_t day,
                       Rng& rng) {
        if (is_member(group, phone)) return;
        ActionKind kind;
        if (rng.bern(link_prob)) {
            kind = ActionKind::joined_via_link;
        } else {
            kind = rng.bern(0.5) ? ActionKind::added : ActionKind::added_by_admin;
        }
        emit_event(group, phone, kind, day, std::nullopt);
        membership_.insert({group, phone});
    }

    void emit_event(std::size_t group, std::size_t phone, ActionKind kind, std::size_t day,
                    std::optional<std::size_t> new_phone) {
        ActionEvent e;
        e.group_id = group_id(group);
        e.subject = phones_[phone].ref;
        e.kind = kind;
        e.timestamp = stamp(day);
        json raw{{"type", "act"},
                 {"group", e.group_id},
                 {"kind", std::string(action_kind_name(kind))},
                 {"ts", e.timestamp},
                 {"user", phones_[phone].raw}};
        if (new_phone) {
            e.new_identity = phones_[*new_phone].ref;
            raw["new_user"] = phones_[*new_phone].raw;
        }
        raw_lines_.push_back(raw.dump());
        events_.push_back(std::move(e));
    }

    std::string emit_message(std::size_t group, std::size_t phone, std::size_t day,
                             std::string text, bool substantive = true) {
        Message m;
        m.msg_id = "m" + zero_pad(msg_counter_++, 8);
        m.group_id = group_id(group);
        m.sender = phones_[phone].ref;
        m.timestamp = stamp(day);
        m.text = std::move(text);
        raw_lines_.push_back(json{{"type", "msg"},
                                  {"id", m.msg_id},
                                  {"group", m.group_id},
                                  {"ts", m.timestamp},
                                  {"sender", phones_[phone].raw},
                                  {"text", m.text}}
                                 .dump());
        const std::string id = m.msg_id;
        messages_.push_back(std::move(m));

        if (substantive) { // low-entropy fillers never count as a real post
            auto& tp = truth_.phones[phones_[phone].ref.key()];
            const std::int64_t eday = to_epoch_day(day);
            if (tp.first_post_day < 0 || eday < tp.first_post_day) tp.first_post_day = eday;
            if (eday > tp.last_post_day) tp.last_post_day = eday;
        }
        return id;
    }

    static std::string group_id(std::size_t g) { return "g" + zero_pad(g, 3); }

    // -- setup ----------------------------------------------------------------

    void load_pools() {
        const std::pair<Lang, const char*> files[] = {{Lang::en, "neutral_en.txt"},
                                                      {Lang::hi, "neutral_hi.txt"},
                                                      {Lang::te, "neutral_te.txt"},
                                                      {Lang::ta, "neutral_ta.txt"}};
        for (const auto& [lang, name] : files) {
            const std::string path = data_dir_ + "/" + name;
            std::ifstream in(path);
            if (!in) throw std::runtime_error("sim: cannot open sentence pool: " + path);
            std::string line;
            auto& pool = pools_[static_cast<std::size_t>(lang)];
            while (std::getline(in, line)) {
                if (!line.empty()) pool.push_back(line);
            }
            if (pool.empty()) throw std::runtime_error("sim: empty sentence pool: " + path);
        }
    }

    void plan_population() {
        n_junk_humans_ = static_cast<std::size_t>(std::llround(
            cfg_.junk_sender_fraction * static_cast<double>(cfg_.n_users)));
        n_campaigns_ = n_junk_humans_ > 0 ? cfg_.campaign.templates : 0;

        // Per-human traits (language, foreign flag) on their own stream.
        human_foreign_.resize(cfg_.n_users, false);
        human_lang_.resize(cfg_.n_users, Lang::en);
        for (std::size_t h = 0; h < cfg_.n_users; ++h) {
            Rng rng(cfg_.seed ^ kTagHuman ^
                    (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(h) + 1)));
            human_foreign_[h] = rng.bern(cfg_.behavior.foreign_junk_prob);
            const double u = rng.u01();
            human_lang_[h] = u < 0.40   ? Lang::hi
                             : u < 0.70 ? Lang::en
                             : u < 0.85 ? Lang::te
                                        : Lang::ta;
        }

        // Legit humans get one stable domestic phone each.
        legit_phone_.assign(cfg_.n_users, static_cast<std::size_t>(-1));
        for (std::size_t h = n_junk_humans_; h < cfg_.n_users; ++h) {
            legit_phone_[h] =
                add_phone("+91" + std::to_string(7000000000ull + h), h, false);
        }
        // Both lists are reserved for junk content; recording them lets tests
        // assert the neutral pools never use a planted token.
        for (const char* word : kJunkVocab) truth_.planted_junk_words.insert(word);
        for (const char* word : kNoiseVocab) truth_.planted_junk_words.insert(word);
    }

    // -- campaigns -------------------------------------------------------------

    struct CampaignPlan {
        std::size_t human = 0;
        std::vector<std::size_t> groups;
        std::vector<std::size_t> days; // offsets from day 0
        std::vector<std::size_t> phone_idx;
        std::vector<std::string> variants;
        bool has_url = false;
        bool has_phone = false;
        std::string domain;
        std::string contact_display;
    };

    std::string render(const std::vector<std::string>& tokens, const CampaignPlan& plan) const {
        std::string text;
        for (const std::string& t : tokens) {
            if (!text.empty()) text += ' ';
            text += t;
        }
        if (plan.has_url) text += " https://" + plan.domain + "/offer";
        if (plan.has_phone) text += " call " + plan.contact_display;
        return text;
    }

    void run_campaigns() {
        std::size_t junk_counter = 0;
        for (std::size_t c = 0; c < n_campaigns_; ++c) {
            Rng rng(cfg_.seed ^ kTagCampaign ^
                    (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(c) + 1)));
            CampaignPlan plan;
            plan.human = c % n_junk_humans_;
            const bool evasive_human = plan.human < cfg_.behavior.evasive_junk_senders;
            const bool seed_campaign = evasive_human && c == plan.human; // first campaign

            for (std::size_t g :
                 rng.sample_distinct(cfg_.n_groups, cfg_.campaign.groups_per_campaign)) {
                plan.groups.push_back(g);
            }

            const std::size_t span = cfg_.campaign.span_days;
            const std::size_t offset = rng.index(cfg_.horizon_days - span + 1);
            std::size_t n_active = std::max<std::size_t>(
                2, static_cast<std::size_t>(
                       std::llround(cfg_.campaign.active_day_prob * static_cast<double>(span))));
            n_active = std::min(n_active, span);
            std::set<std::size_t> days{0, span - 1};
            while (days.size() < n_active) days.insert(1 + rng.index(span - 2));
            for (std::size_t d : days) plan.days.push_back(offset + d);

            const std::size_t P = cfg_.campaign.phones_per_campaign;
            for (std::size_t p = 0; p < P; ++p) {
                const std::string sub = std::to_string(9000000000ull + junk_counter++);
                std::string raw = human_foreign_[plan.human] ? "+7" + sub : sub;
                plan.phone_idx.push_back(add_phone(std::move(raw), plan.human, true));
            }

            plan.has_url = rng.bern(cfg_.behavior.junk_url_prob) || seed_campaign;
            plan.has_phone = rng.bern(cfg_.behavior.junk_phone_prob);
            plan.domain = plan.has_url ? "offers" + zero_pad(c, 3) + ".example" : "";
            if (plan.has_phone) {
                const std::string sub = "88" + zero_pad((c * 37 + 5) % 100000000, 8);
                plan.contact_display = sub.substr(0, 5) + " " + sub.substr(5);
            }
            make_variants(plan, rng);
            emit_campaign(c, plan, rng, seed_campaign);
        }
    }

    void make_variants(CampaignPlan& plan, Rng& rng) {
        std::vector<std::string> tokens;
        for (std::size_t i : rng.sample_distinct(kJunkVocabSize, kTokensPerTemplate)) {
            tokens.push_back(kJunkVocab[i]);
        }
        const std::string base_text = render(tokens, plan);
        const std::vector<std::string> base_shingles = shingle(tokenize(base_text));

        plan.variants.push_back(base_text);
        for (std::size_t v = 1; v < cfg_.campaign.variants_per_template; ++v) {
            std::vector<std::string> cur = tokens;
            std::string accepted = base_text;
            for (std::size_t step = 0; step < kMaxMutationSteps; ++step) {
                std::vector<std::string> cand = cur;
                cand[rng.index(cand.size())] = kNoiseVocab[rng.index(kNoiseVocabSize)];
                const std::string cand_text = render(cand, plan);
                const auto cand_shingles = shingle(tokenize(cand_text));
                if (exact_jaccard(cand_shingles, base_shingles) <
                    cfg_.campaign.mutation_jaccard_floor) {
                    break;
                }
                cur = std::move(cand);
                accepted = cand_text;
            }
            plan.variants.push_back(std::move(accepted));
        }
    }

    void emit_campaign(std::size_t c, CampaignPlan& plan, Rng& rng, bool seed_campaign) {
        TruthCampaign tc;
        tc.id = "camp" + zero_pad(c, 3);
        tc.human = plan.human;
        for (std::size_t g : plan.groups) tc.group_ids.push_back(group_id(g));
        for (std::size_t p : plan.phone_idx) {
            tc.phone_keys.push_back(phones_[p].ref.key());
            auto& tp = truth_.phones[phones_[p].ref.key()];
            tp.campaign_ids.push_back(tc.id);
        }
        for (std::size_t d : plan.days) tc.schedule_days.push_back(to_epoch_day(d));
        tc.has_url = plan.has_url;
        tc.has_phone = plan.has_phone;
        tc.domain = plan.domain;
        if (plan.has_url) truth_.junk_domain_engines[plan.domain] = 0; // filled later
        if (seed_campaign) {
            truth_.evasive_seed_phone_keys.push_back(phones_[plan.phone_idx[0]].ref.key());
        }

        const std::size_t V = plan.variants.size();
        const std::size_t n_active = plan.days.size();
        const std::size_t per_day = V / n_active;
        const std::size_t extra = V % n_active;
        const std::size_t P = plan.phone_idx.size();

        std::map<std::size_t, std::uint64_t> planted_per_day;
        std::size_t variant = 0;
        std::size_t prev_phone_slot = 0;
        std::size_t group_cursor = 0;
        for (std::size_t di = 0; di < n_active && variant < V; ++di) {
            const std::size_t day = plan.days[di];
            const std::size_t slot = std::min(P - 1, di * P / n_active);
            if (slot != prev_phone_slot) {
                // Identity rotation: the outgoing phone "changes number" in
                // every group it still occupies; the new phone re-joins on its
                // first post.
                const std::size_t old_phone = plan.phone_idx[prev_phone_slot];
                const std::size_t new_phone = plan.phone_idx[slot];
                for (std::size_t g : plan.groups) {
                    if (is_member(g, old_phone)) {
                        emit_event(g, old_phone, ActionKind::number_changed, day, new_phone);
                        membership_.erase({g, old_phone});
                    }
                }
                prev_phone_slot = slot;
            }
            const std::size_t phone = plan.phone_idx[slot];
            const std::size_t quota = per_day + (di < extra ? 1 : 0);
            for (std::size_t q = 0; q < quota && variant < V; ++q, ++variant) {
                const std::size_t g = plan.groups[group_cursor++ % plan.groups.size()];
                ensure_member(g, phone, cfg_.behavior.junk_link_join_prob, day, rng);
                std::string id = emit_message(g, phone, day, plan.variants[variant]);
                planted_per_day[day] += 1;
                truth_.junk_msg_ids.insert(id);
                truth_.msg_truth_class[id] = "tmpl:" + std::to_string(c);
                tc.msg_ids.push_back(std::move(id));
                maybe_remove(g, phone, plan, day, rng, seed_campaign);
            }
        }

        // Any phone still in a group may walk away at the end of the schedule.
        const std::size_t last_day = plan.days.back();
        for (std::size_t p : plan.phone_idx) {
            for (std::size_t g : plan.groups) {
                if (is_member(g, p) && rng.bern(cfg_.behavior.junk_leave_prob)) {
                    emit_event(g, p, ActionKind::left, last_day, std::nullopt);
                    membership_.erase({g, p});
                }
            }
        }

        for (const auto& [day, count] : planted_per_day) {
            if (count >= kActiveDayFloor) tc.active_days_expected.push_back(to_epoch_day(day));
        }
        truth_.campaigns.push_back(std::move(tc));
    }

    void maybe_remove(std::size_t group, std::size_t phone, const CampaignPlan& plan,
                      std::size_t day, Rng& rng, bool seed_campaign) {
        if (cfg_.behavior.admin_removal_policy != "after_url_junk" || !plan.has_url) return;
        auto& removed_in = removed_groups_[phone];
        const bool evasive_seed = seed_campaign && phone == plan.phone_idx[0];
        bool fire;
        if (evasive_seed) {
            fire = removed_in.size() < 2 && !removed_in.count(group);
        } else {
            fire = removed_in.empty() && rng.bern(cfg_.behavior.removal_prob);
        }
        if (!fire || !is_member(group, phone)) return;
        emit_event(group, phone, ActionKind::removed, day, std::nullopt);
        membership_.erase({group, phone});
        removed_in.insert(group);
    }

    // -- legit traffic -----------------------------------------------------------

    void run_legit() {
        for (std::size_t h = n_junk_humans_; h < cfg_.n_users; ++h) {
            Rng rng(cfg_.seed ^ kTagLegit ^
                    (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(h) + 1)));
            const std::size_t phone = legit_phone_[h];
            const Lang lang = human_lang_[h];
            const auto& pool = pools_[static_cast<std::size_t>(lang)];

            const std::size_t n_groups_joined = 1 + rng.index(cfg_.legit_groups_max);
            const std::vector<std::size_t> my_groups =
                rng.sample_distinct(cfg_.n_groups, n_groups_joined);

            const std::size_t n_posts =
                std::max<std::size_t>(1, rng.poisson(cfg_.legit_messages_mean));
            const std::size_t d1 = rng.index(cfg_.horizon_days);
            const std::size_t d2 = d1 + rng.index(cfg_.horizon_days - d1);
            std::vector<std::size_t> post_days;
            for (std::size_t i = 0; i < n_posts; ++i) {
                post_days.push_back(d1 + rng.index(d2 - d1 + 1));
            }
            std::sort(post_days.begin(), post_days.end());

            // A forward needs enough ordinary posts around it that the sender
            // stays under any sane junk-fraction threshold.
            const bool forwards = cfg_.behavior.legit_junk_prob > 0.0 && n_posts >= 4 &&
                                  n_campaigns_ > 0 &&
                                  rng.bern(cfg_.behavior.legit_junk_prob);
            const std::size_t forward_campaign = forwards ? rng.index(n_campaigns_) : 0;

            for (std::size_t i = 0; i < post_days.size(); ++i) {
                const std::size_t day = post_days[i];
                const std::size_t g = my_groups[rng.index(my_groups.size())];
                ensure_member(g, phone, cfg_.behavior.legit_link_join_prob, day, rng);
                if (forwards && i + 1 == post_days.size()) {
                    const std::string& text = truth_.campaigns[forward_campaign].msg_ids.empty()
                                                  ? pool[0]
                                                  : forward_text(forward_campaign);
                    std::string id = emit_message(g, phone, day, text);
                    truth_.junk_msg_ids.insert(id);
                    truth_.msg_truth_class[id] =
                        "tmpl:" + std::to_string(forward_campaign);
                    continue;
                }
                const std::size_t si = rng.index(pool.size());
                std::string text = pool[si];
                if (rng.bern(cfg_.behavior.legit_url_prob)) {
                    text += " https://community" + zero_pad(h % kLegitDomainPool, 2) +
                            ".example/info";
                }
                std::string id = emit_message(g, phone, day, std::move(text));
                truth_.msg_truth_class[id] = "pool:" + std::string(lang_name(lang)) + ":" +
                                             std::to_string(si);
            }

            const std::size_t last_day = post_days.back();
            for (std::size_t g : my_groups) {
                if (is_member(g, phone) && rng.bern(cfg_.behavior.legit_leave_prob)) {
                    emit_event(g, phone, ActionKind::left, last_day, std::nullopt);
                    membership_.erase({g, phone});
                }
            }
        }
    }

    const std::string& forward_text(std::size_t campaign) {
        // Variant 0 text = the template itself; recover it from the generated
        // messages via the first campaign message id.
        const std::string& first_id = truth_.campaigns[campaign].msg_ids.front();
        return message_text_by_id(first_id);
    }

    const std::string& message_text_by_id(const std::string& id) {
        if (msg_text_index_.empty()) {
            for (std::size_t i = 0; i < messages_.size(); ++i) {
                msg_text_index_.emplace(messages_[i].msg_id, i);
            }
        }
        auto it = msg_text_index_.find(id);
        if (it == msg_text_index_.end()) {
            throw std::logic_error("sim: unknown message id while forwarding");
        }
        return messages_[it->second].text;
    }

    // -- low-entropy fillers --------------------------------------------------

    void run_fillers() {
        const double rate = cfg_.low_entropy_rate;
        if (rate <= 0.0 || messages_.empty()) return;
        const auto n_fillers = static_cast<std::size_t>(
            std::llround(rate / (1.0 - rate) * static_cast<double>(messages_.size())));
        Rng rng(cfg_.seed ^ kTagFiller);

        std::vector<std::size_t> junk_phones, legit_phones;
        for (std::size_t i = 0; i < phones_.size(); ++i) {
            (phones_[i].junk ? junk_phones : legit_phones).push_back(i);
        }
        const char* kInviteAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

        for (std::size_t i = 0; i < n_fillers; ++i) {
            const std::size_t kind = i % 3;
            std::string text, cls;
            std::size_t phone;
            if (kind == 0 && !junk_phones.empty()) {
                // Bare invite links are a junk-sender habit.
                phone = junk_phones[rng.index(junk_phones.size())];
                text = "https://chat.whatsapp.com/";
                for (int k = 0; k < 12; ++k) text += kInviteAlphabet[rng.index(36)];
                cls = "low:url_only:0";
            } else if (kind == 1) {
                phone = legit_phones.empty() ? junk_phones[rng.index(junk_phones.size())]
                                             : legit_phones[rng.index(legit_phones.size())];
                const std::size_t e = rng.index(std::size(kEmojiFillers));
                text = kEmojiFillers[e];
                cls = "low:emoji_only:" + std::to_string(e);
            } else {
                phone = legit_phones.empty() ? junk_phones[rng.index(junk_phones.size())]
                                             : legit_phones[rng.index(legit_phones.size())];
                const std::size_t b = rng.index(std::size(kBoilerplateFillers));
                text = kBoilerplateFillers[b];
                cls = "low:boilerplate:" + std::to_string(b);
            }
            const std::size_t day = rng.index(cfg_.horizon_days);
            const std::size_t g = rng.index(cfg_.n_groups);
            const double link_prob = phones_[phone].junk ? cfg_.behavior.junk_link_join_prob
                                                         : cfg_.behavior.legit_link_join_prob;
            ensure_member(g, phone, link_prob, day, rng);
            std::string id = emit_message(g, phone, day, std::move(text), /*substantive=*/false);
            truth_.low_entropy_msg_ids.insert(id);
            truth_.msg_truth_class[id] = std::move(cls);
        }
    }

    // -- reputation map ---------------------------------------------------------

    void build_reputation() {
        std::vector<std::string> junk_domains;
        for (const auto& [domain, engines] : truth_.junk_domain_engines) {
            junk_domains.push_back(domain);
        }
        Rng rng(cfg_.seed ^ kTagReputation);
        std::vector<std::size_t> order = rng.sample_distinct(junk_domains.size(),
                                                             junk_domains.size());
        const auto n = junk_domains.size();
        auto k9 = static_cast<std::size_t>(
            std::llround(cfg_.behavior.flagged9_junk_domain_rate * static_cast<double>(n)));
        auto k3 = static_cast<std::size_t>(
            std::llround(cfg_.behavior.flagged3_junk_domain_rate * static_cast<double>(n)));
        k3 = std::max(k3, k9); // the >=3 bucket contains the >=9 bucket

        std::map<std::string, int> engines_of;
        for (std::size_t rank = 0; rank < n; ++rank) {
            const std::string& domain = junk_domains[order[rank]];
            int engines;
            if (rank < k9) {
                engines = 9 + static_cast<int>(rank % 4);
            } else if (rank < k3) {
                engines = 3 + static_cast<int>(rank % 6);
            } else {
                engines = static_cast<int>(rank % 3);
            }
            engines_of[domain] = engines;
        }
        for (auto& [domain, engines] : truth_.junk_domain_engines) {
            engines = engines_of[domain];
        }
        std::size_t idx = 0;
        for (const auto& [domain, engines] : truth_.junk_domain_engines) {
            reputation_lines_.push_back(
                domain + "\t" +
                kJunkCategories[idx++ % std::size(kJunkCategories)] + "\t" +
                std::to_string(engines));
        }
        for (std::size_t k = 0; k < kLegitDomainPool; ++k) {
            reputation_lines_.push_back("community" + zero_pad(k, 2) + ".example\tcommunity\t" +
                                        std::to_string(k % 3));
        }
    }

    // -- assembly ----------------------------------------------------------------

    SimResult assemble() {
        SimResult result;
        result.config = cfg_;
        result.raw_lines = std::move(raw_lines_);
        result.reputation_lines = std::move(reputation_lines_);

        for (const SimPhone& ph : phones_) {
            auto& tp = truth_.phones[ph.ref.key()]; // created here if it never posted
            tp.country_code = ph.ref.country_code;
            tp.digest = ph.ref.digest;
            tp.raw = ph.raw;
            tp.human = ph.human;
            tp.junk = ph.junk;
        }
        truth_.seed = cfg_.seed;
        result.truth = std::move(truth_);

        result.corpus.messages = std::move(messages_);
        result.corpus.events = std::move(events_);
        result.corpus.finalize();
        return result;
    }

    SimConfig cfg_;
    Anonymizer anon_;
    std::string data_dir_;

    std::array<std::vector<std::string>, 5> pools_;
    std::vector<SimPhone> phones_;
    std::vector<std::size_t> legit_phone_;
    std::vector<bool> human_foreign_;
    std::vector<Lang> human_lang_;
    std::size_t n_junk_humans_ = 0;
    std::size_t n_campaigns_ = 0;

    std::set<std::pair<std::size_t, std::size_t>> membership_; // (group, phone)
    std::map<std::size_t, std::set<std::size_t>> removed_groups_;
    std::map<std::size_t, std::int64_t> day_seq_;
    std::size_t msg_counter_ = 0;

    std::vector<Message> messages_;
    std::vector<ActionEvent> events_;
    std::vector<std::string> raw_lines_;
    std::vector<std::string> reputation_lines_;
    std::unordered_map<std::string, std::size_t> msg_text_index_;
    GroundTruth truth_;
};

} // namespace

SimResult generate(const SimConfig& cfg, const std::string& data_dir) {
    Generator gen(cfg, data_dir);
    return gen.run();
}

void write_lines(const std::vector<std::string>& lines, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const std::string& line : lines) out << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Config / truth serialization.
// ---------------------------------------------------------------------------

json SimConfig::to_json() const {
    return json{
        {"n_groups", n_groups},
        {"n_users", n_users},
        {"junk_sender_fraction", junk_sender_fraction},
        {"campaign",
         {{"templates", campaign.templates},
          {"variants_per_template", campaign.variants_per_template},
          {"mutation_jaccard_floor", campaign.mutation_jaccard_floor},
          {"phones_per_campaign", campaign.phones_per_campaign},
          {"active_day_prob", campaign.active_day_prob},
          {"span_days", campaign.span_days},
          {"groups_per_campaign", campaign.groups_per_campaign}}},
        {"behavior",
         {{"junk_link_join_prob", behavior.junk_link_join_prob},
          {"legit_link_join_prob", behavior.legit_link_join_prob},
          {"admin_removal_policy", behavior.admin_removal_policy},
          {"evasive_junk_senders", behavior.evasive_junk_senders},
          {"removal_prob", behavior.removal_prob},
          {"foreign_junk_prob", behavior.foreign_junk_prob},
          {"junk_url_prob", behavior.junk_url_prob},
          {"junk_phone_prob", behavior.junk_phone_prob},
          {"legit_url_prob", behavior.legit_url_prob},
          {"legit_junk_prob", behavior.legit_junk_prob},
          {"junk_leave_prob", behavior.junk_leave_prob},
          {"legit_leave_prob", behavior.legit_leave_prob},
          {"flagged3_junk_domain_rate", behavior.flagged3_junk_domain_rate},
          {"flagged9_junk_domain_rate", behavior.flagged9_junk_domain_rate}}},
        {"low_entropy_rate", low_entropy_rate},
        {"seed", seed},
        {"horizon_days", horizon_days},
        {"legit_messages_mean", legit_messages_mean},
        {"legit_groups_max", legit_groups_max},
        {"salt", salt}};
}

SimConfig SimConfig::from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("sim config: not a JSON object");
    SimConfig cfg;
    cfg.n_groups = j.value("n_groups", cfg.n_groups);
    cfg.n_users = j.value("n_users", cfg.n_users);
    cfg.junk_sender_fraction = j.value("junk_sender_fraction", cfg.junk_sender_fraction);
    if (j.contains("campaign")) {
        const json& c = j.at("campaign");
        cfg.campaign.templates = c.value("templates", cfg.campaign.templates);
        cfg.campaign.variants_per_template =
            c.value("variants_per_template", cfg.campaign.variants_per_template);
        cfg.campaign.mutation_jaccard_floor =
            c.value("mutation_jaccard_floor", cfg.campaign.mutation_jaccard_floor);
        cfg.campaign.phones_per_campaign =
            c.value("phones_per_campaign", cfg.campaign.phones_per_campaign);
        cfg.campaign.active_day_prob = c.value("active_day_prob", cfg.campaign.active_day_prob);
        cfg.campaign.span_days = c.value("span_days", cfg.campaign.span_days);
        cfg.campaign.groups_per_campaign =
            c.value("groups_per_campaign", cfg.campaign.groups_per_campaign);
    }
    if (j.contains("behavior")) {
        const json& b = j.at("behavior");
        cfg.behavior.junk_link_join_prob =
            b.value("junk_link_join_prob", cfg.behavior.junk_link_join_prob);
        cfg.behavior.legit_link_join_prob =
            b.value("legit_link_join_prob", cfg.behavior.legit_link_join_prob);
        cfg.behavior.admin_removal_policy =
            b.value("admin_removal_policy", cfg.behavior.admin_removal_policy);
        cfg.behavior.evasive_junk_senders =
            b.value("evasive_junk_senders", cfg.behavior.evasive_junk_senders);
        cfg.behavior.removal_prob = b.value("removal_prob", cfg.behavior.removal_prob);
        cfg.behavior.foreign_junk_prob =
            b.value("foreign_junk_prob", cfg.behavior.foreign_junk_prob);
        cfg.behavior.junk_url_prob = b.value("junk_url_prob", cfg.behavior.junk_url_prob);
        cfg.behavior.junk_phone_prob = b.value("junk_phone_prob", cfg.behavior.junk_phone_prob);
        cfg.behavior.legit_url_prob = b.value("legit_url_prob", cfg.behavior.legit_url_prob);
        cfg.behavior.legit_junk_prob = b.value("legit_junk_prob", cfg.behavior.legit_junk_prob);
        cfg.behavior.junk_leave_prob = b.value("junk_leave_prob", cfg.behavior.junk_leave_prob);
        cfg.behavior.legit_leave_prob =
            b.value("legit_leave_prob", cfg.behavior.legit_leave_prob);
        cfg.behavior.flagged3_junk_domain_rate =
            b.value("flagged3_junk_domain_rate", cfg.behavior.flagged3_junk_domain_rate);
        cfg.behavior.flagged9_junk_domain_rate =
            b.value("flagged9_junk_domain_rate", cfg.behavior.flagged9_junk_domain_rate);
    }
    cfg.low_entropy_rate = j.value("low_entropy_rate", cfg.low_entropy_rate);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.horizon_days = j.value("horizon_days", cfg.horizon_days);
    cfg.legit_messages_mean = j.value("legit_messages_mean", cfg.legit_messages_mean);
    cfg.legit_groups_max = j.value("legit_groups_max", cfg.legit_groups_max);
    cfg.salt = j.value("salt", cfg.salt);
    return cfg;
}

namespace {

json phone_to_json(const TruthPhone& p) {
    return json{{"cc", p.country_code},   {"digest", p.digest},
                {"raw", p.raw},           {"human", p.human},
                {"junk", p.junk},         {"campaigns", p.campaign_ids},
                {"first_post_day", p.first_post_day}, {"last_post_day", p.last_post_day}};
}

TruthPhone phone_from_json(const json& j) {
    TruthPhone p;
    p.country_code = j.at("cc").get<std::string>();
    p.digest = j.at("digest").get<std::string>();
    p.raw = j.at("raw").get<std::string>();
    p.human = j.at("human").get<std::size_t>();
    p.junk = j.at("junk").get<bool>();
    p.campaign_ids = j.at("campaigns").get<std::vector<std::string>>();
    p.first_post_day = j.at("first_post_day").get<std::int64_t>();
    p.last_post_day = j.at("last_post_day").get<std::int64_t>();
    return p;
}

json campaign_to_json(const TruthCampaign& c) {
    return json{{"id", c.id},
                {"human", c.human},
                {"groups", c.group_ids},
                {"phones", c.phone_keys},
                {"schedule_days", c.schedule_days},
                {"active_days_expected", c.active_days_expected},
                {"msg_ids", c.msg_ids},
                {"domain", c.domain},
                {"has_url", c.has_url},
                {"has_phone", c.has_phone}};
}

TruthCampaign campaign_from_json(const json& j) {
    TruthCampaign c;
    c.id = j.at("id").get<std::string>();
    c.human = j.at("human").get<std::size_t>();
    c.group_ids = j.at("groups").get<std::vector<std::string>>();
    c.phone_keys = j.at("phones").get<std::vector<std::string>>();
    c.schedule_days = j.at("schedule_days").get<std::vector<std::int64_t>>();
    c.active_days_expected = j.at("active_days_expected").get<std::vector<std::int64_t>>();
    c.msg_ids = j.at("msg_ids").get<std::vector<std::string>>();
    c.domain = j.at("domain").get<std::string>();
    c.has_url = j.at("has_url").get<bool>();
    c.has_phone = j.at("has_phone").get<bool>();
    return c;
}

} // namespace

json GroundTruth::to_json() const {
    json jphones = json::object();
    for (const auto& [key, phone] : phones) jphones[key] = phone_to_json(phone);
    json jcampaigns = json::array();
    for (const TruthCampaign& c : campaigns) jcampaigns.push_back(campaign_to_json(c));
    return json{{"seed", seed},
                {"phones", std::move(jphones)},
                {"campaigns", std::move(jcampaigns)},
                {"low_entropy_msg_ids", low_entropy_msg_ids},
                {"junk_msg_ids", junk_msg_ids},
                {"evasive_seed_phone_keys", evasive_seed_phone_keys},
                {"planted_junk_words", planted_junk_words},
                {"junk_domain_engines", junk_domain_engines},
                {"msg_truth_class", msg_truth_class}};
}

GroundTruth GroundTruth::from_json(const json& j) {
    GroundTruth t;
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("phones").items()) {
        t.phones[key] = phone_from_json(value);
    }
    for (const json& jc : j.at("campaigns")) t.campaigns.push_back(campaign_from_json(jc));
    t.low_entropy_msg_ids = j.at("low_entropy_msg_ids").get<std::set<std::string>>();
    t.junk_msg_ids = j.at("junk_msg_ids").get<std::set<std::string>>();
    t.evasive_seed_phone_keys =
        j.at("evasive_seed_phone_keys").get<std::vector<std::string>>();
    t.planted_junk_words = j.at("planted_junk_words").get<std::set<std::string>>();
    t.junk_domain_engines = j.at("junk_domain_engines").get<std::map<std::string, int>>();
    t.msg_truth_class = j.at("msg_truth_class").get<std::map<std::string, std::string>>();
    return t;
}

} // namespace groupsift
