#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "groupsift/corpus.hpp"
#include "groupsift/util/hash.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_set>

using namespace groupsift;

// Digest oracles frozen from an independent recomputation:
//   sha256("9876543210" + "s")
//   sha256("7000000001" + "pepper")
static const char* kDigest9876_s =
    "05ba91486a77dcd6f6005cc229f85b2b6205337350895a655d3374f28c9b1b91";
static const char* kDigest7000_pepper =
    "4901a79161911c3900495ad8bcc14bf269a0088ab7ce5c0327f2b1214e0ff87f";

TEST_CASE("sha256_hex matches frozen vectors") {
    CHECK(util::sha256_hex("9876543210s") == kDigest9876_s);
    CHECK(util::sha256_hex("7000000001pepper") == kDigest7000_pepper);
    // Standard library test vector: the empty string.
    CHECK(util::sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("anonymize international number keeps country code, hashes subscriber") {
    Anonymizer anon("s");
    UserRef u = anon.anonymize("+919876543210");
    CHECK(u.country_code == "91");
    CHECK(u.digest == kDigest9876_s);
    CHECK(u.key() == std::string("91:") + kDigest9876_s);
}

TEST_CASE("anonymize bare 10-digit number uses the domestic default") {
    Anonymizer anon("s");
    UserRef u = anon.anonymize("9876543210");
    CHECK(u.country_code == "91");
    CHECK(u.digest == kDigest9876_s); // same subscriber -> same digest

    Anonymizer ru("s", "7");
    CHECK(ru.anonymize("9876543210").country_code == "7");
}

TEST_CASE("anonymize strips separators before parsing") {
    Anonymizer anon("pepper");
    UserRef spaced = anon.anonymize("+91 70000 00001");
    UserRef dashed = anon.anonymize("+91-7000000001");
    UserRef plain = anon.anonymize("+917000000001");
    CHECK(spaced == plain);
    CHECK(dashed == plain);
    CHECK(plain.digest == kDigest7000_pepper);
}

TEST_CASE("anonymize is deterministic and salt-sensitive") {
    Anonymizer a("salt-a"), b("salt-b");
    CHECK(a.anonymize("+917000000001") == a.anonymize("+917000000001"));
    CHECK(a.anonymize("+917000000001").digest != b.anonymize("+917000000001").digest);
}

TEST_CASE("anonymize rejects malformed input") {
    Anonymizer anon("s");
    CHECK_THROWS_AS(anon.anonymize("+7"), std::invalid_argument);     // no subscriber part
    CHECK_THROWS_AS(anon.anonymize(""), std::invalid_argument);
    CHECK_THROWS_AS(anon.anonymize("12345"), std::invalid_argument);  // not 10 digits, no '+'
    CHECK_THROWS_AS(anon.anonymize("+999123456789"), std::invalid_argument); // unassigned cc
    CHECK_THROWS_AS(anon.anonymize("98765x3210"), std::invalid_argument);
}

TEST_CASE("split_e164 finds the longest assigned prefix") {
    auto check_cc = [](std::string_view digits, std::string_view cc) {
        auto split = split_e164(digits);
        REQUIRE(split.has_value());
        CHECK(split->first == cc);
        CHECK(split->second == digits.substr(cc.size()));
    };
    check_cc("919876543210", "91");  // India
    check_cc("12025550123", "1");    // NANP
    check_cc("447911123456", "44");  // UK
    check_cc("79031234567", "7");    // Russia/Kazakhstan
    check_cc("35981234567", "359");  // Bulgaria: 3-digit wins over no 2-digit "35"
    check_cc("9715012345678", "971"); // UAE
    CHECK_FALSE(split_e164("0123456789").has_value()); // "0" never assigned
    CHECK_FALSE(split_e164("91").has_value());          // empty subscriber part
    CHECK_FALSE(split_e164("").has_value());
}

TEST_CASE("digest is injective over distinct subscribers at test scale") {
    Anonymizer anon("inj");
    std::mt19937_64 rng(7);
    std::unordered_set<std::string> digests;
    std::unordered_set<std::uint64_t> subscribers;
    const std::size_t n = 20000;
    while (subscribers.size() < n) {
        // 10-digit numbers starting 6-9, the domestic convention.
        std::uint64_t sub = 6000000000ull + rng() % 4000000000ull;
        if (!subscribers.insert(sub).second) continue;
        digests.insert(anon.digest_subscriber(std::to_string(sub)));
    }
    CHECK(digests.size() == n);
}

namespace {

IngestResult ingest_text(const std::string& text, const std::string& salt = "s") {
    std::istringstream in(text);
    Anonymizer anon(salt);
    return ingest_stream(in, anon);
}

} // namespace

TEST_CASE("ingest: three valid message lines produce three messages, no events") {
    auto r = ingest_text(
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":100,"text":"hello"})"
        "\n"
        R"({"type":"msg","id":"m2","group":"g1","sender":"+919876543210","ts":200,"text":"there"})"
        "\n"
        R"({"type":"msg","id":"m3","group":"g2","sender":"+917000000001","ts":300,"text":"again"})"
        "\n");
    CHECK(r.errors.empty());
    CHECK(r.corpus.messages.size() == 3);
    CHECK(r.corpus.events.empty());
    CHECK(r.corpus.groups == std::set<std::string>{"g1", "g2"});
}

TEST_CASE("ingest anonymizes raw sender numbers with the given salt") {
    auto r = ingest_text(
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":100,"text":"x"})"
        "\n");
    REQUIRE(r.corpus.messages.size() == 1);
    CHECK(r.corpus.messages[0].sender.country_code == "91");
    CHECK(r.corpus.messages[0].sender.digest == kDigest9876_s);
}

TEST_CASE("ingest: unknown action kind is reported per line and skipped") {
    auto r = ingest_text(
        R"({"type":"act","group":"g1","user":"+919876543210","kind":"kicked","ts":100})"
        "\n"
        R"({"type":"act","group":"g1","user":"+919876543210","kind":"removed","ts":200})"
        "\n");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].line_no == 1);
    CHECK(r.errors[0].field == "kind");
    CHECK(r.errors[0].reason.find("unknown action kind") != std::string::npos);
    REQUIRE(r.corpus.events.size() == 1);
    CHECK(r.corpus.events[0].kind == ActionKind::removed);
}

TEST_CASE("ingest validation: errors carry line number and field, lines are skipped") {
    auto r = ingest_text(
        "not json\n"
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":0,"text":"x"})"
        "\n"
        R"({"type":"msg","id":"m2","group":"g1","sender":"+919876543210","ts":5,"text":""})"
        "\n"
        R"({"type":"act","group":"g1","user":"+919876543210","kind":"number_changed","ts":9})"
        "\n"
        R"({"type":"msg","id":"m3","group":"g1","sender":"+919876543210","ts":7,"text":"ok"})"
        "\n");
    REQUIRE(r.errors.size() == 4);
    CHECK(r.errors[0].line_no == 1);
    CHECK(r.errors[0].field == "json");
    CHECK(r.errors[1].line_no == 2);
    CHECK(r.errors[1].field == "ts");
    CHECK(r.errors[2].line_no == 3);
    CHECK(r.errors[2].field == "text");
    CHECK(r.errors[3].line_no == 4);
    CHECK(r.errors[3].field == "new_user");
    REQUIRE(r.corpus.messages.size() == 1);
    CHECK(r.corpus.messages[0].msg_id == "m3");
}

TEST_CASE("ingest: duplicate message ids are rejected") {
    auto r = ingest_text(
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":1,"text":"a"})"
        "\n"
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":2,"text":"b"})"
        "\n");
    CHECK(r.corpus.messages.size() == 1);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].field == "id");
}

TEST_CASE("ingest: empty text allowed only with the media placeholder flag") {
    auto r = ingest_text(
        R"({"type":"msg","id":"m1","group":"g1","sender":"+919876543210","ts":1,"text":"","media":true})"
        "\n");
    CHECK(r.errors.empty());
    REQUIRE(r.corpus.messages.size() == 1);
    CHECK(r.corpus.messages[0].media_placeholder);
}

TEST_CASE("ingest sorts by timestamp with stable id tie-break") {
    auto r = ingest_text(
        R"({"type":"msg","id":"mB","group":"g1","sender":"+919876543210","ts":200,"text":"b"})"
        "\n"
        R"({"type":"act","group":"g1","user":"+919876543210","kind":"left","ts":150})"
        "\n"
        R"({"type":"msg","id":"mA","group":"g1","sender":"+919876543210","ts":100,"text":"a"})"
        "\n"
        R"({"type":"msg","id":"mC","group":"g1","sender":"+919876543210","ts":100,"text":"c"})"
        "\n");
    REQUIRE(r.corpus.messages.size() == 3);
    CHECK(r.corpus.messages[0].msg_id == "mA"); // ts 100, id tie-break
    CHECK(r.corpus.messages[1].msg_id == "mC");
    CHECK(r.corpus.messages[2].msg_id == "mB");
    REQUIRE(r.corpus.events.size() == 1);
    CHECK(r.corpus.events[0].timestamp == 150);
}

TEST_CASE("canonical serialization is a fixed point under re-ingest") {
    auto first = ingest_text(
        R"({"type":"msg","id":"m2","group":"g1","sender":"+919876543210","ts":50,"text":"नमस्ते दोस्तों"})"
        "\n"
        R"({"type":"msg","id":"m1","group":"g2","sender":"9031234567","ts":10,"text":"hello there"})"
        "\n"
        R"({"type":"act","group":"g1","user":"+919876543210","kind":"number_changed","ts":60,"new_user":"+917000000001"})"
        "\n"
        R"({"type":"act","group":"g2","user":"+917000000001","kind":"joined_via_link","ts":5})"
        "\n");
    REQUIRE(first.errors.empty());

    std::ostringstream out;
    write_corpus(first.corpus, out);
    const std::string canonical = out.str();

    // Re-ingest: the salt is irrelevant for already-canonical senders.
    auto second = ingest_text(canonical, "different-salt");
    CHECK(second.errors.empty());
    CHECK(second.corpus == first.corpus);

    // And serializing again yields the same bytes.
    std::ostringstream out2;
    write_corpus(second.corpus, out2);
    CHECK(out2.str() == canonical);
}

TEST_CASE("finalize rebuilds the group set and sorts both lists") {
    Corpus c;
    Anonymizer anon("s");
    UserRef u = anon.anonymize("+919876543210");
    c.messages.push_back({"m2", "gB", u, 300, "later", false, std::nullopt});
    c.messages.push_back({"m1", "gA", u, 100, "earlier", false, std::nullopt});
    c.events.push_back({"gC", u, ActionKind::left, 250, std::nullopt});
    c.finalize();
    CHECK(c.messages[0].msg_id == "m1");
    CHECK(c.messages[1].msg_id == "m2");
    CHECK(c.groups == std::set<std::string>{"gA", "gB", "gC"});
}

TEST_CASE("lang and action-kind names round-trip") {
    for (Lang l : {Lang::hi, Lang::en, Lang::te, Lang::ta, Lang::other}) {
        auto parsed = lang_from_name(lang_name(l));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == l);
    }
    for (ActionKind k :
         {ActionKind::added, ActionKind::added_by_admin, ActionKind::joined_via_link,
          ActionKind::left, ActionKind::removed, ActionKind::number_changed}) {
        auto parsed = action_kind_from_name(action_kind_name(k));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == k);
    }
    CHECK_FALSE(lang_from_name("xx").has_value());
    CHECK_FALSE(action_kind_from_name("kicked").has_value());
}
