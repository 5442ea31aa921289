#include "groupsift/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace groupsift {

std::set<UserRef> seed_users(std::span<const ActionEvent> events, int min_groups) {
    std::map<UserRef, std::set<std::string>> removed_from;
    for (const auto& e : events) {
        if (e.kind == ActionKind::removed) removed_from[e.subject].insert(e.group_id);
    }
    std::set<UserRef> out;
    for (const auto& [user, groups] : removed_from) {
        if (groups.size() >= static_cast<std::size_t>(min_groups)) out.insert(user);
    }
    return out;
}

CurationList CurationList::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curation list: " + path);
    CurationList cl;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '-') {
            cl.deny.insert(line.substr(1));
        } else if (line.front() == '+') {
            cl.allow.insert(line.substr(1));
        } else {
            cl.allow.insert(line);
        }
    }
    return cl;
}

JunkDictionary build_dictionary(std::span<const TokenizedMessage> junk_messages,
                                const StopwordTable& stopwords, int min_count,
                                const CurationList* curation) {
    if (junk_messages.empty()) {
        throw std::invalid_argument("build_dictionary: empty junk message set");
    }
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& m : junk_messages) {
        for (const auto& t : m.tokens) ++counts[t];
    }
    JunkDictionary dict;
    dict.min_count = min_count;
    for (const auto& [word, count] : counts) {
        if (count < static_cast<std::uint64_t>(min_count)) continue;
        if (stopwords.contains_any(word)) continue;
        if (curation && curation->deny.count(word)) continue;
        dict.words.insert(word);
    }
    if (curation) {
        for (const auto& w : curation->allow) {
            if (!curation->deny.count(w)) dict.words.insert(w);
        }
    }
    return dict;
}

std::string_view label_source_name(LabelSource s) {
    switch (s) {
        case LabelSource::seed_manual: return "seed_manual";
        case LabelSource::dictionary_candidate: return "dictionary_candidate";
        case LabelSource::external: return "external";
    }
    return "seed_manual";
}

std::vector<LabeledCluster> seed_label(
    std::span<const MessageCluster> clusters, const std::set<UserRef>& seeds,
    const std::unordered_map<std::string, std::string>& msg_to_sender_key) {
    std::unordered_set<std::string> seed_keys;
    for (const auto& u : seeds) seed_keys.insert(u.key());

    std::vector<LabeledCluster> out;
    for (const auto& c : clusters) {
        for (const auto& id : c.member_msg_ids) {
            auto it = msg_to_sender_key.find(id);
            if (it != msg_to_sender_key.end() && seed_keys.count(it->second)) {
                out.push_back(LabeledCluster{c.cluster_id, true, LabelSource::seed_manual});
                break;
            }
        }
    }
    return out;
}

std::vector<LabeledCluster> dictionary_label(
    std::span<const MessageCluster> clusters, const JunkDictionary& dict,
    const std::unordered_map<std::string, const TokenizedMessage*>& tokens_by_msg) {
    std::vector<LabeledCluster> out;
    for (const auto& c : clusters) {
        bool hit = false;
        for (const auto& id : c.member_msg_ids) {
            auto it = tokens_by_msg.find(id);
            if (it == tokens_by_msg.end()) continue;
            for (const auto& t : it->second->tokens) {
                if (dict.words.count(t)) {
                    hit = true;
                    break;
                }
            }
            if (hit) break;
        }
        if (hit) {
            out.push_back(LabeledCluster{c.cluster_id, true, LabelSource::dictionary_candidate});
        }
    }
    return out;
}

std::vector<LabeledCluster> merge_labels(std::span<const LabeledCluster> seed_labels,
                                         std::span<const LabeledCluster> dict_labels) {
    std::map<std::string, LabeledCluster> by_id;
    for (const auto& l : dict_labels) by_id[l.cluster_id] = l;
    for (const auto& l : seed_labels) by_id[l.cluster_id] = l; // seed wins
    std::vector<LabeledCluster> out;
    out.reserve(by_id.size());
    for (auto& [id, l] : by_id) out.push_back(std::move(l));
    return out;
}

std::vector<std::pair<std::string, bool>> load_review_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open review file: " + path);
    std::vector<std::pair<std::string, bool>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error("review file " + path + ": line " + std::to_string(line_no) +
                                     " needs cluster_id<TAB>junk|non_junk");
        }
        std::string verdict = line.substr(tab + 1);
        if (verdict != "junk" && verdict != "non_junk") {
            throw std::runtime_error("review file " + path + ": line " + std::to_string(line_no) +
                                     " has verdict '" + verdict + "' (want junk|non_junk)");
        }
        out.emplace_back(line.substr(0, tab), verdict == "junk");
    }
    return out;
}

void apply_review(std::vector<LabeledCluster>& labels,
                  std::span<const std::pair<std::string, bool>> review) {
    std::map<std::string, bool> decisions;
    for (const auto& [id, junk] : review) decisions[id] = junk;

    for (auto& l : labels) {
        auto it = decisions.find(l.cluster_id);
        if (it != decisions.end()) {
            l.junk = it->second;
            l.source = LabelSource::external;
            decisions.erase(it);
        }
    }
    // Reviewed clusters that had no automatic label get one now.
    for (const auto& [id, junk] : decisions) {
        labels.push_back(LabeledCluster{id, junk, LabelSource::external});
    }
    std::sort(labels.begin(), labels.end(),
              [](const LabeledCluster& a, const LabeledCluster& b) {
                  return a.cluster_id < b.cluster_id;
              });
}

VerdictParams VerdictParams::from_decimal(const std::string& text) {
    std::size_t dot = text.find('.');
    std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
    std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
    if (whole.empty()) whole = "0";
    for (char c : whole + frac) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad threshold: " + text);
    }
    if (frac.size() > 9) frac = frac.substr(0, 9);
    VerdictParams p;
    p.threshold_den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) p.threshold_den *= 10;
    p.threshold_num = std::stoll(whole) * p.threshold_den + (frac.empty() ? 0 : std::stoll(frac));
    return p;
}

std::vector<SenderVerdict> sender_verdicts(
    std::span<const Message> messages,
    const std::unordered_map<std::string, std::string>& msg_to_cluster,
    std::span<const LabeledCluster> labels, const VerdictParams& params) {
    if (params.threshold_den <= 0 || params.threshold_num < 0) {
        throw std::invalid_argument("verdict threshold must be a non-negative rational");
    }
    std::unordered_map<std::string, bool> junk_cluster;
    for (const auto& l : labels) junk_cluster[l.cluster_id] = l.junk;

    struct Tally {
        UserRef user;
        std::uint64_t total = 0, junk = 0;
    };
    std::map<std::string, Tally> tallies; // keyed by user key -> sorted output
    for (const auto& m : messages) {
        auto it = msg_to_cluster.find(m.msg_id);
        if (it == msg_to_cluster.end()) continue; // not clustered: out of scope
        Tally& t = tallies[m.sender.key()];
        t.user = m.sender;
        ++t.total;
        auto lab = junk_cluster.find(it->second);
        if (lab != junk_cluster.end() && lab->second) ++t.junk;
    }

    std::vector<SenderVerdict> out;
    out.reserve(tallies.size());
    for (const auto& [key, t] : tallies) {
        SenderVerdict v;
        v.user = t.user;
        v.total_messages = t.total;
        v.junk_messages = t.junk;
        v.junk_fraction = static_cast<double>(t.junk) / static_cast<double>(t.total);
        // Exact rational comparison keeps the strict inequality honest at the
        // boundary (e.g. 5/10 at threshold 0.5 is NOT junk).
        v.is_junk_sender = static_cast<std::int64_t>(t.junk) * params.threshold_den >
                           params.threshold_num * static_cast<std::int64_t>(t.total);
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace groupsift
