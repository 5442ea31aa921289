#include "groupsift/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace groupsift {

namespace {

std::unordered_map<std::string_view, std::size_t> index_messages(const Corpus& corpus) {
    std::unordered_map<std::string_view, std::size_t> by_id;
    by_id.reserve(corpus.messages.size());
    for (std::size_t i = 0; i < corpus.messages.size(); ++i) {
        by_id.emplace(corpus.messages[i].msg_id, i);
    }
    return by_id;
}

constexpr std::size_t kColUnknown = 3;

bool is_join_kind(ActionKind k) {
    return k == ActionKind::joined_via_link || k == ActionKind::added ||
           k == ActionKind::added_by_admin;
}

std::size_t join_col(ActionKind k) {
    switch (k) {
        case ActionKind::joined_via_link: return 0;
        case ActionKind::added: return 1;
        case ActionKind::added_by_admin: return 2;
        default: return kColUnknown;
    }
}

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

std::ofstream open_tsv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

} // namespace

std::vector<ClusterTimeline> build_timelines(const Corpus& corpus,
                                             const std::vector<MessageCluster>& clusters) {
    const auto by_id = index_messages(corpus);
    std::vector<ClusterTimeline> timelines;
    timelines.reserve(clusters.size());
    for (const MessageCluster& c : clusters) {
        ClusterTimeline t;
        t.cluster_id = c.cluster_id;
        bool first = true;
        for (const std::string& msg_id : c.member_msg_ids) {
            auto it = by_id.find(msg_id);
            if (it == by_id.end()) {
                throw std::invalid_argument("build_timelines: cluster member not in corpus: " +
                                            msg_id);
            }
            const Message& m = corpus.messages[it->second];
            const std::int64_t day = epoch_day(m.timestamp);
            t.daily_counts[day] += 1;
            t.senders_per_day[day].insert(m.sender.key());
            t.all_senders.insert(m.sender.key());
            if (first || day < t.first_day) t.first_day = day;
            if (first || day > t.last_day) t.last_day = day;
            first = false;
        }
        timelines.push_back(std::move(t));
    }
    return timelines;
}

std::int64_t cluster_lifetime_days(const ClusterTimeline& t) {
    return t.last_day - t.first_day;
}

ActiveDays active_days(const ClusterTimeline& t, std::uint64_t min_msgs) {
    ActiveDays out;
    for (const auto& [day, count] : t.daily_counts) {
        if (count >= min_msgs) ++out.count;
    }
    const auto span = static_cast<double>(cluster_lifetime_days(t) + 1);
    if (!t.daily_counts.empty()) out.fraction = static_cast<double>(out.count) / span;
    return out;
}

std::vector<double> phones_active_fraction(const ClusterTimeline& t, std::uint64_t min_msgs) {
    std::vector<double> fractions;
    if (t.all_senders.empty()) return fractions;
    for (const auto& [day, count] : t.daily_counts) {
        if (count < min_msgs) continue;
        auto it = t.senders_per_day.find(day);
        const double senders =
            it == t.senders_per_day.end() ? 0.0 : static_cast<double>(it->second.size());
        fractions.push_back(senders / static_cast<double>(t.all_senders.size()));
    }
    return fractions;
}

std::vector<UserLifetime> user_lifetimes(const Corpus& corpus) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
    auto touch = [&](const UserRef& u, std::int64_t ts) {
        const std::int64_t day = epoch_day(ts);
        auto [it, inserted] = spans.try_emplace(u.key(), day, day);
        if (!inserted) {
            it->second.first = std::min(it->second.first, day);
            it->second.second = std::max(it->second.second, day);
        }
    };
    for (const Message& m : corpus.messages) touch(m.sender, m.timestamp);
    for (const ActionEvent& e : corpus.events) {
        touch(e.subject, e.timestamp);
        if (e.new_identity) touch(*e.new_identity, e.timestamp);
    }
    std::vector<UserLifetime> out;
    out.reserve(spans.size());
    for (const auto& [key, span] : spans) out.push_back({key, span.first, span.second});
    return out;
}

const std::array<std::string_view, 3>& JoinLeaveTable::row_names() {
    static const std::array<std::string_view, 3> names = {"left", "number_changed", "removed"};
    return names;
}

const std::array<std::string_view, 4>& JoinLeaveTable::col_names() {
    static const std::array<std::string_view, 4> names = {"joined_via_link", "added",
                                                          "added_by_admin", "unknown"};
    return names;
}

std::array<double, 4> JoinLeaveTable::normalize(const std::array<std::uint64_t, 4>& row) {
    std::array<double, 4> out{};
    std::uint64_t total = 0;
    for (std::uint64_t v : row) total += v;
    if (total == 0) return out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        out[i] = static_cast<double>(row[i]) / static_cast<double>(total);
    }
    return out;
}

JoinLeaveTable join_leave_table(const Corpus& corpus,
                                const std::vector<SenderVerdict>& verdicts) {
    std::set<std::string> junk_users;
    for (const SenderVerdict& v : verdicts) {
        if (v.is_junk_sender) junk_users.insert(v.user.key());
    }

    JoinLeaveTable table;
    // (group, user) -> column of the most recent join still in effect.
    std::map<std::pair<std::string, std::string>, std::size_t> last_join;
    for (const ActionEvent& e : corpus.events) { // events are time-ordered
        const auto key = std::make_pair(e.group_id, e.subject.key());
        if (is_join_kind(e.kind)) {
            last_join[key] = join_col(e.kind);
            continue;
        }
        std::size_t row = 0;
        switch (e.kind) {
            case ActionKind::left: row = 0; break;
            case ActionKind::number_changed: row = 1; break;
            case ActionKind::removed: row = 2; break;
            default: continue;
        }
        std::size_t col = kColUnknown;
        if (auto it = last_join.find(key); it != last_join.end()) {
            col = it->second;
            last_join.erase(it); // departure consumes the join
        }
        auto& cohort = junk_users.count(e.subject.key()) ? table.junk : table.non_junk;
        cohort[row][col] += 1;
    }
    return table;
}

PreRemovalBreakdown pre_removal_actions(const Corpus& corpus,
                                        const std::vector<MessageCluster>& clusters,
                                        const std::set<std::string>& junk_cluster_ids,
                                        std::span<const ContentSignal> signals) {
    if (signals.size() != corpus.messages.size()) {
        throw std::invalid_argument("pre_removal_actions: signals misaligned with corpus");
    }
    std::unordered_map<std::string_view, const MessageCluster*> cluster_of_msg;
    for (const MessageCluster& c : clusters) {
        for (const std::string& msg_id : c.member_msg_ids) cluster_of_msg.emplace(msg_id, &c);
    }

    // Per (group, user): messages ordered by timestamp, membership events too.
    struct Act {
        std::int64_t ts;
        bool is_message;
        std::size_t index; // message index or event index
    };
    std::map<std::pair<std::string, std::string>, std::vector<Act>> acts;
    for (std::size_t i = 0; i < corpus.messages.size(); ++i) {
        const Message& m = corpus.messages[i];
        acts[{m.group_id, m.sender.key()}].push_back({m.timestamp, true, i});
    }
    for (std::size_t i = 0; i < corpus.events.size(); ++i) {
        const ActionEvent& e = corpus.events[i];
        if (e.kind == ActionKind::removed) continue; // classified, not classifying
        acts[{e.group_id, e.subject.key()}].push_back({e.timestamp, false, i});
    }
    for (auto& [key, list] : acts) {
        std::stable_sort(list.begin(), list.end(),
                         [](const Act& a, const Act& b) { return a.ts < b.ts; });
    }

    PreRemovalBreakdown out;
    for (const char* key :
         {"junk_url", "junk_phone", "junk_plain", "other_post", "membership", "none"}) {
        out.counts[key] = 0;
    }
    for (const ActionEvent& e : corpus.events) {
        if (e.kind != ActionKind::removed) continue;
        ++out.total;
        const auto it = acts.find({e.group_id, e.subject.key()});
        const Act* latest = nullptr;
        if (it != acts.end()) {
            for (const Act& a : it->second) {
                if (a.ts >= e.timestamp) break;
                // Equal timestamps: later entries win; messages sort after
                // events at the same ts only via this scan order, so prefer
                // messages explicitly on ties.
                if (!latest || a.ts > latest->ts || (a.ts == latest->ts && a.is_message)) {
                    latest = &a;
                }
            }
        }
        if (!latest) {
            out.counts["none"] += 1;
        } else if (!latest->is_message) {
            out.counts["membership"] += 1;
        } else {
            const Message& m = corpus.messages[latest->index];
            const auto cit = cluster_of_msg.find(m.msg_id);
            const bool junk =
                cit != cluster_of_msg.end() && junk_cluster_ids.count(cit->second->cluster_id);
            if (!junk) {
                out.counts["other_post"] += 1;
            } else if (signals[latest->index].has_url) {
                out.counts["junk_url"] += 1;
            } else if (signals[latest->index].has_phone) {
                out.counts["junk_phone"] += 1;
            } else {
                out.counts["junk_plain"] += 1;
            }
        }
    }
    return out;
}

std::vector<CountryRow> country_distribution(const Corpus& corpus,
                                             const std::vector<SenderVerdict>& verdicts) {
    std::set<std::string> junk_users;
    for (const SenderVerdict& v : verdicts) {
        if (v.is_junk_sender) junk_users.insert(v.user.key());
    }
    std::map<std::string, UserRef> users;
    auto note = [&](const UserRef& u) { users.try_emplace(u.key(), u); };
    for (const Message& m : corpus.messages) note(m.sender);
    for (const ActionEvent& e : corpus.events) {
        note(e.subject);
        if (e.new_identity) note(*e.new_identity);
    }
    std::map<std::string, CountryRow> rows;
    for (const auto& [key, user] : users) {
        CountryRow& row = rows[user.country_code];
        row.country_code = user.country_code;
        (junk_users.count(key) ? row.junk_users : row.non_junk_users) += 1;
    }
    std::vector<CountryRow> out;
    out.reserve(rows.size());
    for (const auto& [cc, row] : rows) out.push_back(row);
    return out;
}

std::vector<std::string> emit_report(const Corpus& corpus, const std::vector<MessageCluster>& clusters,
                                     const std::vector<LabeledCluster>& labels,
                                     const std::vector<SenderVerdict>& verdicts,
                                     std::span<const ContentSignal> signals,
                                     const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    const auto timelines = build_timelines(corpus, clusters);

    {
        const fs::path path = fs::path(out_dir) / "cluster_lifetimes.tsv";
        auto out = open_tsv(path);
        out << "cluster_id\tmessages\tsenders\tfirst_day\tlast_day\tlifetime_days\n";
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            const ClusterTimeline& t = timelines[i];
            out << t.cluster_id << '\t' << clusters[i].member_msg_ids.size() << '\t'
                << t.all_senders.size() << '\t' << t.first_day << '\t' << t.last_day << '\t'
                << cluster_lifetime_days(t) << '\n';
        }
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "active_days.tsv";
        auto out = open_tsv(path);
        out << "cluster_id\tactive_days\tfraction\n";
        for (const ClusterTimeline& t : timelines) {
            const ActiveDays ad = active_days(t);
            out << t.cluster_id << '\t' << ad.count << '\t' << fmt6(ad.fraction) << '\n';
        }
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "phone_fractions.tsv";
        auto out = open_tsv(path);
        out << "cluster_id\tactive_day_index\tfraction\n";
        for (const ClusterTimeline& t : timelines) {
            const auto fractions = phones_active_fraction(t);
            for (std::size_t i = 0; i < fractions.size(); ++i) {
                out << t.cluster_id << '\t' << i << '\t' << fmt6(fractions[i]) << '\n';
            }
        }
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "user_lifetimes.tsv";
        auto out = open_tsv(path);
        out << "user\tfirst_day\tlast_day\tlifetime_days\n";
        for (const UserLifetime& ul : user_lifetimes(corpus)) {
            out << ul.user_key << '\t' << ul.first_day << '\t' << ul.last_day << '\t'
                << (ul.last_day - ul.first_day) << '\n';
        }
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "join_leave.tsv";
        auto out = open_tsv(path);
        const JoinLeaveTable table = join_leave_table(corpus, verdicts);
        out << "cohort\treason";
        for (auto col : JoinLeaveTable::col_names()) out << '\t' << col;
        out << "\ttotal\n";
        const auto emit_rows = [&](const char* cohort, const auto& rows) {
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto fracs = JoinLeaveTable::normalize(rows[r]);
                std::uint64_t total = 0;
                for (std::uint64_t v : rows[r]) total += v;
                out << cohort << '\t' << JoinLeaveTable::row_names()[r];
                for (double f : fracs) out << '\t' << fmt6(f);
                out << '\t' << total << '\n';
            }
        };
        emit_rows("junk", table.junk);
        emit_rows("non_junk", table.non_junk);
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "pre_removal.tsv";
        auto out = open_tsv(path);
        std::set<std::string> junk_ids;
        for (const LabeledCluster& l : labels) {
            if (l.junk) junk_ids.insert(l.cluster_id);
        }
        const PreRemovalBreakdown pre =
            pre_removal_actions(corpus, clusters, junk_ids, signals);
        out << "action\tcount\tfraction\n";
        for (const auto& [action, count] : pre.counts) {
            const double frac =
                pre.total ? static_cast<double>(count) / static_cast<double>(pre.total) : 0.0;
            out << action << '\t' << count << '\t' << fmt6(frac) << '\n';
        }
        written.push_back(path.string());
    }
    {
        const fs::path path = fs::path(out_dir) / "country_distribution.tsv";
        auto out = open_tsv(path);
        out << "country_code\tjunk_users\tnon_junk_users\n";
        for (const CountryRow& row : country_distribution(corpus, verdicts)) {
            out << row.country_code << '\t' << row.junk_users << '\t' << row.non_junk_users
                << '\n';
        }
        written.push_back(path.string());
    }
    return written;
}

} // namespace groupsift
