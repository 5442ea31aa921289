#include "groupsift/textprep.hpp"

#include "groupsift/util/unicode.hpp"
#include "groupsift/util/urlscan.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace groupsift {

using util::CpClass;

std::string default_data_dir() {
    if (const char* env = std::getenv("GROUPSIFT_DATA_DIR"); env && *env) return env;
    return GROUPSIFT_DATA_DIR;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        auto [cp, len] = util::decode_utf8(text, i);
        i += len;
        CpClass cls = util::classify_codepoint(cp);
        if (util::is_word_class(cls)) {
            util::append_utf8(current, util::fold_case(cp));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Lang detect_language(std::string_view text) {
    std::uint64_t latin = 0, deva = 0, telu = 0, tami = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        auto [cp, len] = util::decode_utf8(text, i);
        i += len;
        switch (util::classify_codepoint(cp)) {
            case CpClass::latin_letter: ++latin; break;
            case CpClass::devanagari: ++deva; break;
            case CpClass::telugu: ++telu; break;
            case CpClass::tamil: ++tami; break;
            default: break;
        }
    }
    const std::array<std::pair<std::uint64_t, Lang>, 4> counts{{
        {deva, Lang::hi}, {telu, Lang::te}, {tami, Lang::ta}, {latin, Lang::en}}};
    std::uint64_t best = 0;
    Lang best_lang = Lang::other;
    bool tie = false;
    for (auto [count, lang] : counts) {
        if (count > best) {
            best = count;
            best_lang = lang;
            tie = false;
        } else if (count == best && count > 0) {
            tie = true;
        }
    }
    if (best == 0 || tie) return Lang::other;
    return best_lang;
}

std::string_view low_entropy_class_name(LowEntropyClass c) {
    switch (c) {
        case LowEntropyClass::url_only: return "url_only";
        case LowEntropyClass::emoji_only: return "emoji_only";
        case LowEntropyClass::boilerplate: return "boilerplate";
        case LowEntropyClass::normal: return "normal";
    }
    return "normal";
}

std::string normalize_for_boilerplate(std::string_view text) {
    std::string out;
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        auto [cp, len] = util::decode_utf8(text, i);
        i += len;
        CpClass cls = util::classify_codepoint(cp);
        if (util::is_word_class(cls)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            util::append_utf8(out, util::fold_case(cp));
        } else {
            pending_space = true;
        }
    }
    return out;
}

namespace {

std::unordered_set<std::string> load_term_file(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open term list: " + path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.insert(normalize ? normalize_for_boilerplate(line) : line);
    }
    return out;
}

} // namespace

FilterConfig FilterConfig::load(const std::string& data_dir) {
    FilterConfig cfg;
    cfg.boilerplate = load_term_file(data_dir + "/boilerplate.txt", /*normalize=*/true);
    return cfg;
}

LowEntropyClass classify_low_entropy(std::string_view text, const FilterConfig& cfg) {
    auto urls = util::scan_urls(text);
    std::string without_urls = urls.empty() ? std::string(text) : util::strip_urls(text, urls);

    bool has_word = false, has_emoji = false;
    std::size_t i = 0;
    while (i < without_urls.size()) {
        auto [cp, len] = util::decode_utf8(without_urls, i);
        i += len;
        CpClass cls = util::classify_codepoint(cp);
        if (util::is_word_class(cls)) has_word = true;
        if (cls == CpClass::emoji) has_emoji = true;
    }

    if (!urls.empty() && !has_word) return LowEntropyClass::url_only;
    if (urls.empty() && has_emoji && !has_word) return LowEntropyClass::emoji_only;
    if (cfg.boilerplate.count(normalize_for_boilerplate(text)) > 0) {
        return LowEntropyClass::boilerplate;
    }
    return LowEntropyClass::normal;
}

FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& cfg, ExecMode mode) {
    struct PerMessage {
        LowEntropyClass cls = LowEntropyClass::normal;
        Lang lang = Lang::other;
        std::vector<std::string> tokens;
    };
    const std::size_t n = corpus.messages.size();
    std::vector<PerMessage> scratch(n);

    util::parallel_for(n, mode, [&](std::size_t idx) {
        const Message& m = corpus.messages[idx];
        PerMessage& pm = scratch[idx];
        pm.cls = classify_low_entropy(m.text, cfg);
        if (pm.cls != LowEntropyClass::normal) return;
        pm.lang = detect_language(m.text);
        if (!cfg.kept_languages.count(pm.lang)) return;
        pm.tokens = tokenize(m.text);
    });

    FilterResult result;
    result.stats.total = n;
    for (std::size_t idx = 0; idx < n; ++idx) {
        PerMessage& pm = scratch[idx];
        switch (pm.cls) {
            case LowEntropyClass::url_only: ++result.stats.dropped_url_only; continue;
            case LowEntropyClass::emoji_only: ++result.stats.dropped_emoji_only; continue;
            case LowEntropyClass::boilerplate: ++result.stats.dropped_boilerplate; continue;
            case LowEntropyClass::normal: break;
        }
        if (!cfg.kept_languages.count(pm.lang)) {
            ++result.stats.dropped_language;
            continue;
        }
        if (pm.tokens.size() < static_cast<std::size_t>(cfg.min_tokens)) {
            ++result.stats.dropped_too_short;
            continue;
        }
        ++result.stats.kept;
        result.kept.push_back(TokenizedMessage{corpus.messages[idx].msg_id,
                                               std::move(pm.tokens), pm.lang});
    }
    return result;
}

StopwordTable StopwordTable::load(const std::string& data_dir) {
    StopwordTable t;
    t.en_ = load_term_file(data_dir + "/stopwords_en.txt", false);
    t.hi_ = load_term_file(data_dir + "/stopwords_hi.txt", false);
    t.te_ = load_term_file(data_dir + "/stopwords_te.txt", false);
    t.ta_ = load_term_file(data_dir + "/stopwords_ta.txt", false);
    return t;
}

const std::unordered_set<std::string>& StopwordTable::for_lang(Lang lang) const {
    switch (lang) {
        case Lang::en: return en_;
        case Lang::hi: return hi_;
        case Lang::te: return te_;
        case Lang::ta: return ta_;
        case Lang::other: break;
    }
    throw std::out_of_range("no stopword list for language 'other'");
}

bool StopwordTable::contains_any(const std::string& token) const {
    return en_.count(token) || hi_.count(token) || te_.count(token) || ta_.count(token);
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens, Lang lang,
                                          const StopwordTable& table) {
    const auto& list = table.for_lang(lang);
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (!list.count(t)) out.push_back(t);
    }
    return out;
}

} // namespace groupsift
