#pragma once

#include "groupsift/corpus.hpp"
#include "groupsift/util/parallel.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace groupsift {

/// Directory holding stopword lists, the boilerplate list and the neutral
/// sentence pools. Resolves GROUPSIFT_DATA_DIR from the environment first,
/// then the compiled-in source-tree path.
std::string default_data_dir();

/// Word tokens: runs of letter/digit codepoints (any script), separated by
/// whitespace, punctuation, symbols and emoji. ASCII and Latin-1 letters are
/// lowercased; other scripts pass through unchanged.
std::vector<std::string> tokenize(std::string_view text);

/// Script-majority language detection over {Devanagari->hi, Telugu->te,
/// Tamil->ta, Latin->en}. Ties and letterless texts map to `other`.
Lang detect_language(std::string_view text);

enum class LowEntropyClass { url_only, emoji_only, boilerplate, normal };

std::string_view low_entropy_class_name(LowEntropyClass c);

struct FilterConfig {
    std::set<Lang> kept_languages{Lang::hi, Lang::en, Lang::te, Lang::ta};
    std::unordered_set<std::string> boilerplate; // normalized entries
    int min_tokens = 1;

    /// Loads the bundled boilerplate list from `data_dir`.
    static FilterConfig load(const std::string& data_dir = default_data_dir());
};

/// Normalization used for boilerplate matching: casefold, replace punctuation
/// and emoji with spaces, collapse whitespace runs, trim.
std::string normalize_for_boilerplate(std::string_view text);

/// Precedence when several apply: url_only > emoji_only > boilerplate.
/// Empty text is `normal` unless the empty string is itself a boilerplate
/// entry (it then falls out later via the min-token rule).
LowEntropyClass classify_low_entropy(std::string_view text, const FilterConfig& cfg);

struct TokenizedMessage {
    std::string msg_id;
    std::vector<std::string> tokens;
    Lang language = Lang::other;

    bool operator==(const TokenizedMessage&) const = default;
};

struct FilterStats {
    std::uint64_t total = 0;
    std::uint64_t kept = 0;
    std::uint64_t dropped_url_only = 0;
    std::uint64_t dropped_emoji_only = 0;
    std::uint64_t dropped_boilerplate = 0;
    std::uint64_t dropped_language = 0;
    std::uint64_t dropped_too_short = 0;

    std::uint64_t dropped_total() const {
        return dropped_url_only + dropped_emoji_only + dropped_boilerplate + dropped_language +
               dropped_too_short;
    }
};

struct FilterResult {
    std::vector<TokenizedMessage> kept;
    FilterStats stats;
};

/// Classify, detect language and tokenize every message; drop low-entropy
/// texts first, then unsupported languages, then too-short token lists.
/// The stats partition the input exactly: kept + all dropped counts == total.
FilterResult filter_corpus(const Corpus& corpus, const FilterConfig& cfg,
                           ExecMode mode = ExecMode::parallel);

/// Per-language stopword lists loaded from one-term-per-line files.
class StopwordTable {
public:
    /// Loads stopwords_{en,hi,te,ta}.txt from `data_dir`; missing files throw.
    static StopwordTable load(const std::string& data_dir = default_data_dir());

    /// Throws std::out_of_range for languages without a bundled list (other).
    const std::unordered_set<std::string>& for_lang(Lang lang) const;

    bool contains_any(const std::string& token) const;

private:
    std::unordered_set<std::string> en_, hi_, te_, ta_;
};

/// Order-preserving removal of stopwords for the given language.
std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens, Lang lang,
                                          const StopwordTable& table);

} // namespace groupsift
