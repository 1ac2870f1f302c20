#pragma once
// String normalization, tokenization, the pronoun/determiner stoplist and
// the 64-bit hash used for config digests and pseudo-embeddings.
//
// Normalization is never applied destructively to stored mention strings;
// these helpers are called inside alignment, merging and IDF computation only.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kgsum {

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Collapse whitespace runs to single spaces and trim the ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_ascii_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

inline std::string_view strip_outer_punct(std::string_view s) {
    auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    size_t b = 0, e = s.size();
    while (b < e && is_punct(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Normalization used by gestalt similarity: lowercase, collapse whitespace.
// Hyphens and inner punctuation are kept.
inline std::string normalize_for_match(std::string_view s) {
    return collapse_whitespace(to_lower_ascii(s));
}

// Normalization for IDF unigrams and the generic-mention stoplist test:
// lowercase, strip surrounding punctuation.
inline std::string normalize_token(std::string_view s) {
    return std::string(strip_outer_punct(to_lower_ascii(s)));
}

// Key used when merging clusters by shared mention string: lowercase,
// collapse whitespace, strip leading/trailing punctuation.
inline std::string normalize_mention_key(std::string_view s) {
    return std::string(strip_outer_punct(collapse_whitespace(to_lower_ascii(s))));
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ascii_space(s[i])) ++i;
        size_t b = i;
        while (i < s.size() && !is_ascii_space(s[i])) ++i;
        if (i > b) out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

// English pronouns and determiners excluded by the generic-mention rule.
// Fixed, embedded, sorted; mirrored verbatim in the README.
inline constexpr std::string_view kPronounDeterminerStoplist[] = {
    "a", "all", "an", "another", "any", "anybody", "anyone", "anything", "both",
    "certain", "each", "either", "enough", "every", "everybody", "everyone",
    "everything", "few", "fewer", "he", "her", "hers", "herself", "him",
    "himself", "his", "i", "it", "its", "itself", "least", "less", "many",
    "me", "mine", "more", "most", "much", "my", "myself", "neither", "no",
    "nobody", "none", "nothing", "one", "oneself", "other", "others", "our",
    "ours", "ourselves", "own", "same", "several", "she", "some", "somebody",
    "someone", "something", "such", "that", "the", "their", "theirs", "them",
    "themselves", "these", "they", "this", "those", "us", "we", "what",
    "whatever", "which", "whichever", "who", "whoever", "whom", "whomever",
    "whose", "you", "your", "yours", "yourself", "yourselves",
};

// Token must already be normalized via normalize_token.
inline bool is_pronoun_or_determiner(std::string_view token) {
    return std::binary_search(std::begin(kPronounDeterminerStoplist),
                              std::end(kPronounDeterminerStoplist), token);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from 53 random bits.
inline double u64_to_unit_double(uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace kgsum
