#pragma once
// Text primitives: Unicode normalization, code-point strings, edit distance,
// padded character trigrams and a fixed 64-bit hash.
//
// All "characters" are Unicode code points. Normalization is NFC followed by
// full case folding and whitespace collapsing; it is the single canonical
// form used by the label index, the lexicon detector and string similarity.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "scholink/error.hpp"

namespace scholink::text {

inline icu::UnicodeString nfc(const icu::UnicodeString& in) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("icu_error", "NFC normalizer unavailable");
    icu::UnicodeString out = norm->normalize(in, status);
    if (U_FAILURE(status)) throw Error("icu_error", "NFC normalization failed");
    return out;
}

// NFC, case fold, NFC again (folding may decompose), then collapse runs of
// Unicode whitespace into one ASCII space and trim both ends.
inline std::string normalize(std::string_view input) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
    u = nfc(u);
    u.foldCase();
    u = nfc(u);

    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        if (u_isUWhiteSpace(c)) {
            pending_space = !collapsed.isEmpty();
            continue;
        }
        if (pending_space) collapsed.append(static_cast<UChar>(u' '));
        pending_space = false;
        collapsed.append(c);
    }
    std::string out;
    collapsed.toUTF8String(out);
    return out;
}

inline std::u32string to_u32(std::string_view utf8) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    std::u32string out;
    out.reserve(static_cast<std::size_t>(u.length()));
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        i += U16_LENGTH(c);
        out.push_back(static_cast<char32_t>(c));
    }
    return out;
}

inline std::string to_utf8(std::u32string_view cps) {
    icu::UnicodeString u;
    for (char32_t c : cps) u.append(static_cast<UChar32>(c));
    std::string out;
    u.toUTF8String(out);
    return out;
}

inline std::size_t length(std::string_view utf8) { return to_u32(utf8).size(); }

// Two-row dynamic program over code points.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// 1 - d / max(|a|, |b|); two empty strings are identical.
inline double levenshtein_similarity(std::u32string_view a, std::u32string_view b) {
    std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

inline constexpr char32_t kTrigramPad = U'#';

// Distinct trigrams of "##" + s + "##", sorted.
inline std::vector<std::u32string> padded_trigrams(std::u32string_view s) {
    std::u32string padded;
    padded.reserve(s.size() + 4);
    padded.append(2, kTrigramPad);
    padded.append(s);
    padded.append(2, kTrigramPad);
    std::vector<std::u32string> grams;
    grams.reserve(padded.size());
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) grams.emplace_back(padded.substr(i, 3));
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && !(s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && static_cast<unsigned char>(s[b]) <= ' ') ++b;
    while (e > b && static_cast<unsigned char>(s[e - 1]) <= ' ') --e;
    return std::string(s.substr(b, e - b));
}

// Strips leading and trailing Unicode punctuation.
inline std::string strip_punct(std::string_view s) {
    std::u32string cps = to_u32(s);
    std::size_t b = 0, e = cps.size();
    while (b < e && u_ispunct(static_cast<UChar32>(cps[b]))) ++b;
    while (e > b && u_ispunct(static_cast<UChar32>(cps[e - 1]))) --e;
    return to_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace scholink::text
