#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tritier::text {

// ─── UTF-8 ──────────────────────────────────────────────────────────────────

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at i; advances i past it. Invalid byte
// sequences decode to U+FFFD one byte at a time (lenient, deterministic).
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) { ++i; return b0; }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return kReplacement; }
    if (i + len > s.size()) { ++i; return kReplacement; }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) { ++i; return kReplacement; }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms and surrogates.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) out.push_back(decode_utf8(s, i));
    return out;
}

// Unicode scalar values in the string (invalid bytes count one each).
inline std::size_t codepoint_count(std::string_view s) {
    std::size_t n = 0, i = 0;
    while (i < s.size()) { decode_utf8(s, i); ++n; }
    return n;
}

// ─── Folding ────────────────────────────────────────────────────────────────
//
// Keyword matching normalizes both sides with the same fold: lowercase,
// Latin precomposed letters reduced to their base letter, combining marks
// stripped, fullwidth forms mapped to ASCII. Composed and decomposed
// spellings of the romanized terms in the dimension registry (yūgen,
// nastaʿlīq, Shāhnāmeh, ...) therefore land on identical byte strings.

namespace detail {

// Folded replacement for one Latin-ish codepoint, or 0 when unmapped.
inline char32_t latin_base(char32_t cp) {
    struct Range { char32_t lo, hi; char base; };
    // Latin-1 Supplement vowel/consonant groups.
    static constexpr Range r1[] = {
        {0xC0, 0xC5, 'a'}, {0xE0, 0xE5, 'a'}, {0xC8, 0xCB, 'e'}, {0xE8, 0xEB, 'e'},
        {0xCC, 0xCF, 'i'}, {0xEC, 0xEF, 'i'}, {0xD2, 0xD6, 'o'}, {0xF2, 0xF6, 'o'},
        {0xD9, 0xDC, 'u'}, {0xF9, 0xFC, 'u'},
    };
    for (const auto& r : r1)
        if (cp >= r.lo && cp <= r.hi) return static_cast<char32_t>(r.base);
    switch (cp) {
        case 0xC7: case 0xE7: return 'c';
        case 0xD0: case 0xF0: return 'd';
        case 0xD1: case 0xF1: return 'n';
        case 0xD8: case 0xF8: return 'o';
        case 0xDD: case 0xFD: case 0xFF: return 'y';
        default: break;
    }
    // Latin Extended-A: alternating upper/lower pairs with a few oddballs.
    if (cp >= 0x100 && cp <= 0x17F) {
        static constexpr char bases[] =
            // 0100-010F  A a A a A a C c C c C c C c D d
            "aaaaaaccccccccdd"
            // 0110-011F  D d E e E e E e E e E e G g G g
            "ddeeeeeeeeeegggg"
            // 0120-012F  G g G g H h H h I i I i I i I i
            "gggghhhhiiiiiiii"
            // 0130-013F  I i IJ ij J j K k k L l L l L l L
            "iiiijjkkklllllll"
            // 0140-014F  l L l N n N n N n n NG ng O o O o
            "lllnnnnnnnnnoooo"
            // 0150-015F  O o OE oe R r R r R r S s S s S s
            "oooorrrrrrssssss"
            // 0160-016F  S s T t T t T t U u U u U u U u
            "ssttttttuuuuuuuu"
            // 0170-017F  U u U u W w Y y Y Z z Z z Z z s
            "uuuuwwyyyzzzzzzs";
        return static_cast<char32_t>(bases[cp - 0x100]);
    }
    return 0;
}

inline bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

// Modifier letters and curly quotes dropped so that romanizations with and
// without the mark (nastaʿlīq vs nastaliq) fold identically.
inline bool is_dropped_mark(char32_t cp) {
    switch (cp) {
        case 0x2018: case 0x2019: case 0x02B9: case 0x02BB: case 0x02BC:
        case 0x02BD: case 0x02BE: case 0x02BF: case 0x0374: return true;
        default: return false;
    }
}

}  // namespace detail

inline std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t cp = decode_utf8(s, i);
        if (cp >= 'A' && cp <= 'Z') cp += 0x20;
        else if (cp == 0x3000) cp = ' ';                       // ideographic space
        else if (cp >= 0xFF01 && cp <= 0xFF5E) {               // fullwidth ASCII block
            cp -= 0xFEE0;
            if (cp >= 'A' && cp <= 'Z') cp += 0x20;
        } else if (detail::is_combining_mark(cp) || detail::is_dropped_mark(cp)) {
            continue;
        } else if (char32_t base = detail::latin_base(cp); base != 0) {
            cp = base;
        }
        append_utf8(out, cp);
    }
    return out;
}

// ─── Tokenization ───────────────────────────────────────────────────────────
//
// Latin/digit runs become lowercase word tokens; CJK runs (ideographs, kana,
// hangul) are emitted as overlapping character bigrams, a single isolated
// character as itself. Everything else is a boundary.

namespace detail {

inline bool is_cjk(char32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||   // unified ideographs
           (cp >= 0x3400 && cp <= 0x4DBF) ||   // ext A
           (cp >= 0xF900 && cp <= 0xFAFF) ||   // compatibility ideographs
           (cp >= 0x3040 && cp <= 0x30FF) ||   // hiragana + katakana
           (cp >= 0xAC00 && cp <= 0xD7AF);     // hangul syllables
}

inline bool is_word(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 0xC0 && cp < 0x300);         // folded Latin leftovers
}

}  // namespace detail

// Tokenizes already-folded text.
inline std::vector<std::string> tokenize_folded(std::string_view folded) {
    std::vector<std::string> tokens;
    std::string word;
    std::vector<char32_t> cjk_run;
    auto flush_word = [&] {
        if (!word.empty()) { tokens.push_back(word); word.clear(); }
    };
    auto flush_cjk = [&] {
        if (cjk_run.size() == 1) {
            std::string t;
            append_utf8(t, cjk_run[0]);
            tokens.push_back(std::move(t));
        } else {
            for (std::size_t k = 0; k + 1 < cjk_run.size(); ++k) {
                std::string t;
                append_utf8(t, cjk_run[k]);
                append_utf8(t, cjk_run[k + 1]);
                tokens.push_back(std::move(t));
            }
        }
        cjk_run.clear();
    };
    std::size_t i = 0;
    while (i < folded.size()) {
        const char32_t cp = decode_utf8(folded, i);
        if (detail::is_cjk(cp)) {
            flush_word();
            cjk_run.push_back(cp);
        } else if (detail::is_word(cp)) {
            if (!cjk_run.empty()) flush_cjk();
            append_utf8(word, cp);
        } else {
            flush_word();
            if (!cjk_run.empty()) flush_cjk();
        }
    }
    flush_word();
    if (!cjk_run.empty()) flush_cjk();
    return tokens;
}

inline std::vector<std::string> tokenize(std::string_view raw) {
    return tokenize_folded(fold(raw));
}

// ─── Sentence counting ──────────────────────────────────────────────────────
//
// A sentence ends at a run of terminal punctuation {. ! ?} followed by
// whitespace or end of text; the CJK terminators {。 ！ ？} end a sentence
// unconditionally since CJK prose carries no space after them. Consecutive
// terminators collapse into one boundary; a trailing unterminated segment
// with visible content counts as a sentence.

namespace detail {

inline bool is_ascii_terminator(char32_t cp) { return cp == '.' || cp == '!' || cp == '?'; }
inline bool is_cjk_terminator(char32_t cp) { return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F; }
inline bool is_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0x3000 || cp == 0xA0;
}

}  // namespace detail

inline std::size_t sentence_count(std::string_view s) {
    const auto cps = decode(s);
    std::size_t n = 0;
    bool has_content = false;
    std::size_t i = 0;
    while (i < cps.size()) {
        const char32_t cp = cps[i];
        if (detail::is_ascii_terminator(cp) || detail::is_cjk_terminator(cp)) {
            bool cjk = false;
            while (i < cps.size() &&
                   (detail::is_ascii_terminator(cps[i]) || detail::is_cjk_terminator(cps[i]))) {
                cjk = cjk || detail::is_cjk_terminator(cps[i]);
                ++i;
            }
            const bool at_end = i >= cps.size();
            if ((at_end || detail::is_space(cps[i]) || cjk) && has_content) {
                ++n;
                has_content = false;
            }
        } else {
            if (!detail::is_space(cp)) has_content = true;
            ++i;
        }
    }
    if (has_content) ++n;
    return n;
}

// Case-folded substring containment of `needle` in pre-folded `haystack`.
inline bool contains_folded(std::string_view folded_haystack, std::string_view needle) {
    const std::string fn = fold(needle);
    if (fn.empty()) return false;
    return folded_haystack.find(fn) != std::string_view::npos;
}

}  // namespace tritier::text
