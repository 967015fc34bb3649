#include "trace/text_prep.hpp"

#include <algorithm>
#include <cctype>

namespace trace {

namespace {

// ---------------------------------------------------------------------------
// Porter stemmer, after the reference implementation.

class Stemmer {
public:
    explicit Stemmer(std::string word)
        : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

    std::string run() {
        if (b_.size() <= 2) return b_;
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    std::string b_;
    int k_;       // index of last letter of the current word
    int j_ = 0;   // index of last letter of the stem once a suffix matched (may be -1)

    // y is a consonant at the word start and after a vowel; walking a y-run
    // iteratively keeps pathological inputs off the call stack.
    bool cons(int i) const {
        int flips = 0;
        while (b_[static_cast<std::size_t>(i)] == 'y' && i > 0) {
            ++flips;
            --i;
        }
        bool base;
        switch (b_[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': base = false; break;
            default: base = true; break;  // includes y at position 0
        }
        return (flips % 2 == 0) ? base : !base;
    }

    char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

    // Number of consonant-vowel sequences in [0, j_].
    int measure() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool double_cons(int i) const {
        if (i < 1) return false;
        return at(i) == at(i - 1) && cons(i);
    }

    // consonant-vowel-consonant ending at i, last consonant not w, x, or y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = at(i);
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (b_.compare(static_cast<std::size_t>(k_ + 1 - len), s.size(), s) != 0) return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void replace_if_m(std::string_view s) {
        if (measure() > 0) set_to(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                set_to("i");
            } else if (at(k_ - 1) != 's') {
                --k_;
            }
        }
        if (ends("eed")) {
            if (measure() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) {
                set_to("ate");
            } else if (ends("bl")) {
                set_to("ble");
            } else if (ends("iz")) {
                set_to("ize");
            } else if (double_cons(k_)) {
                char ch = at(k_);
                if (ch != 'l' && ch != 's' && ch != 'z') --k_;
            } else if (measure() == 1 && cvc(k_)) {
                j_ = k_;
                set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    void step2() {
        if (k_ < 1) return;
        switch (at(k_ - 1)) {
            case 'a':
                if (ends("ational")) { replace_if_m("ate"); break; }
                if (ends("tional")) { replace_if_m("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { replace_if_m("ence"); break; }
                if (ends("anci")) { replace_if_m("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { replace_if_m("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { replace_if_m("ble"); break; }
                if (ends("alli")) { replace_if_m("al"); break; }
                if (ends("entli")) { replace_if_m("ent"); break; }
                if (ends("eli")) { replace_if_m("e"); break; }
                if (ends("ousli")) { replace_if_m("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { replace_if_m("ize"); break; }
                if (ends("ation")) { replace_if_m("ate"); break; }
                if (ends("ator")) { replace_if_m("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { replace_if_m("al"); break; }
                if (ends("iveness")) { replace_if_m("ive"); break; }
                if (ends("fulness")) { replace_if_m("ful"); break; }
                if (ends("ousness")) { replace_if_m("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { replace_if_m("al"); break; }
                if (ends("iviti")) { replace_if_m("ive"); break; }
                if (ends("biliti")) { replace_if_m("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { replace_if_m("log"); break; }
                break;
        }
    }

    void step3() {
        switch (at(k_)) {
            case 'e':
                if (ends("icate")) { replace_if_m("ic"); break; }
                if (ends("ative")) { replace_if_m(""); break; }
                if (ends("alize")) { replace_if_m("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { replace_if_m("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { replace_if_m("ic"); break; }
                if (ends("ful")) { replace_if_m(""); break; }
                break;
            case 's':
                if (ends("ness")) { replace_if_m(""); break; }
                break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        bool matched = false;
        switch (at(k_ - 1)) {
            case 'a': matched = ends("al"); break;
            case 'c': matched = ends("ance") || ends("ence"); break;
            case 'e': matched = ends("er"); break;
            case 'i': matched = ends("ic"); break;
            case 'l': matched = ends("able") || ends("ible"); break;
            case 'n':
                matched = ends("ant") || ends("ement") || ends("ment") || ends("ent");
                break;
            case 'o':
                matched = (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) ||
                          ends("ou");
                break;
            case 's': matched = ends("ism"); break;
            case 't': matched = ends("ate") || ends("iti"); break;
            case 'u': matched = ends("ous"); break;
            case 'v': matched = ends("ive"); break;
            case 'z': matched = ends("ize"); break;
        }
        if (matched && measure() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            int m = measure();
            if (m > 1 || (m == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && double_cons(k_) && measure() > 1) --k_;
    }
};

// ---------------------------------------------------------------------------
// Tokenizer.

bool is_url_start(std::string_view s, std::size_t i) {
    // scheme://  with a letter-led scheme
    if (!std::isalpha(static_cast<unsigned char>(s[i]))) return false;
    std::size_t j = i;
    while (j < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '+' || s[j] == '.' ||
            s[j] == '-'))
        ++j;
    return j + 2 < s.size() && s[j] == ':' && s[j + 1] == '/' && s[j + 2] == '/';
}

bool is_www_start(std::string_view s, std::size_t i) {
    if (i + 4 > s.size()) return false;
    if (s.compare(i, 4, "www.") != 0) return false;
    return i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
}

bool word_boundary_before(std::string_view s, std::size_t i) {
    return i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
}

// URLs and markup tags become spaces; ``` fence markers (with any info
// string) are dropped while fenced content is kept.
std::string strip_urls_and_markup(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if ((word_boundary_before(raw, i) && is_url_start(raw, i)) || is_www_start(raw, i)) {
            while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            out += ' ';
            continue;
        }
        if (c == '<') {
            std::size_t close = raw.find('>', i + 1);
            if (close != std::string_view::npos && close - i <= 256) {
                i = close + 1;
                out += ' ';
                continue;
            }
        }
        if (c == '`' && i + 2 < raw.size() && raw[i + 1] == '`' && raw[i + 2] == '`') {
            i += 3;
            // drop the info string on the fence line
            while (i < raw.size() && raw[i] != '\n' &&
                   !std::isspace(static_cast<unsigned char>(raw[i])))
                ++i;
            out += ' ';
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

void split_case_runs(std::string_view run, std::vector<std::string>& out) {
    std::size_t start = 0;
    auto upper = [&](std::size_t i) { return std::isupper(static_cast<unsigned char>(run[i])); };
    auto lower = [&](std::size_t i) { return std::islower(static_cast<unsigned char>(run[i])); };
    auto digit = [&](std::size_t i) { return std::isdigit(static_cast<unsigned char>(run[i])); };
    for (std::size_t i = 1; i < run.size(); ++i) {
        bool boundary = ((lower(i - 1) || digit(i - 1)) && upper(i)) ||
                        (i + 1 < run.size() && upper(i - 1) && upper(i) && lower(i + 1));
        if (boundary) {
            out.emplace_back(run.substr(start, i - start));
            start = i;
        }
    }
    out.emplace_back(run.substr(start));
}

}  // namespace

std::string porter_stem(std::string_view word) {
    return Stemmer(std::string(word)).run();
}

const std::unordered_set<std::string>& stop_words() {
    // Lucene's English default stop set.
    static const std::unordered_set<std::string> words{
        "a",    "an",   "and",   "are",  "as",    "at",   "be",   "but",  "by",
        "for",  "if",   "in",    "into", "is",    "it",   "no",   "not",  "of",
        "on",   "or",   "such",  "that", "the",   "their", "then", "there", "these",
        "they", "this", "to",    "was",  "will",  "with"};
    return words;
}

std::vector<std::string> preprocess_text(std::string_view raw) {
    std::string cleaned = strip_urls_and_markup(raw);

    std::vector<std::string> pieces;
    std::size_t i = 0;
    while (i < cleaned.size()) {
        if (!std::isalnum(static_cast<unsigned char>(cleaned[i]))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < cleaned.size() && std::isalnum(static_cast<unsigned char>(cleaned[i]))) ++i;
        split_case_runs(std::string_view(cleaned).substr(start, i - start), pieces);
    }

    const auto& stops = stop_words();
    std::vector<std::string> terms;
    terms.reserve(pieces.size());
    for (auto& piece : pieces) {
        std::transform(piece.begin(), piece.end(), piece.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (piece.empty() || stops.count(piece)) continue;
        std::string term = porter_stem(piece);
        // Emitted terms must be fixed points of this pipeline: a stem can
        // itself be stemmable (or be a stop word), so settle it here.
        for (int round = 0; round < 4; ++round) {
            std::string next = porter_stem(term);
            if (next == term) break;
            term = std::move(next);
        }
        if (term.empty() || stops.count(term)) continue;
        terms.push_back(std::move(term));
    }
    return terms;
}

}  // namespace trace
