#include "qcity/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qcity/error.hpp"

namespace qcity {

namespace {

bool is_token_char(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        auto tab = line.find('\t', pos);
        out.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
        if (tab == std::string_view::npos) {
            return out;
        }
        pos = tab + 1;
    }
}

std::string_view trim(std::string_view s) {
    auto b = s.find_first_not_of(" \r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \r\n");
    return s.substr(b, e - b + 1);
}

template <class F>
void for_each_data_line(std::string_view content, F&& f) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto nl = content.find('\n', pos);
        auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        auto t = trim(line);
        if (!t.empty() && t.front() != '#') {
            f(line_no, line);
        }
        if (nl == std::string_view::npos) {
            break;
        }
        pos = nl + 1;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_token_char(c)) {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

Lexicon Lexicon::from_tsv(std::string_view content) {
    Lexicon lex;
    for_each_data_line(content, [&](std::size_t line_no, std::string_view line) {
        auto fields = split_tabs(line);
        if (fields.size() < 2) {
            throw Error(ErrorCode::BadLexicon, "line " + std::to_string(line_no) + ": expected token<TAB>polarity");
        }
        auto pol = trim(fields[1]);
        int polarity = 0;
        if (pol == "+1" || pol == "1") {
            polarity = 1;
        } else if (pol == "-1") {
            polarity = -1;
        } else {
            throw Error(ErrorCode::BadLexicon, "line " + std::to_string(line_no) + ": polarity must be +1 or -1");
        }
        try {
            lex.add(trim(fields[0]), polarity);
        } catch (const Error& e) {
            throw Error(ErrorCode::BadLexicon, "line " + std::to_string(line_no) + ": " + e.detail());
        }
    });
    return lex;
}

Lexicon Lexicon::from_tsv_file(const std::filesystem::path& path) {
    return from_tsv(read_file(path));
}

void Lexicon::add(std::string_view token, int polarity) {
    auto toks = tokenize(token);
    if (toks.size() != 1) {
        throw Error(ErrorCode::BadLexicon, "lexicon entry '" + std::string(token) + "' is not a single token");
    }
    if (polarity != 1 && polarity != -1) {
        throw Error(ErrorCode::BadLexicon, "polarity must be +1 or -1");
    }
    auto [it, inserted] = m_entries.emplace(toks.front(), polarity);
    if (!inserted && it->second != polarity) {
        throw Error(ErrorCode::BadLexicon, "conflicting polarity for '" + toks.front() + "'");
    }
}

std::optional<int> Lexicon::polarity(std::string_view token) const {
    auto it = m_entries.find(std::string(token));
    if (it == m_entries.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Lexicon& Lexicon::builtin() {
    static const Lexicon lex = [] {
        Lexicon l;
        for (const char* w : {"good", "great", "excellent", "amazing", "awesome", "love", "loved", "happy",
                 "fantastic", "wonderful", "best", "nice", "enjoy", "enjoyed", "fun", "beautiful", "win", "won",
                 "winner", "congrats", "congratulations", "brilliant", "perfect", "smooth", "fast", "clean",
                 "safe", "friendly", "exciting", "thrilled", "proud", "glad", "superb", "impressive"}) {
            l.add(w, 1);
        }
        for (const char* w : {"bad", "terrible", "awful", "horrible", "hate", "worst", "angry", "sad", "slow",
                 "jam", "jammed", "congested", "congestion", "crash", "accident", "delay", "delayed", "stuck",
                 "dirty", "dangerous", "noisy", "crowded", "boring", "disappointed", "disappointing", "lost",
                 "broken", "late", "chaos", "annoying", "polluted", "smog", "complaint", "fail"}) {
            l.add(w, -1);
        }
        return l;
    }();
    return lex;
}

double sentiment_score(std::span<const std::string> tokens, const Lexicon& lex) {
    long pos = 0;
    long neg = 0;
    for (const auto& t : tokens) {
        if (auto p = lex.polarity(t)) {
            (*p > 0 ? pos : neg) += 1;
        }
    }
    const long matched = pos + neg;
    if (matched == 0) {
        return 0.0;
    }
    return static_cast<double>(pos - neg) / static_cast<double>(matched);
}

double sentiment_score(std::string_view text, const Lexicon& lex) {
    auto tokens = tokenize(text);
    return sentiment_score(tokens, lex);
}

Gazetteer Gazetteer::from_tsv(std::string_view content) {
    Gazetteer gaz;
    for_each_data_line(content, [&](std::size_t line_no, std::string_view line) {
        auto fields = split_tabs(line);
        if (fields.size() < 3) {
            throw Error(ErrorCode::BadGazetteer,
                "line " + std::to_string(line_no) + ": expected surface<TAB>entity_id<TAB>type");
        }
        try {
            gaz.add(fields[0], std::string(trim(fields[1])), std::string(trim(fields[2])));
        } catch (const Error& e) {
            throw Error(ErrorCode::BadGazetteer, "line " + std::to_string(line_no) + ": " + e.detail());
        }
    });
    return gaz;
}

Gazetteer Gazetteer::from_tsv_file(const std::filesystem::path& path) {
    return from_tsv(read_file(path));
}

void Gazetteer::add(std::string_view surface_form, std::string entity_id, std::string type) {
    auto toks = tokenize(surface_form);
    if (toks.empty()) {
        throw Error(ErrorCode::BadGazetteer, "empty surface form");
    }
    if (entity_id.empty()) {
        throw Error(ErrorCode::BadGazetteer, "empty entity id for '" + std::string(surface_form) + "'");
    }
    EntityMention mention{std::move(entity_id), std::move(type)};
    auto it = m_entries.find(toks);
    if (it != m_entries.end()) {
        if (!(it->second == mention)) {
            throw Error(ErrorCode::BadGazetteer, "duplicate surface form '" + std::string(surface_form) + "'");
        }
        return;
    }
    m_max_len = std::max(m_max_len, toks.size());
    m_entries.emplace(std::move(toks), std::move(mention));
}

std::vector<EntityMatch> Gazetteer::match(std::span<const std::string> tokens) const {
    std::vector<EntityMatch> out;
    std::vector<std::string> probe;
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool found = false;
        for (std::size_t len = std::min(m_max_len, tokens.size() - i); len >= 1; --len) {
            probe.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
            auto it = m_entries.find(probe);
            if (it != m_entries.end()) {
                out.push_back(EntityMatch{i, i + len, it->second});
                i += len;
                found = true;
                break;
            }
        }
        if (!found) {
            ++i;
        }
    }
    return out;
}

std::vector<EntityMention> extract_entities(std::string_view text, const Gazetteer& gaz) {
    std::vector<EntityMention> out;
    for (auto& m : gaz.match(tokenize(text))) {
        out.push_back(std::move(m.mention));
    }
    return out;
}

std::vector<TermScore> top_terms(std::span<const Document> target, std::span<const Document> corpus, std::size_t n) {
    if (corpus.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "top_terms needs at least one corpus block");
    }
    if (n == 0) {
        return {};
    }
    std::map<std::string, std::int64_t, std::less<>> tf;
    for (const auto& doc : target) {
        for (const auto& t : doc) {
            ++tf[t];
        }
    }
    std::map<std::string, std::int64_t> df;
    for (const auto& doc : corpus) {
        std::set<std::string_view> seen(doc.begin(), doc.end());
        for (auto t : seen) {
            if (auto it = tf.find(t); it != tf.end()) {
                ++df[it->first];
            }
        }
    }
    const double docs = static_cast<double>(corpus.size());
    std::vector<TermScore> scored;
    scored.reserve(tf.size());
    for (const auto& [term, count] : tf) {
        auto it = df.find(term);
        const double d = it == df.end() ? 1.0 : static_cast<double>(it->second);
        scored.push_back(TermScore{term, static_cast<double>(count) * std::log(docs / d)});
    }
    std::sort(scored.begin(), scored.end(), [](const TermScore& a, const TermScore& b) {
        return a.score != b.score ? a.score > b.score : a.term < b.term;
    });
    if (scored.size() > n) {
        scored.resize(n);
    }
    return scored;
}

} // namespace qcity
