#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qcity {

// Lowercase, split on every run of non-alphanumeric ASCII characters. Bytes
// >= 0x80 are kept as token characters so non-Latin UTF-8 text survives.
std::vector<std::string> tokenize(std::string_view text);

// token -> polarity (+1 / -1).
class Lexicon {
public:
    Lexicon() = default;

    // TSV lines "token<TAB>+1|-1"; blank lines and '#' comments skipped.
    static Lexicon from_tsv(std::string_view content);
    static Lexicon from_tsv_file(const std::filesystem::path& path);
    // Small general-purpose English polarity list.
    static const Lexicon& builtin();

    void add(std::string_view token, int polarity);
    std::optional<int> polarity(std::string_view token) const;
    std::size_t size() const { return m_entries.size(); }

private:
    std::unordered_map<std::string, int> m_entries;
};

// (pos - neg) / matched over lexicon tokens; 0 when nothing matches.
double sentiment_score(std::string_view text, const Lexicon& lex);
double sentiment_score(std::span<const std::string> tokens, const Lexicon& lex);

struct EntityMention {
    std::string entity_id;
    std::string type;

    bool operator==(const EntityMention&) const = default;
};

struct EntityMatch {
    std::size_t begin = 0; // token offsets, [begin, end)
    std::size_t end = 0;
    EntityMention mention;
};

// Surface forms -> entities, matched over token sequences.
class Gazetteer {
public:
    Gazetteer() = default;

    // TSV lines "surface form<TAB>entity_id<TAB>type".
    static Gazetteer from_tsv(std::string_view content);
    static Gazetteer from_tsv_file(const std::filesystem::path& path);

    void add(std::string_view surface_form, std::string entity_id, std::string type);
    std::size_t size() const { return m_entries.size(); }

    // Left-to-right scan, longest surface form first, no overlaps.
    std::vector<EntityMatch> match(std::span<const std::string> tokens) const;

private:
    std::map<std::vector<std::string>, EntityMention, std::less<>> m_entries;
    std::size_t m_max_len = 0;
};

std::vector<EntityMention> extract_entities(std::string_view text, const Gazetteer& gaz);

// One bag of tokens per block (its social texts concatenated).
using Document = std::vector<std::string>;

struct TermScore {
    std::string term;
    double score = 0.0;
};

// tf(term over target docs) * ln(|corpus| / df(term over corpus)), ranked by
// score then term. A target term absent from the corpus uses df = 1.
// Throws Error(EmptyCorpus).
std::vector<TermScore> top_terms(std::span<const Document> target, std::span<const Document> corpus, std::size_t n);

} // namespace qcity
