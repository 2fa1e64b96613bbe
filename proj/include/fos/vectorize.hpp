#pragma once
// Text to features. A piece of text becomes four concatenated blocks:
//
//   bow  sparse tf-idf over word terms, L2-normalized
//   boe  sparse mention counts over concept columns, L2-normalized
//   eow  dense idf-weighted mean of word embeddings
//   eoe  dense mention-count-weighted mean of concept embeddings
//
// Concept embeddings are the eow of the concept's first paragraph, so the
// whole representation is derivable from corpus inputs plus one embedding
// table. Cosine runs over the full concatenation.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fos/corpus.hpp"

namespace fos {

struct Token {
    std::string text;  // lowercased
    size_t begin = 0;  // byte offsets into the original text
    size_t end = 0;
};

// Maximal runs of ASCII alphanumerics and non-ASCII bytes; ASCII letters
// lowercased, everything else (punctuation, separators) dropped.
std::vector<Token> tokenize_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

class Vocabulary {
public:
    // One df count per unit that contains the term; terms below min_df are
    // dropped. Column order is lexicographic, so indexes are reproducible.
    static Vocabulary build(const std::vector<std::vector<std::string>>& units, uint32_t min_df = 1);

    std::optional<uint32_t> lookup(std::string_view term) const;
    const std::string& term(uint32_t idx) const { return terms_[idx]; }
    uint32_t df(uint32_t idx) const { return df_[idx]; }
    size_t unit_count() const { return unit_count_; }
    size_t size() const { return terms_.size(); }

    // idf = ln(1 + D/df); never zero, even for ubiquitous terms.
    double idf(uint32_t idx) const;

private:
    std::vector<std::string> terms_;
    std::vector<uint32_t> df_;
    std::unordered_map<std::string, uint32_t> index_;
    size_t unit_count_ = 0;
};

class EmbeddingTable {
public:
    // Text interchange format: header "<vocab_size> <dim>", then one line per
    // token: the token followed by dim floats, space-separated.
    static EmbeddingTable load(const std::filesystem::path& path);

    // Test harness: deterministic pseudo-random unit vectors derived from a
    // hash of the token. No quality claim; it exists so the pipeline runs
    // without a trained embedding file.
    static EmbeddingTable hash_fallback(size_t dim, uint64_t seed);

    // Tokens sorted; floats printed shortest-round-trip, so load(dump(t))
    // reproduces every bit.
    void dump(std::ostream& out) const;

    // nullopt when the token is absent and no fallback is active.
    std::optional<std::vector<double>> get(std::string_view token) const;
    bool has_fallback() const { return fallback_; }
    size_t dim() const { return dim_; }
    size_t size() const { return vectors_.size(); }

private:
    std::unordered_map<std::string, std::vector<double>> vectors_;
    size_t dim_ = 0;
    bool fallback_ = false;
    uint64_t fallback_seed_ = 0;
};

struct SparseEntry {
    uint32_t index;
    double weight;
    bool operator==(const SparseEntry&) const = default;
};

struct FeatureVector {
    std::vector<SparseEntry> bow;  // sorted by index
    std::vector<SparseEntry> boe;  // sorted by index
    std::vector<double> eow;
    std::vector<double> eoe;
    uint32_t bow_dim = 0;
    uint32_t boe_dim = 0;

    bool same_layout(const FeatureVector& o) const;
    bool is_zero() const;
    double norm() const;
    bool operator==(const FeatureVector&) const = default;
};

// dst += w * src. Terms with w == 0 must be skipped by callers that need
// bit-exact degeneracy; this function still guards against w == 0.
void add_scaled(FeatureVector& dst, const FeatureVector& src, double w);

// Full-concatenation cosine; 0 if either norm is zero. Throws on layout
// mismatch.
double cosine(const FeatureVector& u, const FeatureVector& v);

struct Mention {
    std::string entity_id;
    uint32_t column = 0;   // concept column in the boe block
    size_t begin = 0;      // first occurrence, byte offsets
    size_t end = 0;
    uint32_t count = 0;
};

struct SpotHit {
    uint32_t column;
    size_t begin;
    size_t end;
};

// Dictionary of concept names for mention spotting. Matching is greedy
// longest-match, left to right, case-insensitive, non-overlapping, at token
// granularity.
class NameIndex {
public:
    // columns: concept ids in column order; names taken from entity titles.
    static NameIndex build(const EntityStore& entities, const std::vector<std::string>& columns);

    std::vector<SpotHit> spot_hits(std::string_view text) const;
    std::vector<Mention> spot(std::string_view text) const;  // aggregated per entity

    size_t column_count() const { return columns_.size(); }
    const std::string& column_id(uint32_t col) const { return columns_[col]; }
    std::optional<uint32_t> column_of(std::string_view id) const;

private:
    std::vector<std::string> columns_;
    std::unordered_map<std::string, uint32_t> column_index_;
    std::unordered_map<std::string, uint32_t> phrase_to_column_;  // tokens joined by ' '
    size_t max_phrase_tokens_ = 0;
};

struct BlockWeights {
    double bow = 1.0;
    double boe = 1.0;
    double eow = 1.0;
    double eoe = 1.0;
};

std::vector<SparseEntry> bow_block(const std::vector<std::string>& tokens, const Vocabulary& vocab);
std::vector<double> eow_block(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              const Vocabulary& vocab);
std::vector<SparseEntry> boe_block(const std::vector<Mention>& mentions);
std::vector<double> eoe_block(const std::vector<Mention>& mentions,
                              const std::vector<std::vector<double>>& entity_vectors, size_t dim);

struct FeatureContext {
    Vocabulary vocab;
    EmbeddingTable table;
    NameIndex names;
    std::vector<std::vector<double>> entity_vectors;  // column -> eow of first paragraph
    BlockWeights weights;

    FeatureVector featurize(std::string_view text) const;
};

// Vocabulary units are all document, concept, and venue texts, so any term
// seen anywhere in the corpus has a defined idf.
FeatureContext build_feature_context(const CorpusSnapshot& snap,
                                     const std::vector<std::string>& concept_ids,
                                     EmbeddingTable table, BlockWeights weights = {},
                                     uint32_t min_df = 1);

}  // namespace fos
