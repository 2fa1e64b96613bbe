#include "fos/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "fos/util.hpp"

namespace fos {

namespace {

bool is_word_byte(unsigned char c) {
    if (c >= 0x80) return true;  // keep non-ASCII code points intact
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

void l2_normalize(std::vector<SparseEntry>& entries) {
    double sq = 0.0;
    for (const auto& e : entries) sq += e.weight * e.weight;
    if (sq <= 0.0) {
        entries.clear();
        return;
    }
    double inv = 1.0 / std::sqrt(sq);
    for (auto& e : entries) e.weight *= inv;
}

double sparse_dot(const std::vector<SparseEntry>& a, const std::vector<SparseEntry>& b) {
    double dot = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].index < b[j].index) ++i;
        else if (b[j].index < a[i].index) ++j;
        else { dot += a[i].weight * b[j].weight; ++i; ++j; }
    }
    return dot;
}

double sparse_norm_sq(const std::vector<SparseEntry>& a) {
    double sq = 0.0;
    for (const auto& e : a) sq += e.weight * e.weight;
    return sq;
}

void scale_block(std::vector<SparseEntry>& entries, double w) {
    if (w == 1.0) return;
    for (auto& e : entries) e.weight *= w;
}

void scale_block(std::vector<double>& v, double w) {
    if (w == 1.0) return;
    for (auto& x : v) x *= w;
}

}  // namespace

std::vector<Token> tokenize_spans(std::string_view text) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) { ++i; continue; }
        size_t begin = i;
        std::string tok;
        while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
            tok.push_back(lower_ascii(text[i]));
            ++i;
        }
        out.push_back(Token{std::move(tok), begin, i});
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_spans(text)) out.push_back(std::move(t.text));
    return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& units, uint32_t min_df) {
    std::map<std::string, uint32_t> df;
    for (const auto& unit : units) {
        std::vector<std::string> uniq(unit);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto& t : uniq) ++df[t];
    }
    Vocabulary v;
    v.unit_count_ = units.size();
    for (auto& [term, count] : df) {
        if (count < min_df) continue;
        v.index_.emplace(term, static_cast<uint32_t>(v.terms_.size()));
        v.terms_.push_back(term);
        v.df_.push_back(count);
    }
    return v;
}

std::optional<uint32_t> Vocabulary::lookup(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(uint32_t idx) const {
    return std::log(1.0 + static_cast<double>(unit_count_) / static_cast<double>(df_[idx]));
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path.filename().string() + ":1: empty embeddings file");
    auto header = split_ws(line);
    size_t declared = 0, dim = 0;
    if (header.size() != 2)
        throw std::runtime_error(path.filename().string() + ":1: header must be '<vocab_size> <dim>'");
    try {
        declared = std::stoull(header[0]);
        dim = std::stoull(header[1]);
    } catch (const std::exception&) {
        throw std::runtime_error(path.filename().string() + ":1: header must be '<vocab_size> <dim>'");
    }
    if (dim == 0) throw std::runtime_error(path.filename().string() + ":1: dimension must be positive");

    EmbeddingTable table;
    table.dim_ = dim;
    size_t line_no = 1, rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_ws(line);
        if (fields.size() != dim + 1)
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": expected token plus " + std::to_string(dim) +
                                     " floats, got " + std::to_string(fields.size() - 1));
        std::vector<double> vec(dim);
        for (size_t k = 0; k < dim; ++k) {
            if (!parse_double(fields[k + 1], vec[k]))
                throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                         ": bad float '" + fields[k + 1] + "'");
        }
        auto [it, fresh] = table.vectors_.emplace(fields[0], vec);
        if (!fresh) {
            std::cerr << "warning: " << path.filename().string() << ":" << line_no
                      << ": duplicate token '" << fields[0] << "', last occurrence wins\n";
            it->second = std::move(vec);
        }
        ++rows;
    }
    if (rows != declared)
        std::cerr << "warning: " << path.filename().string() << ": header declares " << declared
                  << " rows, file has " << rows << "\n";
    return table;
}

EmbeddingTable EmbeddingTable::hash_fallback(size_t dim, uint64_t seed) {
    if (dim == 0) throw std::runtime_error("embedding dimension must be positive");
    EmbeddingTable table;
    table.dim_ = dim;
    table.fallback_ = true;
    table.fallback_seed_ = seed;
    return table;
}

void EmbeddingTable::dump(std::ostream& out) const {
    std::vector<const std::string*> tokens;
    tokens.reserve(vectors_.size());
    for (const auto& [tok, vec] : vectors_) tokens.push_back(&tok);
    std::sort(tokens.begin(), tokens.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    out << vectors_.size() << ' ' << dim_ << '\n';
    for (const std::string* tok : tokens) {
        out << *tok;
        for (double v : vectors_.at(*tok)) out << ' ' << format_roundtrip(v);
        out << '\n';
    }
}

std::optional<std::vector<double>> EmbeddingTable::get(std::string_view token) const {
    auto it = vectors_.find(std::string(token));
    if (it != vectors_.end()) return it->second;
    if (!fallback_) return std::nullopt;
    std::vector<double> vec(dim_);
    uint64_t state = fnv1a64(token) ^ fallback_seed_;
    double sq = 0.0;
    for (size_t k = 0; k < dim_; ++k) {
        state = mix64(state);
        double u = static_cast<double>(state >> 11) * 0x1.0p-53;  // [0,1)
        vec[k] = 2.0 * u - 1.0;
        sq += vec[k] * vec[k];
    }
    double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
    for (auto& v : vec) v *= inv;
    return vec;
}

bool FeatureVector::same_layout(const FeatureVector& o) const {
    return bow_dim == o.bow_dim && boe_dim == o.boe_dim && eow.size() == o.eow.size() &&
           eoe.size() == o.eoe.size();
}

bool FeatureVector::is_zero() const { return norm() == 0.0; }

double FeatureVector::norm() const {
    double sq = sparse_norm_sq(bow) + sparse_norm_sq(boe);
    for (double v : eow) sq += v * v;
    for (double v : eoe) sq += v * v;
    return std::sqrt(sq);
}

namespace {

void add_sparse_scaled(std::vector<SparseEntry>& dst, const std::vector<SparseEntry>& src,
                       double w) {
    std::vector<SparseEntry> merged;
    merged.reserve(dst.size() + src.size());
    size_t i = 0, j = 0;
    while (i < dst.size() || j < src.size()) {
        if (j >= src.size() || (i < dst.size() && dst[i].index < src[j].index)) {
            merged.push_back(dst[i++]);
        } else if (i >= dst.size() || src[j].index < dst[i].index) {
            merged.push_back({src[j].index, w * src[j].weight});
            ++j;
        } else {
            merged.push_back({dst[i].index, dst[i].weight + w * src[j].weight});
            ++i;
            ++j;
        }
    }
    dst = std::move(merged);
}

}  // namespace

void add_scaled(FeatureVector& dst, const FeatureVector& src, double w) {
    if (w == 0.0) return;
    if (!dst.same_layout(src)) throw std::invalid_argument("feature vector layout mismatch");
    add_sparse_scaled(dst.bow, src.bow, w);
    add_sparse_scaled(dst.boe, src.boe, w);
    for (size_t k = 0; k < dst.eow.size(); ++k) dst.eow[k] += w * src.eow[k];
    for (size_t k = 0; k < dst.eoe.size(); ++k) dst.eoe[k] += w * src.eoe[k];
}

double cosine(const FeatureVector& u, const FeatureVector& v) {
    if (!u.same_layout(v)) throw std::invalid_argument("feature vector layout mismatch");
    double dot = sparse_dot(u.bow, v.bow) + sparse_dot(u.boe, v.boe);
    for (size_t k = 0; k < u.eow.size(); ++k) dot += u.eow[k] * v.eow[k];
    for (size_t k = 0; k < u.eoe.size(); ++k) dot += u.eoe[k] * v.eoe[k];
    double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot / (nu * nv);
}

NameIndex NameIndex::build(const EntityStore& entities, const std::vector<std::string>& columns) {
    NameIndex ni;
    ni.columns_ = columns;
    for (uint32_t col = 0; col < ni.columns_.size(); ++col) {
        ni.column_index_.emplace(ni.columns_[col], col);
        const Entity* e = entities.find(ni.columns_[col]);
        if (!e) throw std::runtime_error("name index: unknown concept '" + ni.columns_[col] + "'");
        auto tokens = tokenize(e->title);
        if (tokens.empty()) continue;
        std::string phrase;
        for (size_t k = 0; k < tokens.size(); ++k) {
            if (k) phrase.push_back(' ');
            phrase += tokens[k];
        }
        auto [it, fresh] = ni.phrase_to_column_.emplace(phrase, col);
        if (!fresh) {
            // Colliding titles: keep the smaller concept id so runs reproduce.
            if (ni.columns_[col] < ni.columns_[it->second]) it->second = col;
            std::cerr << "warning: concept title '" << phrase << "' shared by multiple concepts\n";
        }
        ni.max_phrase_tokens_ = std::max(ni.max_phrase_tokens_, tokens.size());
    }
    return ni;
}

std::optional<uint32_t> NameIndex::column_of(std::string_view id) const {
    auto it = column_index_.find(std::string(id));
    if (it == column_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<SpotHit> NameIndex::spot_hits(std::string_view text) const {
    std::vector<SpotHit> hits;
    if (phrase_to_column_.empty()) return hits;
    auto tokens = tokenize_spans(text);
    size_t i = 0;
    while (i < tokens.size()) {
        size_t longest = 0;
        uint32_t col = 0;
        size_t limit = std::min(max_phrase_tokens_, tokens.size() - i);
        std::string phrase;
        for (size_t len = 1; len <= limit; ++len) {
            if (len > 1) phrase.push_back(' ');
            phrase += tokens[i + len - 1].text;
            auto it = phrase_to_column_.find(phrase);
            if (it != phrase_to_column_.end()) {
                longest = len;
                col = it->second;
            }
        }
        if (longest > 0) {
            hits.push_back({col, tokens[i].begin, tokens[i + longest - 1].end});
            i += longest;
        } else {
            ++i;
        }
    }
    return hits;
}

std::vector<Mention> NameIndex::spot(std::string_view text) const {
    auto hits = spot_hits(text);
    std::map<uint32_t, Mention> agg;
    for (const auto& h : hits) {
        auto it = agg.find(h.column);
        if (it == agg.end()) {
            Mention m;
            m.entity_id = columns_[h.column];
            m.column = h.column;
            m.begin = h.begin;
            m.end = h.end;
            m.count = 1;
            agg.emplace(h.column, std::move(m));
        } else {
            ++it->second.count;
        }
    }
    std::vector<Mention> out;
    out.reserve(agg.size());
    for (auto& [col, m] : agg) out.push_back(std::move(m));
    return out;
}

std::vector<SparseEntry> bow_block(const std::vector<std::string>& tokens,
                                   const Vocabulary& vocab) {
    std::map<uint32_t, double> tf;
    for (const auto& t : tokens) {
        auto idx = vocab.lookup(t);
        if (idx) tf[*idx] += 1.0;
    }
    std::vector<SparseEntry> entries;
    entries.reserve(tf.size());
    for (const auto& [idx, count] : tf) entries.push_back({idx, count * vocab.idf(idx)});
    l2_normalize(entries);
    return entries;
}

std::vector<double> eow_block(const std::vector<std::string>& tokens, const EmbeddingTable& table,
                              const Vocabulary& vocab) {
    std::vector<double> sum(table.dim(), 0.0);
    double total_idf = 0.0;
    for (const auto& t : tokens) {
        auto idx = vocab.lookup(t);
        if (!idx) continue;
        auto vec = table.get(t);
        if (!vec) continue;
        double w = vocab.idf(*idx);
        for (size_t k = 0; k < sum.size(); ++k) sum[k] += w * (*vec)[k];
        total_idf += w;
    }
    if (total_idf > 0.0)
        for (auto& v : sum) v /= total_idf;
    return sum;
}

std::vector<SparseEntry> boe_block(const std::vector<Mention>& mentions) {
    std::vector<SparseEntry> entries;
    entries.reserve(mentions.size());
    for (const auto& m : mentions) entries.push_back({m.column, static_cast<double>(m.count)});
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    l2_normalize(entries);
    return entries;
}

std::vector<double> eoe_block(const std::vector<Mention>& mentions,
                              const std::vector<std::vector<double>>& entity_vectors, size_t dim) {
    std::vector<double> sum(dim, 0.0);
    double total = 0.0;
    for (const auto& m : mentions) {
        total += m.count;
        if (m.column >= entity_vectors.size()) continue;
        const auto& vec = entity_vectors[m.column];
        for (size_t k = 0; k < dim && k < vec.size(); ++k)
            sum[k] += static_cast<double>(m.count) * vec[k];
    }
    if (total > 0.0)
        for (auto& v : sum) v /= total;
    return sum;
}

FeatureVector FeatureContext::featurize(std::string_view text) const {
    FeatureVector fv;
    auto tokens = tokenize(text);
    auto mentions = names.spot(text);
    fv.bow = bow_block(tokens, vocab);
    fv.boe = boe_block(mentions);
    fv.eow = eow_block(tokens, table, vocab);
    fv.eoe = eoe_block(mentions, entity_vectors, table.dim());
    fv.bow_dim = static_cast<uint32_t>(vocab.size());
    fv.boe_dim = static_cast<uint32_t>(names.column_count());
    scale_block(fv.bow, weights.bow);
    scale_block(fv.boe, weights.boe);
    scale_block(fv.eow, weights.eow);
    scale_block(fv.eoe, weights.eoe);
    return fv;
}

FeatureContext build_feature_context(const CorpusSnapshot& snap,
                                     const std::vector<std::string>& concept_ids,
                                     EmbeddingTable table, BlockWeights weights, uint32_t min_df) {
    std::vector<std::string> columns(concept_ids);
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());

    std::vector<std::vector<std::string>> units;
    units.reserve(snap.documents.size() + columns.size() + snap.venues.size());
    for (const Document& d : snap.documents) {
        std::string text = d.title;
        for (const auto& k : d.keywords) { text.push_back(' '); text += k; }
        text.push_back(' ');
        text += d.abstract;
        units.push_back(tokenize(text));
    }
    for (const auto& id : columns) {
        const Entity* e = snap.entities.find(id);
        units.push_back(e ? tokenize(e->first_paragraph) : std::vector<std::string>{});
    }
    for (const Venue& v : snap.venues) units.push_back(tokenize(v.full_name));

    FeatureContext ctx{Vocabulary::build(units, min_df), std::move(table),
                       NameIndex::build(snap.entities, columns), {}, weights};

    ctx.entity_vectors.resize(columns.size());
    for (uint32_t col = 0; col < columns.size(); ++col) {
        const Entity* e = snap.entities.find(columns[col]);
        ctx.entity_vectors[col] =
            e ? eow_block(tokenize(e->first_paragraph), ctx.table, ctx.vocab)
              : std::vector<double>(ctx.table.dim(), 0.0);
    }
    return ctx;
}

}  // namespace fos
