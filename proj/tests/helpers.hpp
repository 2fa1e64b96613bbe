#pragma once
// Shared fixture builders and independent oracles for the test suites. The
// oracles deliberately reimplement the formulas with different data
// structures (sets and maps instead of sorted posting lists) so they can
// disagree with the library if either side is wrong.

#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fos/corpus.hpp"
#include "fos/hierarchy.hpp"
#include "fos/relatedness.hpp"
#include "fos/tagging.hpp"
#include "fos/util.hpp"

namespace testutil {

inline fos::Entity entity(std::string id, std::string title = "", std::string paragraph = "",
                          std::vector<std::string> types = {},
                          std::vector<std::string> out_links = {}) {
    fos::Entity e;
    e.id = std::move(id);
    e.title = std::move(title);
    e.first_paragraph = std::move(paragraph);
    e.kb_types = std::move(types);
    e.out_links = std::move(out_links);
    return e;
}

inline fos::Document document(std::string id, std::string title = "",
                              std::vector<std::string> keywords = {}, std::string abstract = "",
                              std::string venue = "", std::vector<std::string> references = {}) {
    fos::Document d;
    d.id = std::move(id);
    d.title = std::move(title);
    d.keywords = std::move(keywords);
    d.abstract = std::move(abstract);
    if (!venue.empty()) d.venue_id = venue;
    d.references = std::move(references);
    return d;
}

inline fos::Venue venue(std::string id, std::string full_name) {
    fos::Venue v;
    v.id = std::move(id);
    v.full_name = std::move(full_name);
    return v;
}

inline fos::CorpusSnapshot snapshot(std::vector<fos::Entity> entities,
                                    std::vector<fos::Document> documents = {},
                                    std::vector<fos::Venue> venues = {},
                                    fos::SeedTaxonomy seeds = {}) {
    return fos::make_snapshot(fos::build_entity_store(std::move(entities)),
                              fos::build_document_store(std::move(documents)),
                              fos::build_venue_store(std::move(venues)),
                              fos::build_seed_taxonomy(std::move(seeds)));
}

// A scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() / ("fos_test_" + tag);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// ---- relatedness oracle ----

// Closeness straight from the formula over string-id link sets.
inline double oracle_closeness(const std::map<std::string, std::set<std::string>>& in_links,
                               const std::string& a, const std::string& b, size_t total) {
    const auto& la = in_links.at(a);
    const auto& lb = in_links.at(b);
    std::set<std::string> inter;
    for (const auto& x : la)
        if (lb.count(x)) inter.insert(x);
    if (inter.empty()) return 0.0;
    double hi = static_cast<double>(std::max(la.size(), lb.size()));
    double lo = static_cast<double>(std::min(la.size(), lb.size()));
    double num = std::log(hi) - std::log(static_cast<double>(inter.size()));
    if (num <= 0.0) return 1.0;
    double score = 1.0 - num / (std::log(static_cast<double>(total)) - std::log(lo));
    return std::clamp(score, 0.0, 1.0);
}

inline std::map<std::string, std::set<std::string>> in_link_map(const fos::CorpusSnapshot& snap) {
    std::map<std::string, std::set<std::string>> in;
    for (const fos::Entity& e : snap.entities) in[e.id];
    for (const fos::Entity& e : snap.entities)
        for (const auto& target : e.out_links)
            if (snap.entities.find(target)) in[target].insert(e.id);
    return in;
}

// All-pairs ranking by (score desc, id asc), truncated to n.
inline std::vector<std::pair<std::string, double>> oracle_top_n(
    const std::map<std::string, std::set<std::string>>& in_links, const std::string& e, size_t n) {
    std::vector<std::pair<std::string, double>> all;
    for (const auto& [id, links] : in_links) {
        if (id == e) continue;
        all.push_back({id, oracle_closeness(in_links, e, id, in_links.size())});
    }
    std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (all.size() > n) all.resize(n);
    return all;
}

// ---- hierarchy oracles ----

// Relative coverage from a raw pair list, via per-concept doc->weight maps.
inline double oracle_rc(const std::vector<fos::TagPair>& tags, const std::string& i,
                        const std::string& j) {
    std::map<std::string, double> wi, wj;
    for (const auto& t : tags) {
        if (t.concept_id == i) wi[t.doc_id] = t.confidence;
        if (t.concept_id == j) wj[t.doc_id] = t.confidence;
    }
    double wi_total = 0.0, wj_total = 0.0, wi_inter = 0.0, wj_inter = 0.0;
    bool any = false;
    for (const auto& [d, w] : wi) {
        wi_total += w;
        if (wj.count(d)) {
            wi_inter += w;
            any = true;
        }
    }
    for (const auto& [d, w] : wj) {
        wj_total += w;
        if (wi.count(d)) wj_inter += w;
    }
    if (!any) return 0.0;
    return wi_inter / wi_total - wj_inter / wj_total;
}

inline bool oracle_subsumption(const std::vector<fos::TagPair>& tags, const std::string& i,
                               const std::string& j, double p) {
    std::set<std::string> di, dj;
    for (const auto& t : tags) {
        if (t.concept_id == i) di.insert(t.doc_id);
        if (t.concept_id == j) dj.insert(t.doc_id);
    }
    if (di.empty() || dj.empty()) return false;
    size_t inter = 0;
    for (const auto& d : di)
        if (dj.count(d)) ++inter;
    double p_j_given_i = static_cast<double>(inter) / static_cast<double>(di.size());
    double p_i_given_j = static_cast<double>(inter) / static_cast<double>(dj.size());
    return p_j_given_i >= p && p_i_given_j < 1.0;
}

// Random tag sets for property sweeps. mt19937 with explicit moduli keeps the
// fixtures identical everywhere.
inline std::vector<fos::TagPair> random_tags(uint64_t seed, size_t max_concepts, size_t max_docs,
                                             bool unit_weights = false) {
    std::mt19937_64 gen(seed);
    size_t n_concepts = 2 + gen() % (max_concepts - 1);
    size_t n_docs = 2 + gen() % (max_docs - 1);
    std::vector<fos::TagPair> tags;
    for (size_t c = 0; c < n_concepts; ++c) {
        std::string cid = "c" + std::to_string(c);
        size_t picks = 1 + gen() % n_docs;
        std::set<size_t> chosen;
        for (size_t k = 0; k < picks; ++k) chosen.insert(gen() % n_docs);
        for (size_t d : chosen) {
            double w = unit_weights
                           ? 1.0
                           : 0.05 + 0.95 * (static_cast<double>(gen() % 10000) / 10000.0);
            tags.push_back({"d" + std::to_string(d), cid, w});
        }
    }
    return tags;
}

}  // namespace testutil
