#pragma once
// Input stores: entity link graph, publication corpus, venues, and the seed
// taxonomy. Everything is loaded from JSONL/JSON, cross-linked, validated,
// and then frozen; downstream stages only ever read a CorpusSnapshot.
//
// Incoming edges (entity in_links, document citations, venue member_docs)
// are always derived from the outgoing side at load, never read from input.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace fos {

struct Entity {
    std::string id;
    std::string title;
    std::string first_paragraph;
    std::vector<std::string> kb_types;   // sorted, unique
    std::vector<std::string> out_links;  // sorted, unique
    std::vector<std::string> in_links;   // derived transpose, sorted
};

struct Document {
    std::string id;
    std::string title;
    std::vector<std::string> keywords;
    std::string abstract;
    std::optional<std::string> venue_id;
    std::vector<std::string> references;  // outgoing, sorted, unique
    std::vector<std::string> citations;   // derived transpose, sorted
};

struct Venue {
    std::string id;
    std::string full_name;
    std::vector<std::string> member_docs;  // derived, sorted
};

struct SeedTaxonomy {
    std::vector<std::string> l0;        // sorted, unique
    std::vector<std::string> l1;        // sorted, unique
    std::vector<std::string> seed_fos;  // sorted, unique; superset of l0 and l1
    std::vector<std::pair<std::string, std::string>> l0_l1_edges;  // (child, parent)
    std::map<std::string, std::vector<std::string>> concept_venue_map;
    std::vector<std::string> type_allowlist;
    std::vector<std::string> type_blocklist;

    bool is_l0(const std::string& id) const;
    bool is_l1(const std::string& id) const;
    bool is_seed(const std::string& id) const;
};

// Insertion-ordered record store with id lookup.
template <typename T>
class Store {
public:
    // Records must have unique ids; callers with line context check first.
    void add(T rec) {
        auto [it, fresh] = index_.emplace(rec.id, static_cast<uint32_t>(items_.size()));
        if (!fresh) throw std::runtime_error("duplicate id: " + rec.id);
        items_.push_back(std::move(rec));
    }
    const T* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &items_[it->second];
    }
    std::optional<uint32_t> index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    const T& at(size_t i) const { return items_[i]; }
    T& at_mut(size_t i) { return items_[i]; }
    size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

private:
    std::vector<T> items_;
    std::unordered_map<std::string, uint32_t> index_;
};

using EntityStore = Store<Entity>;
using DocumentStore = Store<Document>;
using VenueStore = Store<Venue>;

struct CorpusSnapshot {
    EntityStore entities;
    DocumentStore documents;
    VenueStore venues;
    SeedTaxonomy seeds;
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    size_t entity_count = 0;
    size_t document_count = 0;
    size_t venue_count = 0;
    size_t seed_count = 0;
    size_t dangling_entity_links = 0;  // out_links to unknown entities
    size_t unresolved_venue_docs = 0;  // docs whose venue_id has no venue

    bool ok() const { return errors.empty(); }
    std::string to_string() const;
};

// Loaders throw std::runtime_error with "<file>:<line>" context on malformed
// input, duplicate ids, self-references, and dangling document references.
EntityStore load_entities(const std::filesystem::path& path);
DocumentStore load_documents(const std::filesystem::path& path);
VenueStore load_venues(const std::filesystem::path& path);
SeedTaxonomy load_seed_taxonomy(const std::filesystem::path& path);

// In-memory builders used by tests and the synthetic generator. They run the
// same transpose/invariant logic as the file loaders.
EntityStore build_entity_store(std::vector<Entity> records);
DocumentStore build_document_store(std::vector<Document> records);
VenueStore build_venue_store(std::vector<Venue> records);
SeedTaxonomy build_seed_taxonomy(SeedTaxonomy raw);

// Derives venue member_docs and assembles the snapshot. Cross-store checks
// live in validate_corpus.
CorpusSnapshot make_snapshot(EntityStore entities, DocumentStore documents,
                             VenueStore venues, SeedTaxonomy seeds);

ValidationReport validate_corpus(const CorpusSnapshot& snap);

// Load all four inputs, assemble, validate; throws if validation fails.
CorpusSnapshot load_corpus(const std::filesystem::path& entities_path,
                           const std::filesystem::path& documents_path,
                           const std::filesystem::path& venues_path,
                           const std::filesystem::path& seeds_path);

// Canonical serialization of a snapshot; equal bytes iff equal content.
std::string snapshot_serialize(const CorpusSnapshot& snap);

}  // namespace fos
