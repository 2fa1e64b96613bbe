#pragma once
// Synthetic corpora with planted structure, the ground truth for pipeline
// verification.
//
// Topic tree: n_l0 roots, n_l1_per_l0 branches each, n_leaf_per_l1 leaves
// per branch. Every topic owns a disjoint token vocabulary and one entity
// whose first paragraph is drawn from it. Each leaf owns docs_per_leaf
// documents whose keywords name the leaf and its ancestors and whose
// abstract mixes leaf/branch/root vocabulary; a noise_rate fraction of
// abstract tokens (exact count, floor(noise_rate * len)) is replaced by
// shared background vocabulary.
//
// Link graph: all topic entities form one complete directed cluster, and
// background entities form separate complete clusters sized above the
// neighbor-list length, so nearest-neighbor voting has a provable fixpoint.
//
// Venues: one per branch topic; member documents are the branch's leaf docs.
// The seed file curates branch -> venue and root -> branch-venues mappings.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fos/corpus.hpp"

namespace fos {

struct PlantedSpec {
    uint32_t n_l0 = 1;
    uint32_t n_l1_per_l0 = 2;
    uint32_t n_leaf_per_l1 = 2;
    uint32_t docs_per_leaf = 10;
    uint32_t vocab_per_topic = 8;
    double noise_rate = 0.0;
    uint64_t rng_seed = 1;

    // Extras for discovery fixtures: entities outside the topic tree, and a
    // reduced seed set (all leaves are seeds when n_seed_leaves is negative).
    uint32_t n_background_entities = 0;
    int64_t n_seed_leaves = -1;
    uint32_t abstract_tokens = 48;
    uint32_t background_vocab = 64;
    uint32_t refs_per_doc = 2;

    void validate() const;
};

struct PlantedTruth {
    std::vector<std::string> fos_ids;                              // all topic ids
    std::vector<std::pair<std::string, std::string>> tree_edges;   // (child, parent)
    std::vector<std::pair<std::string, std::string>> tags;         // (doc, topic+ancestors)
    std::map<std::string, int> topic_level;                        // 0, 1, or 2 (leaf)
};

struct SynCorpus {
    std::vector<Entity> entities;
    std::vector<Document> documents;
    std::vector<Venue> venues;
    SeedTaxonomy seeds;
    PlantedTruth truth;
};

SynCorpus generate_corpus(const PlantedSpec& spec);

// Assembles the generated records into a validated snapshot.
CorpusSnapshot snapshot_from(const SynCorpus& syn);

// Writes entities.jsonl, documents.jsonl, venues.jsonl, seeds.json, and
// ground_truth/{fos.tsv, tree_edges.tsv, tags.tsv} under out_dir.
void write_corpus(const SynCorpus& syn, const std::filesystem::path& out_dir);

}  // namespace fos
