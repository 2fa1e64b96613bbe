#pragma once
// Concept-to-publication tagging.
//
// Representations:
//   publication SRT  = title + keywords + abstract
//   venue SRT        = full name
//   concept SRT      = first paragraph of its entity
//   venue ERT        = sum of a sampled subset of member-doc SRTs + venue SRT
//   concept ERT      = sum of curated venues' ERTs + concept SRT
//                      (concept SRT alone when no venues are curated)
//   publication ERT  = own SRT
//                      + w_cit * SRT of each citing doc
//                      + w_ref * SRT of each referenced doc
//                      + w_venue * venue ERT
//                      with citation/reference sets truncated to neighbor_cap
//                      in ascending doc-id order.
//
// A document's candidate set is all L0s and L1s plus every concept spotted in
// its extended text, capped. Confidence is the cosine between concept ERT and
// publication ERT; pairs at or above theta are emitted.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fos/corpus.hpp"
#include "fos/discovery.hpp"
#include "fos/vectorize.hpp"

namespace fos {

struct ErtWeights {
    double cit = 0.1;
    double ref = 0.1;
    double venue = 0.5;
    size_t neighbor_cap = 50;
    size_t venue_sample = 100;

    void validate() const;
};

struct TaggingParams {
    double theta = 0.5;
    size_t candidate_cap = 400;
    uint64_t rng_seed = 1;

    void validate() const;
};

struct TagPair {
    std::string doc_id;
    std::string concept_id;
    double confidence;  // in [0,1], >= theta for emitted pairs
};

struct TaggingStats {
    uint64_t scored_pairs = 0;
    uint64_t emitted_pairs = 0;
    uint64_t spotted_candidates = 0;
};

// Core scoring rule: cosine each candidate vector against the document ERT,
// keep pairs at or above theta, clamp to [0,1], sort by confidence descending
// then concept id.
std::vector<TagPair> score_tag_pairs(
    const std::string& doc_id, const FeatureVector& doc_ert,
    const std::vector<std::pair<std::string, const FeatureVector*>>& candidates, double theta,
    TaggingStats* stats = nullptr);

class TaggingEngine {
public:
    // Precomputes doc SRTs, venue ERTs, and concept ERT vectors. The snapshot
    // and context must outlive the engine; after construction everything is
    // read-only and per-document calls are safe to run in parallel.
    TaggingEngine(const CorpusSnapshot& snap, const FeatureContext& ctx,
                  const FosRegistry& registry, ErtWeights weights, uint64_t rng_seed);

    FeatureVector srt_publication(const Document& doc) const;
    FeatureVector srt_venue(const Venue& venue) const;
    FeatureVector srt_concept(const Entity& concept_entity) const;

    const FeatureVector& venue_ert(const std::string& venue_id) const;
    const FeatureVector& concept_vector(const std::string& concept_id) const;

    FeatureVector ert_publication(const Document& doc) const;

    // Extended text used for candidate spotting: own SRT text plus capped
    // neighbor titles plus venue name.
    std::string ert_text(const Document& doc) const;

    // Sorted concept columns: all L0/L1 plus spotted concepts ranked by
    // mention count (ties by id), truncated to candidate_cap.
    std::vector<uint32_t> candidate_concepts(const Document& doc,
                                             const TaggingParams& params) const;

    std::vector<TagPair> tag_document(const Document& doc, const TaggingParams& params,
                                      TaggingStats* stats = nullptr) const;

    // All documents in ascending doc-id order; per-document pairs sorted by
    // confidence descending, ties by concept id.
    std::vector<TagPair> tag_corpus(const TaggingParams& params,
                                    TaggingStats* stats = nullptr) const;

    static std::string srt_text(const Document& doc);

private:
    const CorpusSnapshot& snap_;
    const FeatureContext& ctx_;
    ErtWeights weights_;
    std::vector<FeatureVector> doc_srt_;      // by document store index
    std::vector<FeatureVector> venue_ert_;    // by venue store index
    std::vector<FeatureVector> concept_vec_;  // by concept column
    std::vector<uint32_t> l0l1_columns_;      // sorted
};

void write_tags_tsv(const std::vector<TagPair>& tags, const std::filesystem::path& path);
std::vector<TagPair> read_tags_tsv(const std::filesystem::path& path);

}  // namespace fos
