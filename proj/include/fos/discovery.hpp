#pragma once
// Growing the concept registry. Each iteration votes every non-member entity
// against its top-N neighbors (an entity joins when strictly more than K of
// them are already members), filters by KB type, pulls in every entity with
// an allowlisted type, and merges at the iteration barrier. Stops at the
// first iteration that adds nothing, or at max_iterations.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fos/corpus.hpp"
#include "fos/relatedness.hpp"

namespace fos {

struct DiscoveryParams {
    size_t n_neighbors = 100;   // N
    size_t vote_threshold = 40; // K; membership requires count > K
    size_t max_iterations = 10;

    void validate() const;
};

enum class Provenance { seed, vote, type_enrichment };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(std::string_view name);

struct FosRegistry {
    struct Record {
        std::string id;
        Provenance provenance;
        uint32_t iteration;  // 0 for seeds
    };
    std::vector<Record> records;  // sorted by id

    bool contains(const std::string& id) const;
    std::vector<std::string> concept_ids() const;
    size_t size() const { return records.size(); }
};

// True iff strictly more than params.vote_threshold of e's top-N neighbors
// are in current_fos. e must not already be a member.
bool knn_vote(const LinkIndex& index, std::string_view e,
              const std::set<std::string>& current_fos, const DiscoveryParams& params);

struct TypeFilterResult {
    std::set<std::string> accepted;  // candidates minus rejected
    std::set<std::string> rejected;  // candidates with any blocklisted type
    std::set<std::string> enriched;  // every store entity with an allowlisted
                                     // type and no blocklisted type
};

// Throws if allowlist and blocklist overlap. Entities with no types pass.
TypeFilterResult type_filter(const EntityStore& entities, const std::set<std::string>& candidates,
                             const std::vector<std::string>& allowlist,
                             const std::vector<std::string>& blocklist);

// Full iteration loop; logs per-iteration growth to `log` when non-null.
FosRegistry discover(const CorpusSnapshot& snap, const LinkIndex& index,
                     const DiscoveryParams& params, std::ostream* log = nullptr);

void write_registry_jsonl(const FosRegistry& registry, const std::filesystem::path& path);
FosRegistry read_registry_jsonl(const std::filesystem::path& path);

}  // namespace fos
