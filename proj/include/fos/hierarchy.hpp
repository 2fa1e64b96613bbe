#pragma once
// Subsumption hierarchy over tagged concepts.
//
// With I, J the document posting lists of concepts i, j and w_{i,k} the tag
// confidence, the weighted relative coverage is
//
//   RC(i,j) = sum_{k in I∩J} w_{i,k} / sum_{k in I} w_{i,k}
//           - sum_{k in I∩J} w_{j,k} / sum_{k in J} w_{j,k}
//
// (0 when the intersection is empty). i becomes a child of j when RC(i,j)
// exceeds a positive threshold and j's total weight mass strictly exceeds
// i's (ties broken by id), which rules out cycles: parent mass strictly
// increases along every path. Curated L0/L1 edges replace computed edges
// whose child is an L0 or L1 concept. Levels: L0 = 0, L1 = 1, others
// min(5, 1 + max parent level), parentless concepts level 2.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fos/corpus.hpp"
#include "fos/tagging.hpp"

namespace fos {

class TagIndex {
public:
    // Throws on duplicate (concept, doc) pairs or weights outside (0,1].
    // Concepts with no tags do not appear.
    static TagIndex build(const std::vector<TagPair>& tags);

    size_t concept_count() const { return concept_ids_.size(); }
    const std::string& concept_id(uint32_t idx) const { return concept_ids_[idx]; }
    std::optional<uint32_t> index_of(const std::string& concept_id) const;

    // (doc ordinal, weight), sorted by doc ordinal.
    const std::vector<std::pair<uint32_t, double>>& postings(uint32_t idx) const {
        return postings_[idx];
    }
    double mass(uint32_t idx) const { return mass_[idx]; }
    size_t doc_count() const { return doc_ids_.size(); }
    const std::string& doc_id(uint32_t ordinal) const { return doc_ids_[ordinal]; }

private:
    std::vector<std::string> concept_ids_;  // sorted
    std::unordered_map<std::string, uint32_t> concept_index_;
    std::vector<std::vector<std::pair<uint32_t, double>>> postings_;
    std::vector<double> mass_;
    std::vector<std::string> doc_ids_;  // sorted
};

TagIndex build_tag_index(const std::vector<TagPair>& tags);

double relative_coverage(const TagIndex& index, const std::string& concept_i,
                         const std::string& concept_j);

// Presence-only subsumption: j subsumes i when |I∩J|/|I| >= p and
// |I∩J|/|J| < 1. Weights are ignored.
bool classic_subsumption(const TagIndex& index, const std::string& concept_i,
                         const std::string& concept_j, double p);

struct HierarchyEdge {
    std::string child;
    std::string parent;
    double rc;
};

struct LeveledDag {
    std::vector<HierarchyEdge> edges;       // sorted by (child, parent)
    std::map<std::string, int> level;       // every node in the dag
};

LeveledDag build_hierarchy(const TagIndex& index, double threshold, const SeedTaxonomy& seeds);

// Levels for an arbitrary edge set; throws on cycles.
std::map<std::string, int> assign_levels(const std::vector<HierarchyEdge>& edges,
                                         const SeedTaxonomy& seeds,
                                         const std::vector<std::string>& nodes);

struct DagDiagnostics {
    bool acyclic = true;
    std::vector<std::string> cycle;     // one offending cycle when not acyclic
    size_t node_count = 0;
    size_t edge_count = 0;
    size_t orphan_count = 0;            // nodes with no edges at all
    size_t max_depth = 0;               // longest chain, counted in nodes
    std::array<size_t, 6> level_histogram{};

    std::string to_string() const;
};

DagDiagnostics check_dag(const LeveledDag& dag);

void write_hierarchy_tsv(const LeveledDag& dag, const std::filesystem::path& path);
void write_levels_tsv(const LeveledDag& dag, const std::filesystem::path& path);
LeveledDag read_hierarchy(const std::filesystem::path& edges_path,
                          const std::filesystem::path& levels_path);

}  // namespace fos
