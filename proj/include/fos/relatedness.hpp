#pragma once
// Link-based semantic closeness between entities.
//
// The measure is the in-link variant of the Milne-Witten normalized link
// distance: with A, B the in-link sets of two entities and W the total
// entity count,
//
//   closeness = 1 - (log max(|A|,|B|) - log |A∩B|) / (log W - log min(|A|,|B|))
//
// clamped to [0,1], defined as 0 when the intersection is empty and 1 when
// the sets are identical. Queries are pure against an immutable index.

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fos/corpus.hpp"

namespace fos {

class LinkIndex {
public:
    static LinkIndex build(const CorpusSnapshot& snap);

    size_t entity_count() const { return ids_.size(); }  // W
    const std::string& id_of(uint32_t idx) const { return ids_[idx]; }
    uint32_t index_of(std::string_view id) const;        // throws on unknown id
    const std::vector<uint32_t>& in_links(uint32_t idx) const { return in_links_[idx]; }

    double closeness(uint32_t a, uint32_t b) const;

    // Top n entities by closeness to e, excluding e itself. Descending score;
    // ties (including zero scores) break by entity id ascending.
    std::vector<std::pair<uint32_t, double>> top_n(uint32_t e, size_t n) const;

private:
    std::vector<std::string> ids_;                   // store order
    std::unordered_map<std::string, uint32_t> id_to_idx_;
    std::vector<std::vector<uint32_t>> in_links_;    // sorted
    std::vector<std::vector<uint32_t>> out_links_;   // sorted; co-link join
    std::vector<uint32_t> by_id_;                    // indexes sorted by id
    std::vector<uint32_t> id_rank_;                  // idx -> position in by_id_
};

LinkIndex build_link_index(const CorpusSnapshot& snap);

double semantic_closeness(const LinkIndex& index, std::string_view a, std::string_view b);

std::vector<std::pair<std::string, double>> top_n_neighbors(const LinkIndex& index,
                                                            std::string_view e, size_t n);

// TSV dump of every entity's top-n list: entity_id \t neighbor_id \t score.
void dump_top_n_tsv(const LinkIndex& index, size_t n, std::ostream& out);

}  // namespace fos
