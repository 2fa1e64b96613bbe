#pragma once
// Batch orchestration: discover -> tag -> hierarchy, each stage a pure
// file-to-file transform under one output directory.
//
//   fos_registry.jsonl   discovery output
//   tags.tsv             tagging output
//   hierarchy.tsv        child \t parent \t rc
//   levels.tsv           concept \t level
//   stats.txt            run report
//   manifest.json        per-stage completion flags and content hashes
//
// A stage whose outputs exist, hash-match the manifest, and were produced
// under the same config digest is skipped on rerun; anything else is
// recomputed from the artifacts of the stage before it.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include "fos/discovery.hpp"
#include "fos/hierarchy.hpp"
#include "fos/tagging.hpp"
#include "fos/vectorize.hpp"

namespace fos {

struct PipelineConfig {
    std::filesystem::path entities_path;
    std::filesystem::path documents_path;
    std::filesystem::path venues_path;
    std::filesystem::path seeds_path;
    std::filesystem::path embeddings_path;  // empty -> hash fallback if enabled
    std::filesystem::path out_dir;

    DiscoveryParams discovery;
    ErtWeights weights;
    TaggingParams tagging;
    double rc_threshold = 0.3;
    BlockWeights block_weights;
    uint32_t min_df = 1;
    size_t embedding_dim = 64;
    bool hash_fallback = true;
    uint64_t rng_seed = 1;

    // Flat key-value file; '#' starts a comment. Unknown keys are errors.
    static PipelineConfig load(const std::filesystem::path& path);
    void validate() const;

    // Canonical dump of every parameter except out_dir; runs with equal
    // digests are interchangeable.
    std::string canonical() const;
    std::string digest() const;

    uint64_t stage_seed(std::string_view stage) const;
};

EmbeddingTable load_embedding_table(const PipelineConfig& cfg);

// Individual stages; each reads its inputs from files and writes its
// artifacts plus a manifest entry. They throw on failure.
void run_discover_stage(const PipelineConfig& cfg, std::ostream& log);
void run_tag_stage(const PipelineConfig& cfg, std::ostream& log);
void run_hierarchy_stage(const PipelineConfig& cfg, std::ostream& log);

// Full pipeline with resume; returns a process exit code.
int run_pipeline(const PipelineConfig& cfg, std::ostream& log);

// Stats report over whatever artifacts exist in cfg.out_dir.
std::string stats_report(const PipelineConfig& cfg);

// 500 uniformly sampled rows from a stage artifact (all rows with a warning
// when fewer exist), split into 5 groups with human-readable context, written
// as <out_dir>/samples/<stage>_group<g>.tsv. Returns the file count.
size_t sample_for_eval(const PipelineConfig& cfg, const std::string& stage, uint64_t seed,
                       std::ostream& log);

}  // namespace fos
