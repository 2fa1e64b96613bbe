// fos: batch pipeline for concept discovery, concept-document tagging, and
// concept hierarchy construction.

#include <iostream>

#include <CLI11.hpp>

#include "fos/pipeline.hpp"
#include "fos/syngen.hpp"
#include "fos/util.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
};

fos::PipelineConfig load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) throw std::runtime_error("--config is required");
    fos::PipelineConfig cfg = fos::PipelineConfig::load(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed_set) cfg.rng_seed = opts.seed;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config file");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides paths.out)");
    cmd->add_option("--seed", opts.seed, "rng seed (overrides rng_seed)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"concept pipeline: discovery, tagging, hierarchy"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string stage = "hierarchy";
    size_t dump_neighbors = 0;

    CLI::App* run = app.add_subcommand("run", "run all stages with resume");
    add_common(run, opts);

    CLI::App* discover = app.add_subcommand("discover", "concept discovery stage only");
    add_common(discover, opts);
    discover->add_option("--dump-neighbors", dump_neighbors,
                         "also write neighbors.tsv with per-entity top-N lists");

    CLI::App* tag = app.add_subcommand("tag", "tagging stage only (needs fos_registry.jsonl)");
    add_common(tag, opts);

    CLI::App* hierarchy =
        app.add_subcommand("hierarchy", "hierarchy stage only (needs tags.tsv)");
    add_common(hierarchy, opts);

    CLI::App* stats = app.add_subcommand("stats", "report over existing artifacts");
    add_common(stats, opts);

    CLI::App* sample = app.add_subcommand("sample", "export evaluation samples for human judging");
    add_common(sample, opts);
    sample->add_option("--stage", stage, "discovery | tagging | hierarchy")->required();

    fos::PlantedSpec spec;
    std::string syn_out;
    CLI::App* syngen = app.add_subcommand("syngen", "generate a synthetic planted corpus");
    syngen->add_option("--out", syn_out, "output directory")->required();
    syngen->add_option("--l0", spec.n_l0, "number of root topics");
    syngen->add_option("--l1-per-l0", spec.n_l1_per_l0, "branches per root");
    syngen->add_option("--leaves-per-l1", spec.n_leaf_per_l1, "leaves per branch");
    syngen->add_option("--docs-per-leaf", spec.docs_per_leaf, "documents per leaf");
    syngen->add_option("--vocab-per-topic", spec.vocab_per_topic, "tokens per topic vocabulary");
    syngen->add_option("--noise", spec.noise_rate, "background token fraction [0,1)");
    syngen->add_option("--seed", spec.rng_seed, "generator seed");
    syngen->add_option("--background", spec.n_background_entities, "non-topic entities");
    syngen->add_option("--seed-leaves", spec.n_seed_leaves,
                       "leaf topics included as seeds (-1 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return fos::run_pipeline(load_config(opts), std::cerr);
        }
        if (discover->parsed()) {
            fos::PipelineConfig cfg = load_config(opts);
            cfg.validate();
            fos::run_discover_stage(cfg, std::cerr);
            if (dump_neighbors > 0) {
                auto snap = fos::load_corpus(cfg.entities_path, cfg.documents_path,
                                             cfg.venues_path, cfg.seeds_path);
                auto index = fos::build_link_index(snap);
                std::ofstream out(cfg.out_dir / "neighbors.tsv");
                fos::dump_top_n_tsv(index, dump_neighbors, out);
            }
            return 0;
        }
        if (tag->parsed()) {
            fos::PipelineConfig cfg = load_config(opts);
            cfg.validate();
            fos::run_tag_stage(cfg, std::cerr);
            return 0;
        }
        if (hierarchy->parsed()) {
            fos::PipelineConfig cfg = load_config(opts);
            cfg.validate();
            fos::run_hierarchy_stage(cfg, std::cerr);
            return 0;
        }
        if (stats->parsed()) {
            fos::PipelineConfig cfg = load_config(opts);
            std::cout << fos::stats_report(cfg);
            return 0;
        }
        if (sample->parsed()) {
            fos::PipelineConfig cfg = load_config(opts);
            uint64_t seed = opts.seed_set ? opts.seed : cfg.stage_seed("eval-sample");
            fos::sample_for_eval(cfg, stage, seed, std::cerr);
            return 0;
        }
        if (syngen->parsed()) {
            fos::write_corpus(fos::generate_corpus(spec), syn_out);
            std::cerr << "wrote synthetic corpus to " << syn_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
