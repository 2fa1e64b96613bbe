#include <doctest.h>

#include <map>
#include <set>

#include "fos/hierarchy.hpp"
#include "fos/syngen.hpp"
#include "fos/util.hpp"
#include "helpers.hpp"

using namespace fos;
using namespace testutil;

namespace {

// Doc sets per topic from the planted tags.
std::map<std::string, std::set<std::string>> topic_docs(const SynCorpus& syn) {
    std::map<std::string, std::set<std::string>> docs;
    for (const auto& id : syn.truth.fos_ids) docs[id];
    for (const auto& [d, c] : syn.truth.tags) docs[c].insert(d);
    return docs;
}

bool proper_subset(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.size() >= b.size()) return false;
    for (const auto& x : a)
        if (!b.count(x)) return false;
    return true;
}

}  // namespace

TEST_CASE("generation counts for the 1-2-2 spec") {
    PlantedSpec spec;  // defaults: 1 root, 2 branches, 2 leaves each, 10 docs per leaf
    SynCorpus syn = generate_corpus(spec);
    CHECK(syn.documents.size() == 40);
    CHECK(syn.truth.fos_ids.size() == 7);    // 1 + 2 + 4 topics
    CHECK(syn.truth.tree_edges.size() == 6); // a 7-node tree has 6 edges
    CHECK(syn.venues.size() == 2);
    CHECK(snapshot_from(syn).entities.size() == 7);
}

TEST_CASE("same seed generates byte-identical corpora") {
    TempDir dir("syn_det");
    PlantedSpec spec;
    spec.rng_seed = 123;
    spec.noise_rate = 0.2;
    write_corpus(generate_corpus(spec), dir.path / "a");
    write_corpus(generate_corpus(spec), dir.path / "b");
    for (const char* name : {"entities.jsonl", "documents.jsonl", "venues.jsonl", "seeds.json"})
        CHECK(read_file(dir.path / "a" / name) == read_file(dir.path / "b" / name));
    CHECK(read_file(dir.path / "a" / "ground_truth" / "tags.tsv") ==
          read_file(dir.path / "b" / "ground_truth" / "tags.tsv"));
}

TEST_CASE("planted tree edges are exactly the cover pairs of the subset order") {
    PlantedSpec spec;
    spec.n_l0 = 2;
    spec.n_l1_per_l0 = 2;
    spec.n_leaf_per_l1 = 3;
    SynCorpus syn = generate_corpus(spec);
    auto docs = topic_docs(syn);

    std::set<std::pair<std::string, std::string>> covers;
    for (const auto& [child, cdocs] : docs)
        for (const auto& [parent, pdocs] : docs) {
            if (child == parent || !proper_subset(cdocs, pdocs)) continue;
            bool intermediate = false;
            for (const auto& [mid, mdocs] : docs)
                if (mid != child && mid != parent && proper_subset(cdocs, mdocs) &&
                    proper_subset(mdocs, pdocs))
                    intermediate = true;
            if (!intermediate) covers.insert({child, parent});
        }
    std::set<std::pair<std::string, std::string>> planted(syn.truth.tree_edges.begin(),
                                                          syn.truth.tree_edges.end());
    CHECK(covers == planted);
}

TEST_CASE("noise-0 ground truth satisfies classic subsumption at p = 0.8") {
    PlantedSpec spec;
    spec.n_l1_per_l0 = 2;
    spec.n_leaf_per_l1 = 3;
    SynCorpus syn = generate_corpus(spec);
    std::vector<TagPair> unit_tags;
    for (const auto& [d, c] : syn.truth.tags) unit_tags.push_back({d, c, 1.0});
    TagIndex index = build_tag_index(unit_tags);

    for (const auto& [child, parent] : syn.truth.tree_edges) {
        CHECK(classic_subsumption(index, child, parent, 0.8));
        CHECK(oracle_subsumption(unit_tags, child, parent, 0.8));
        CHECK_FALSE(classic_subsumption(index, parent, child, 0.8));
    }
}

TEST_CASE("abstracts honor the exact noise budget") {
    PlantedSpec spec;
    spec.noise_rate = 0.25;
    spec.abstract_tokens = 40;
    SynCorpus syn = generate_corpus(spec);
    for (const auto& d : syn.documents) {
        auto tokens = split_ws(d.abstract);
        CHECK(tokens.size() == 40);
        size_t noise = 0;
        for (const auto& t : tokens)
            if (t.rfind("bg", 0) == 0) ++noise;
        CHECK(noise == 10);  // floor(0.25 * 40); topical share >= 1 - noise_rate
    }
}

TEST_CASE("background entities form clusters disjoint from topics") {
    PlantedSpec spec;
    spec.n_background_entities = 120;
    SynCorpus syn = generate_corpus(spec);
    CorpusSnapshot snap = snapshot_from(syn);
    size_t bg = 0;
    for (const Entity& e : snap.entities) {
        if (e.id.rfind("bg_", 0) != 0) continue;
        ++bg;
        for (const auto& t : e.out_links) CHECK(t.rfind("bg_", 0) == 0);
        CHECK_FALSE(e.in_links.empty());
    }
    CHECK(bg == 120);
}

TEST_CASE("edge recovery degrades monotonically with noise") {
    auto recovery_rate = [](double noise, uint64_t seed) {
        PlantedSpec spec;
        spec.n_l1_per_l0 = 2;
        spec.n_leaf_per_l1 = 3;
        spec.docs_per_leaf = 15;
        spec.noise_rate = noise;
        spec.rng_seed = seed;
        SynCorpus syn = generate_corpus(spec);
        CorpusSnapshot snap = snapshot_from(syn);
        FosRegistry reg;
        for (const auto& id : syn.truth.fos_ids) reg.records.push_back({id, Provenance::seed, 0});
        FeatureContext ctx = build_feature_context(snap, reg.concept_ids(),
                                                   EmbeddingTable::hash_fallback(16, 8), {}, 1);
        ErtWeights w;
        w.venue = 0.05;
        w.venue_sample = 10;
        TaggingEngine eng(snap, ctx, reg, w, 3);
        TaggingParams params;
        params.theta = 0.4;
        LeveledDag dag = build_hierarchy(build_tag_index(eng.tag_corpus(params)), 0.3, snap.seeds);
        std::set<std::pair<std::string, std::string>> got;
        for (const auto& e : dag.edges) got.insert({e.child, e.parent});
        size_t hit = 0;
        for (const auto& [c, p] : syn.truth.tree_edges)
            if (got.count({c, p})) ++hit;
        return static_cast<double>(hit) / static_cast<double>(syn.truth.tree_edges.size());
    };

    double mean[3] = {0.0, 0.0, 0.0};
    const double noise[3] = {0.0, 0.1, 0.3};
    for (uint64_t seed = 1; seed <= 5; ++seed)
        for (int k = 0; k < 3; ++k) mean[k] += recovery_rate(noise[k], seed) / 5.0;
    CHECK(mean[0] == 1.0);
    CHECK(mean[0] >= mean[1]);
    CHECK(mean[1] >= mean[2]);
}

TEST_CASE("reduced seed leaves stay within the leaf set") {
    PlantedSpec spec;
    spec.n_l1_per_l0 = 2;
    spec.n_leaf_per_l1 = 3;
    spec.n_seed_leaves = 2;
    SynCorpus syn = generate_corpus(spec);
    CHECK(syn.seeds.seed_fos.size() == 1 + 2 + 2);  // l0 + l1 + 2 leaves
    size_t leaf_seeds = 0;
    for (const auto& id : syn.seeds.seed_fos)
        if (id.rfind("leaf_", 0) == 0) ++leaf_seeds;
    CHECK(leaf_seeds == 2);
}
