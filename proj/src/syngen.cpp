#include "fos/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "fos/util.hpp"

namespace fos {

namespace {

std::string num(uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03u", v);
    return buf;
}

struct Topic {
    std::string id;
    std::string title;
    int level;                       // 0, 1, 2 (leaf)
    uint32_t index;                  // position in the topic vector; vocab block
    std::vector<uint32_t> ancestors; // topic indexes up the tree
};

std::string vocab_token(uint32_t topic_index, uint64_t k) {
    return "w" + num(topic_index) + "x" + num(static_cast<uint32_t>(k));
}

}  // namespace

void PlantedSpec::validate() const {
    if (n_l0 < 1 || n_l1_per_l0 < 1 || n_leaf_per_l1 < 1 || docs_per_leaf < 1 ||
        vocab_per_topic < 1)
        throw std::runtime_error("planted spec: all counts must be >= 1");
    if (!(noise_rate >= 0.0 && noise_rate < 1.0))
        throw std::runtime_error("planted spec: noise_rate must be in [0,1)");
    if (abstract_tokens < 1) throw std::runtime_error("planted spec: abstract_tokens must be >= 1");
}

SynCorpus generate_corpus(const PlantedSpec& spec) {
    spec.validate();
    SynCorpus syn;

    // Topic tree.
    std::vector<Topic> topics;
    for (uint32_t a = 0; a < spec.n_l0; ++a) {
        uint32_t l0_idx = static_cast<uint32_t>(topics.size());
        topics.push_back({"l0_" + num(a), "domain" + num(a), 0, l0_idx, {}});
        for (uint32_t b = 0; b < spec.n_l1_per_l0; ++b) {
            uint32_t l1_idx = static_cast<uint32_t>(topics.size());
            topics.push_back({"l1_" + num(a) + "_" + num(b),
                              "domain" + num(a) + " branch" + num(b), 1, l1_idx, {l0_idx}});
            syn.truth.tree_edges.push_back({topics[l1_idx].id, topics[l0_idx].id});
            for (uint32_t c = 0; c < spec.n_leaf_per_l1; ++c) {
                uint32_t leaf_idx = static_cast<uint32_t>(topics.size());
                topics.push_back({"leaf_" + num(a) + "_" + num(b) + "_" + num(c),
                                  "domain" + num(a) + " branch" + num(b) + " leaf" + num(c), 2,
                                  leaf_idx,
                                  {l1_idx, l0_idx}});
                syn.truth.tree_edges.push_back({topics[leaf_idx].id, topics[l1_idx].id});
            }
        }
    }
    for (const auto& t : topics) {
        syn.truth.fos_ids.push_back(t.id);
        syn.truth.topic_level[t.id] = t.level;
    }

    // One entity per topic. The paragraph names the topic and spells out its
    // whole vocabulary so concept text overlaps its documents' text.
    for (const auto& t : topics) {
        Entity e;
        e.id = t.id;
        e.title = t.title;
        e.first_paragraph = t.title;
        for (uint32_t k = 0; k < spec.vocab_per_topic; ++k) {
            e.first_paragraph.push_back(' ');
            e.first_paragraph += vocab_token(t.index, k);
        }
        e.kb_types = {"research_topic"};
        for (const auto& o : topics)
            if (o.id != t.id) e.out_links.push_back(o.id);
        syn.entities.push_back(std::move(e));
    }

    // Background entities in complete clusters larger than the top-N window,
    // so their neighbor lists never reach into the topic cluster.
    if (spec.n_background_entities > 0) {
        const uint32_t cluster_size = 150;
        uint32_t n_clusters = (spec.n_background_entities + cluster_size - 1) / cluster_size;
        std::vector<std::vector<std::string>> clusters(n_clusters);
        for (uint32_t i = 0; i < spec.n_background_entities; ++i)
            clusters[i % n_clusters].push_back("bg_" + num(i));
        for (uint32_t ci = 0; ci < n_clusters; ++ci) {
            for (const auto& id : clusters[ci]) {
                Entity e;
                e.id = id;
                e.title = "bgent " + id;
                e.first_paragraph = "background entity " + id;
                e.kb_types = {"miscellaneous"};
                for (const auto& other : clusters[ci])
                    if (other != id) e.out_links.push_back(other);
                syn.entities.push_back(std::move(e));
            }
        }
    }

    // One venue per branch topic.
    std::map<std::string, std::string> branch_venue;  // l1 id -> venue id
    for (const auto& t : topics) {
        if (t.level != 1) continue;
        Venue v;
        v.id = "v_" + t.id;
        v.full_name = t.title + " journal";
        branch_venue[t.id] = v.id;
        syn.venues.push_back(std::move(v));
    }

    // Documents.
    uint32_t doc_counter = 0;
    for (uint32_t ti = 0; ti < topics.size(); ++ti) {
        const Topic& leaf = topics[ti];
        if (leaf.level != 2) continue;
        const Topic& branch = topics[leaf.ancestors[0]];
        const Topic& root = topics[leaf.ancestors[1]];

        std::vector<std::string> leaf_doc_ids;
        for (uint32_t d = 0; d < spec.docs_per_leaf; ++d) {
            Document doc;
            doc.id = "d" + num(doc_counter / 1000) + num(doc_counter % 1000);
            ++doc_counter;
            Rng rng(combine_seed(spec.rng_seed, doc.id));

            doc.title = "a study of " + vocab_token(leaf.index, rng.below(spec.vocab_per_topic)) +
                        " and " + vocab_token(leaf.index, rng.below(spec.vocab_per_topic));
            doc.keywords = {leaf.title, branch.title, root.title};

            // Exact token budget: floor(noise * T) background tokens, the
            // rest split across leaf/branch/root vocabulary.
            uint32_t total = spec.abstract_tokens;
            uint32_t n_noise = static_cast<uint32_t>(std::floor(spec.noise_rate * total));
            uint32_t topical = total - n_noise;
            uint32_t n_branch = topical / 4;
            uint32_t n_root = topical / 8;
            uint32_t n_leaf = topical - n_branch - n_root;
            std::vector<std::string> tokens;
            tokens.reserve(total);
            for (uint32_t k = 0; k < n_leaf; ++k)
                tokens.push_back(vocab_token(leaf.index, rng.below(spec.vocab_per_topic)));
            for (uint32_t k = 0; k < n_branch; ++k)
                tokens.push_back(vocab_token(branch.index, rng.below(spec.vocab_per_topic)));
            for (uint32_t k = 0; k < n_root; ++k)
                tokens.push_back(vocab_token(root.index, rng.below(spec.vocab_per_topic)));
            for (uint32_t k = 0; k < n_noise; ++k)
                tokens.push_back("bg" + num(static_cast<uint32_t>(rng.below(spec.background_vocab))));
            rng.shuffle(tokens);
            std::string abstract;
            for (size_t k = 0; k < tokens.size(); ++k) {
                if (k) abstract.push_back(' ');
                abstract += tokens[k];
            }
            doc.abstract = std::move(abstract);
            doc.venue_id = branch_venue.at(branch.id);

            for (uint32_t r = 1; r <= spec.refs_per_doc && r <= leaf_doc_ids.size(); ++r)
                doc.references.push_back(leaf_doc_ids[leaf_doc_ids.size() - r]);

            leaf_doc_ids.push_back(doc.id);
            syn.truth.tags.push_back({doc.id, leaf.id});
            syn.truth.tags.push_back({doc.id, branch.id});
            syn.truth.tags.push_back({doc.id, root.id});
            syn.documents.push_back(std::move(doc));
        }
    }

    // Seed taxonomy: all roots and branches, plus the first n_seed_leaves
    // leaves (all of them by default).
    SeedTaxonomy seeds;
    const bool all_leaves = spec.n_seed_leaves < 0;
    int64_t leaf_budget = spec.n_seed_leaves;
    for (const auto& t : topics) {
        if (t.level == 0) {
            seeds.l0.push_back(t.id);
            seeds.seed_fos.push_back(t.id);
        } else if (t.level == 1) {
            seeds.l1.push_back(t.id);
            seeds.seed_fos.push_back(t.id);
        } else if (all_leaves || leaf_budget > 0) {
            if (!all_leaves) --leaf_budget;
            seeds.seed_fos.push_back(t.id);
        }
    }
    for (const auto& t : topics)
        if (t.level == 1) seeds.l0_l1_edges.push_back({t.id, topics[t.ancestors[0]].id});
    for (const auto& t : topics) {
        if (t.level == 1) {
            seeds.concept_venue_map[t.id] = {branch_venue.at(t.id)};
        } else if (t.level == 0) {
            std::vector<std::string> vs;
            for (const auto& o : topics)
                if (o.level == 1 && o.ancestors[0] == t.index) vs.push_back(branch_venue.at(o.id));
            seeds.concept_venue_map[t.id] = vs;
        }
    }
    syn.seeds = build_seed_taxonomy(std::move(seeds));

    return syn;
}

CorpusSnapshot snapshot_from(const SynCorpus& syn) {
    CorpusSnapshot snap =
        make_snapshot(build_entity_store(syn.entities), build_document_store(syn.documents),
                      build_venue_store(syn.venues), syn.seeds);
    ValidationReport rep = validate_corpus(snap);
    if (!rep.ok()) throw std::runtime_error("generated corpus failed validation:\n" + rep.to_string());
    return snap;
}

void write_corpus(const SynCorpus& syn, const std::filesystem::path& out_dir) {
    using nlohmann::ordered_json;
    std::filesystem::create_directories(out_dir);

    std::string ents;
    for (const auto& e : syn.entities) {
        ordered_json j{{"id", e.id},
                       {"title", e.title},
                       {"first_paragraph", e.first_paragraph},
                       {"kb_types", e.kb_types},
                       {"out_links", e.out_links}};
        ents += j.dump();
        ents.push_back('\n');
    }
    write_file(out_dir / "entities.jsonl", ents);

    std::string docs;
    for (const auto& d : syn.documents) {
        ordered_json j{{"id", d.id},
                       {"title", d.title},
                       {"keywords", d.keywords},
                       {"abstract", d.abstract},
                       {"references", d.references}};
        if (d.venue_id) j["venue_id"] = *d.venue_id;
        docs += j.dump();
        docs.push_back('\n');
    }
    write_file(out_dir / "documents.jsonl", docs);

    std::string vens;
    for (const auto& v : syn.venues) {
        ordered_json j{{"id", v.id}, {"full_name", v.full_name}};
        vens += j.dump();
        vens.push_back('\n');
    }
    write_file(out_dir / "venues.jsonl", vens);

    ordered_json seeds;
    seeds["l0"] = syn.seeds.l0;
    seeds["l1"] = syn.seeds.l1;
    seeds["seed_fos"] = syn.seeds.seed_fos;
    ordered_json edges = ordered_json::array();
    for (const auto& [c, p] : syn.seeds.l0_l1_edges) edges.push_back({c, p});
    seeds["l0_l1_edges"] = std::move(edges);
    ordered_json cvm;
    for (const auto& [c, vs] : syn.seeds.concept_venue_map) cvm[c] = vs;
    seeds["concept_venue_map"] = std::move(cvm);
    seeds["type_allowlist"] = syn.seeds.type_allowlist;
    seeds["type_blocklist"] = syn.seeds.type_blocklist;
    write_file(out_dir / "seeds.json", seeds.dump(1) + "\n");

    std::string fos;
    for (const auto& id : syn.truth.fos_ids)
        fos += id + "\t" + std::to_string(syn.truth.topic_level.at(id)) + "\n";
    write_file(out_dir / "ground_truth" / "fos.tsv", fos);

    std::string tree;
    for (const auto& [c, p] : syn.truth.tree_edges) tree += c + "\t" + p + "\n";
    write_file(out_dir / "ground_truth" / "tree_edges.tsv", tree);

    std::string tags;
    for (const auto& [d, c] : syn.truth.tags) tags += d + "\t" + c + "\n";
    write_file(out_dir / "ground_truth" / "tags.tsv", tags);
}

}  // namespace fos
