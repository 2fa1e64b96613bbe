#include <doctest.h>

#include "fos/discovery.hpp"
#include "helpers.hpp"

using namespace fos;
using namespace testutil;

namespace {

// Complete directed cluster: every member links to every other member, so
// pairwise closeness is high and uniform.
void add_cluster(std::vector<Entity>& ents, const std::vector<std::string>& ids,
                 const std::string& paragraph = "def",
                 const std::vector<std::string>& types = {}) {
    for (const auto& id : ids) {
        std::vector<std::string> links;
        for (const auto& other : ids)
            if (other != id) links.push_back(other);
        ents.push_back(entity(id, id, paragraph, types, links));
    }
}

std::string padded(const std::string& prefix, int i) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%03d", i);
    return prefix + buf;
}

}  // namespace

TEST_CASE("knn_vote is strict: exactly K members rejects, K+1 accepts") {
    // e and t000..t099 share one pool of in-linkers, so all pairwise scores
    // are exactly 1 and e's top-100 is exactly the hundred t's.
    std::vector<Entity> ents;
    std::vector<std::string> targets = {"e"};
    for (int i = 0; i < 100; ++i) targets.push_back(padded("t", i));
    for (auto& id : targets) ents.push_back(entity(id, id, "def"));
    for (int i = 0; i < 30; ++i) ents.push_back(entity(padded("lnk", i), "", "def", {}, targets));
    CorpusSnapshot snap = snapshot(ents);
    LinkIndex index = build_link_index(snap);

    DiscoveryParams params;
    params.n_neighbors = 100;
    params.vote_threshold = 40;

    std::set<std::string> fos;
    for (int i = 0; i < 40; ++i) fos.insert(padded("t", i));
    CHECK_FALSE(knn_vote(index, "e", fos, params));  // count == K

    fos.insert(padded("t", 40));
    CHECK(knn_vote(index, "e", fos, params));  // count == K + 1

    CHECK_FALSE(knn_vote(index, "e", {}, params));  // empty membership never votes
}

TEST_CASE("type_filter") {
    std::vector<Entity> ents = {entity("p1", "", "def", {"person"}),
                                entity("g1", "", "def", {"protein"}),
                                entity("n1", "", "def", {}),
                                entity("both", "", "def", {"person", "protein"})};
    EntityStore store = build_entity_store(ents);

    SUBCASE("blocklisted candidate is rejected") {
        auto res = type_filter(store, {"p1"}, {}, {"person"});
        CHECK(res.rejected == std::set<std::string>{"p1"});
        CHECK(res.accepted.empty());
    }
    SUBCASE("allowlisted store entity is enriched even when never a candidate") {
        auto res = type_filter(store, {}, {"protein"}, {"person"});
        CHECK(res.enriched == std::set<std::string>{"g1"});  // blocklist wins for 'both'
    }
    SUBCASE("candidate with no types is accepted") {
        auto res = type_filter(store, {"n1"}, {"protein"}, {"person"});
        CHECK(res.accepted == std::set<std::string>{"n1"});
    }
    SUBCASE("overlapping allow and block lists are a configuration error") {
        CHECK_THROWS_AS(type_filter(store, {}, {"person"}, {"person"}), std::runtime_error);
    }
}

TEST_CASE("discover reaches a fixpoint") {
    DiscoveryParams params;
    params.n_neighbors = 30;
    params.vote_threshold = 10;

    SUBCASE("seeds only, nothing clears the vote") {
        std::vector<Entity> ents;
        add_cluster(ents, {"s1", "s2"});
        for (int i = 0; i < 5; ++i) ents.push_back(entity(padded("iso", i), "", "def"));
        SeedTaxonomy seeds;
        seeds.seed_fos = {"s1", "s2"};
        CorpusSnapshot snap = snapshot(ents, {}, {}, seeds);
        FosRegistry reg = discover(snap, build_link_index(snap), params);
        CHECK(reg.size() == 2);
        for (const auto& r : reg.records) CHECK(r.provenance == Provenance::seed);
    }

    SUBCASE("planted cluster: candidates whose top-N holds >K seeds join in one pass") {
        std::vector<Entity> ents;
        std::vector<std::string> cluster;
        for (int i = 0; i < 20; ++i) cluster.push_back(padded("seed", i));
        for (int i = 0; i < 5; ++i) cluster.push_back(padded("cand", i));
        add_cluster(ents, cluster);
        std::vector<std::string> bg;
        for (int i = 0; i < 40; ++i) bg.push_back(padded("bg", i));
        add_cluster(ents, bg);

        SeedTaxonomy seeds;
        for (int i = 0; i < 20; ++i) seeds.seed_fos.push_back(padded("seed", i));
        CorpusSnapshot snap = snapshot(ents, {}, {}, seeds);
        LinkIndex index = build_link_index(snap);

        // Brute-force the first vote pass with the public primitives.
        std::set<std::string> fos(seeds.seed_fos.begin(), seeds.seed_fos.end());
        for (int i = 0; i < 5; ++i) CHECK(knn_vote(index, padded("cand", i), fos, params));
        for (int i = 0; i < 40; ++i) CHECK_FALSE(knn_vote(index, padded("bg", i), fos, params));

        FosRegistry reg = discover(snap, index, params);
        CHECK(reg.size() == 25);
        for (int i = 0; i < 5; ++i) {
            REQUIRE(reg.contains(padded("cand", i)));
            const auto& rec = *std::find_if(reg.records.begin(), reg.records.end(),
                                            [&](const auto& r) { return r.id == padded("cand", i); });
            CHECK(rec.provenance == Provenance::vote);
            CHECK(rec.iteration == 1);
        }
    }

    SUBCASE("blocklisted entity never joins even when it clears the vote") {
        std::vector<Entity> ents;
        std::vector<std::string> cluster;
        for (int i = 0; i < 20; ++i) cluster.push_back(padded("seed", i));
        cluster.push_back("evt");
        add_cluster(ents, cluster, "def", {});
        std::vector<std::string> bg;
        for (int i = 0; i < 40; ++i) bg.push_back(padded("bg", i));
        add_cluster(ents, bg);
        for (auto& e : ents)
            if (e.id == "evt") e.kb_types = {"event"};
        SeedTaxonomy seeds;
        for (int i = 0; i < 20; ++i) seeds.seed_fos.push_back(padded("seed", i));
        seeds.type_blocklist = {"event"};
        CorpusSnapshot snap = snapshot(ents, {}, {}, seeds);
        LinkIndex index = build_link_index(snap);
        CHECK(knn_vote(index, "evt", std::set<std::string>(seeds.seed_fos.begin(),
                                                           seeds.seed_fos.end()), params));
        FosRegistry reg = discover(snap, index, params);
        CHECK_FALSE(reg.contains("evt"));
    }

    SUBCASE("enrichment pulls in allowlisted entities; empty paragraphs never join") {
        std::vector<Entity> ents;
        add_cluster(ents, {"s1", "s2"});
        ents.push_back(entity("prot1", "", "def", {"protein"}));
        ents.push_back(entity("prot2", "", "", {"protein"}));  // empty paragraph
        SeedTaxonomy seeds;
        seeds.seed_fos = {"s1", "s2"};
        seeds.type_allowlist = {"protein"};
        CorpusSnapshot snap = snapshot(ents, {}, {}, seeds);
        FosRegistry reg = discover(snap, build_link_index(snap), params);
        REQUIRE(reg.contains("prot1"));
        CHECK_FALSE(reg.contains("prot2"));
        const auto& rec = *std::find_if(reg.records.begin(), reg.records.end(),
                                        [](const auto& r) { return r.id == "prot1"; });
        CHECK(rec.provenance == Provenance::type_enrichment);
    }
}

TEST_CASE("discovery invariants: monotone growth, seed preservation, determinism, soundness") {
    std::vector<Entity> ents;
    std::vector<std::string> cluster;
    for (int i = 0; i < 12; ++i) cluster.push_back(padded("c", i));
    add_cluster(ents, cluster);
    std::vector<std::string> chain;
    for (int i = 0; i < 30; ++i) chain.push_back(padded("x", i));
    add_cluster(ents, chain);

    SeedTaxonomy seeds;
    for (int i = 0; i < 8; ++i) seeds.seed_fos.push_back(padded("c", i));
    // seeds are exempt from the blocklist
    seeds.type_blocklist = {"research_topic"};
    for (auto& e : ents)
        if (e.id == padded("c", 0)) e.kb_types = {"research_topic"};
    CorpusSnapshot snap = snapshot(ents, {}, {}, seeds);
    LinkIndex index = build_link_index(snap);

    DiscoveryParams params;
    params.n_neighbors = 15;
    params.vote_threshold = 5;

    FosRegistry a = discover(snap, index, params);
    FosRegistry b = discover(snap, index, params);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].id == b.records[i].id);
        CHECK(a.records[i].provenance == b.records[i].provenance);
        CHECK(a.records[i].iteration == b.records[i].iteration);
    }

    for (const auto& id : seeds.seed_fos) CHECK(a.contains(id));  // seed preservation

    // Monotone growth: iteration stamps partition the additions.
    for (const auto& r : a.records)
        if (r.provenance == Provenance::seed) CHECK(r.iteration == 0);

    // Fixpoint soundness: no remaining entity passes vote+filter.
    std::vector<std::string> member_ids = a.concept_ids();
    std::set<std::string> members(member_ids.begin(), member_ids.end());
    for (size_t i = 0; i < index.entity_count(); ++i) {
        const std::string& id = index.id_of(i);
        if (members.count(id)) continue;
        if (snap.entities.find(id)->first_paragraph.empty()) continue;
        bool votes = knn_vote(index, id, members, params);
        auto filtered = type_filter(snap.entities, votes ? std::set<std::string>{id}
                                                         : std::set<std::string>{},
                                    seeds.type_allowlist, seeds.type_blocklist);
        CHECK(filtered.accepted.empty());
        CHECK(filtered.enriched.count(id) == 0);
    }
}

TEST_CASE("registry round-trips through jsonl") {
    TempDir dir("registry");
    FosRegistry reg;
    reg.records = {{"a", Provenance::seed, 0},
                   {"b", Provenance::vote, 2},
                   {"c", Provenance::type_enrichment, 1}};
    write_registry_jsonl(reg, dir.path / "r.jsonl");
    FosRegistry back = read_registry_jsonl(dir.path / "r.jsonl");
    REQUIRE(back.size() == 3);
    CHECK(back.records[1].id == "b");
    CHECK(back.records[1].provenance == Provenance::vote);
    CHECK(back.records[1].iteration == 2);
}
