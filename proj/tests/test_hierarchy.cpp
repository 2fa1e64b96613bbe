#include <doctest.h>

#include "fos/hierarchy.hpp"
#include "helpers.hpp"

using namespace fos;
using namespace testutil;

namespace {

// The worked fixture: I = {(d1,.9),(d2,.8)}, J = {(d1,.5),(d2,.5),(d3,1.0)}.
std::vector<TagPair> worked_example() {
    return {{"d1", "i", 0.9}, {"d2", "i", 0.8},
            {"d1", "j", 0.5}, {"d2", "j", 0.5}, {"d3", "j", 1.0}};
}

}  // namespace

TEST_CASE("tag index construction") {
    SUBCASE("posting lists and masses") {
        TagIndex index = build_tag_index(worked_example());
        REQUIRE(index.concept_count() == 2);
        auto i = index.index_of("i");
        auto j = index.index_of("j");
        REQUIRE(i);
        REQUIRE(j);
        CHECK(index.postings(*i).size() == 2);
        CHECK(index.mass(*i) == doctest::Approx(1.7).epsilon(1e-12));
        CHECK(index.mass(*j) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("empty stream gives an empty index") {
        TagIndex index = build_tag_index({});
        CHECK(index.concept_count() == 0);
    }
    SUBCASE("duplicate pair is rejected") {
        CHECK_THROWS_WITH_AS(build_tag_index({{"d1", "c", 0.5}, {"d1", "c", 0.6}}),
                             doctest::Contains("duplicate pair"), std::runtime_error);
    }
    SUBCASE("out-of-range weight is rejected") {
        CHECK_THROWS_AS(build_tag_index({{"d1", "c", 0.0}}), std::runtime_error);
        CHECK_THROWS_AS(build_tag_index({{"d1", "c", 1.5}}), std::runtime_error);
    }
    SUBCASE("mass matches an independent re-scan of the raw pairs") {
        auto tags = random_tags(99, 10, 40);
        TagIndex index = build_tag_index(tags);
        for (uint32_t c = 0; c < index.concept_count(); ++c) {
            double expect = 0.0;
            for (const auto& t : tags)
                if (t.concept_id == index.concept_id(c)) expect += t.confidence;
            CHECK(index.mass(c) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("relative coverage") {
    TagIndex index = build_tag_index(worked_example());

    SUBCASE("worked example: 1.7/1.7 - 1.0/2.0 = 0.5") {
        CHECK(relative_coverage(index, "i", "j") == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("identical posting lists cancel to zero") {
        TagIndex same = build_tag_index({{"d1", "a", 0.4}, {"d1", "b", 0.4},
                                         {"d2", "a", 0.7}, {"d2", "b", 0.7}});
        CHECK(relative_coverage(same, "a", "b") == 0.0);
    }
    SUBCASE("antisymmetry on the worked example") {
        CHECK(relative_coverage(index, "j", "i") == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(relative_coverage(index, "i", "j") == -relative_coverage(index, "j", "i"));
    }
    SUBCASE("unknown concept throws") {
        CHECK_THROWS_AS(relative_coverage(index, "i", "nope"), std::runtime_error);
    }
    SUBCASE("disjoint lists give exactly zero") {
        TagIndex disjoint = build_tag_index({{"d1", "a", 0.9}, {"d2", "b", 0.9}});
        CHECK(relative_coverage(disjoint, "a", "b") == 0.0);
    }
}

TEST_CASE("classic subsumption") {
    // J covers docs 1..10, I covers docs 1..8.
    std::vector<TagPair> tags;
    for (int d = 1; d <= 10; ++d) tags.push_back({"d" + std::to_string(d), "j", 1.0});
    for (int d = 1; d <= 8; ++d) tags.push_back({"d" + std::to_string(d), "i", 1.0});
    TagIndex index = build_tag_index(tags);

    CHECK(classic_subsumption(index, "i", "j", 0.8));       // P(j|i)=1, P(i|j)=0.8 < 1
    CHECK_FALSE(classic_subsumption(index, "j", "i", 0.8)); // P(i|j)=0.8 = p but P(j|i)=1 fails <1
    CHECK(oracle_subsumption(tags, "i", "j", 0.8));

    SUBCASE("identical sets fail the strict second condition") {
        TagIndex same = build_tag_index({{"d1", "a", 1.0}, {"d1", "b", 1.0}});
        CHECK_FALSE(classic_subsumption(same, "a", "b", 0.8));
    }
    SUBCASE("disjoint sets fail") {
        TagIndex disjoint = build_tag_index({{"d1", "a", 1.0}, {"d2", "b", 1.0}});
        CHECK_FALSE(classic_subsumption(disjoint, "a", "b", 0.8));
    }
}

TEST_CASE("build_hierarchy") {
    SeedTaxonomy no_seeds;

    SUBCASE("worked example crosses threshold 0.3 with a single edge") {
        LeveledDag dag = build_hierarchy(build_tag_index(worked_example()), 0.3, no_seeds);
        REQUIRE(dag.edges.size() == 1);
        CHECK(dag.edges[0].child == "i");
        CHECK(dag.edges[0].parent == "j");
        CHECK(dag.edges[0].rc == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("threshold 0.6 blocks the same edge") {
        CHECK(build_hierarchy(build_tag_index(worked_example()), 0.6, no_seeds).edges.empty());
    }
    SUBCASE("identical posting lists produce no edge in either direction") {
        TagIndex same = build_tag_index({{"d1", "a", 0.4}, {"d1", "b", 0.4}});
        CHECK(build_hierarchy(same, 0.1, no_seeds).edges.empty());
    }
    SUBCASE("non-positive threshold is rejected") {
        CHECK_THROWS_AS(build_hierarchy(build_tag_index(worked_example()), 0.0, no_seeds),
                        std::runtime_error);
    }
    SUBCASE("curated edges replace computed ones for L0/L1 children") {
        SeedTaxonomy seeds;
        seeds.l0 = {"root"};
        seeds.l1 = {"mid"};
        seeds.seed_fos = {"mid", "root"};
        seeds.l0_l1_edges = {{"mid", "root"}};
        // make "mid" computationally a child of "other" too; that edge must go
        std::vector<TagPair> tags;
        for (int d = 0; d < 6; ++d) tags.push_back({"d" + std::to_string(d), "other", 0.9});
        for (int d = 0; d < 2; ++d) tags.push_back({"d" + std::to_string(d), "mid", 0.9});
        TagIndex index = build_tag_index(tags);
        REQUIRE(relative_coverage(index, "mid", "other") > 0.3);
        LeveledDag dag = build_hierarchy(index, 0.3, seeds);
        REQUIRE(dag.edges.size() == 1);
        CHECK(dag.edges[0].child == "mid");
        CHECK(dag.edges[0].parent == "root");
        CHECK(dag.level.at("root") == 0);
        CHECK(dag.level.at("mid") == 1);
        CHECK(dag.level.at("other") == 2);
    }
}

TEST_CASE("assign_levels") {
    SeedTaxonomy seeds;
    seeds.l0 = {"n0"};
    seeds.seed_fos = {"n0"};

    SUBCASE("chain caps at level 5") {
        std::vector<HierarchyEdge> edges;
        std::vector<std::string> nodes = {"n0", "n1", "n2", "n3", "n4", "n5", "n6"};
        for (int i = 1; i < 7; ++i)
            edges.push_back({"n" + std::to_string(i), "n" + std::to_string(i - 1), 0.5});
        auto level = assign_levels(edges, seeds, nodes);
        std::vector<int> got;
        for (const auto& n : nodes) got.push_back(level.at(n));
        CHECK(got == std::vector<int>{0, 1, 2, 3, 4, 5, 5});
    }
    SUBCASE("orphan concepts sit at level 2") {
        auto level = assign_levels({}, seeds, {"n0", "lonely"});
        CHECK(level.at("lonely") == 2);
        CHECK(level.at("n0") == 0);
    }
    SUBCASE("multi-parent node takes max parent level + 1") {
        SeedTaxonomy s2;
        s2.l0 = {"a"};
        s2.l1 = {"b"};
        s2.seed_fos = {"a", "b"};
        // c is parentless -> 2, d under c -> 3, e under b (1) and d (3) -> 4
        std::vector<HierarchyEdge> edges = {{"d", "c", 0.5}, {"e", "b", 0.5}, {"e", "d", 0.5}};
        auto level = assign_levels(edges, s2, {"a", "b", "c", "d", "e"});
        CHECK(level.at("e") == 4);
    }
    SUBCASE("cycle is a hard error") {
        std::vector<HierarchyEdge> edges = {{"a", "b", 0.5}, {"b", "a", 0.5}};
        CHECK_THROWS_WITH_AS(assign_levels(edges, {}, {"a", "b"}), doctest::Contains("cycle"),
                             std::runtime_error);
    }
}

TEST_CASE("check_dag") {
    SUBCASE("empty dag is trivially acyclic") {
        DagDiagnostics diag = check_dag({});
        CHECK(diag.acyclic);
        CHECK(diag.node_count == 0);
        CHECK(diag.max_depth == 0);
    }
    SUBCASE("three-cycle is reported with its nodes") {
        LeveledDag dag;
        dag.edges = {{"a", "b", 0.5}, {"b", "c", 0.5}, {"c", "a", 0.5}};
        DagDiagnostics diag = check_dag(dag);
        CHECK_FALSE(diag.acyclic);
        CHECK(diag.cycle.size() == 3);
        std::set<std::string> members(diag.cycle.begin(), diag.cycle.end());
        CHECK(members == std::set<std::string>{"a", "b", "c"});
    }
    SUBCASE("four-node specialization chain reports depth 4") {
        LeveledDag dag;
        dag.edges = {{"deep learning", "artificial neural network", 0.5},
                     {"artificial neural network", "machine learning", 0.5},
                     {"machine learning", "computer science", 0.5}};
        dag.level = {{"computer science", 0},
                     {"machine learning", 1},
                     {"artificial neural network", 2},
                     {"deep learning", 3}};
        DagDiagnostics diag = check_dag(dag);
        CHECK(diag.acyclic);
        CHECK(diag.max_depth == 4);
        CHECK(diag.orphan_count == 0);
        CHECK(diag.level_histogram[0] == 1);
        CHECK(diag.level_histogram[3] == 1);
    }
}

TEST_CASE("hierarchy properties on random indexes") {
    SUBCASE("antisymmetry holds exhaustively") {
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            auto tags = random_tags(seed, 12, 60);
            TagIndex index = build_tag_index(tags);
            for (uint32_t a = 0; a < index.concept_count(); ++a)
                for (uint32_t b = 0; b < index.concept_count(); ++b) {
                    double ab = relative_coverage(index, index.concept_id(a), index.concept_id(b));
                    double ba = relative_coverage(index, index.concept_id(b), index.concept_id(a));
                    CHECK(ab == -ba);
                    CHECK(ab == doctest::Approx(oracle_rc(tags, index.concept_id(a),
                                                          index.concept_id(b)))
                                    .epsilon(1e-12));
                }
        }
    }
    SUBCASE("unit weights reduce RC to the count formula, exactly") {
        for (uint64_t seed = 10; seed < 15; ++seed) {
            auto tags = random_tags(seed, 10, 50, true);
            TagIndex index = build_tag_index(tags);
            for (uint32_t a = 0; a < index.concept_count(); ++a)
                for (uint32_t b = 0; b < index.concept_count(); ++b) {
                    if (a == b) continue;
                    const auto& pa = index.postings(a);
                    const auto& pb = index.postings(b);
                    size_t inter = 0;
                    for (const auto& [doc, w] : pa)
                        for (const auto& [doc2, w2] : pb)
                            if (doc == doc2) ++inter;
                    double count_rc =
                        inter == 0 ? 0.0
                                   : static_cast<double>(inter) / static_cast<double>(pa.size()) -
                                         static_cast<double>(inter) / static_cast<double>(pb.size());
                    CHECK(relative_coverage(index, index.concept_id(a), index.concept_id(b)) ==
                          count_rc);
                }
        }
    }
    SUBCASE("built hierarchies agree edge-for-edge with brute force and stay acyclic") {
        for (uint64_t seed = 20; seed < 26; ++seed) {
            auto tags = random_tags(seed, 20, 80);
            TagIndex index = build_tag_index(tags);
            double threshold = 0.2 + 0.05 * static_cast<double>(seed % 7);
            LeveledDag dag = build_hierarchy(index, threshold, {});

            DagDiagnostics diag = check_dag(dag);
            CHECK(diag.acyclic);
            for (const auto& [n, l] : dag.level) {
                CHECK(l >= 0);
                CHECK(l <= 5);
            }

            // brute force: all ordered pairs, same guard
            std::set<std::pair<std::string, std::string>> expect;
            for (uint32_t a = 0; a < index.concept_count(); ++a)
                for (uint32_t b = 0; b < index.concept_count(); ++b) {
                    if (a == b) continue;
                    std::string ca = index.concept_id(a), cb = index.concept_id(b);
                    double rc = oracle_rc(tags, ca, cb);
                    bool outranks = index.mass(b) > index.mass(a) ||
                                    (index.mass(b) == index.mass(a) && cb < ca);
                    if (rc > threshold && outranks) expect.insert({ca, cb});
                }
            std::set<std::pair<std::string, std::string>> got;
            for (const auto& e : dag.edges) got.insert({e.child, e.parent});
            CHECK(got == expect);
        }
    }
}

TEST_CASE("hierarchy files round-trip") {
    TempDir dir("hier_io");
    LeveledDag dag = build_hierarchy(build_tag_index(worked_example()), 0.3, {});
    write_hierarchy_tsv(dag, dir.path / "h.tsv");
    write_levels_tsv(dag, dir.path / "l.tsv");
    LeveledDag back = read_hierarchy(dir.path / "h.tsv", dir.path / "l.tsv");
    REQUIRE(back.edges.size() == 1);
    CHECK(back.edges[0].child == "i");
    CHECK(back.level.at("j") == 2);
    CHECK(back.level.at("i") == 3);
}
