#include "fos/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "fos/util.hpp"

namespace fos {

TagIndex TagIndex::build(const std::vector<TagPair>& tags) {
    TagIndex index;

    std::set<std::string> concept_set, doc_set;
    for (const auto& t : tags) {
        concept_set.insert(t.concept_id);
        doc_set.insert(t.doc_id);
    }
    index.concept_ids_.assign(concept_set.begin(), concept_set.end());
    index.doc_ids_.assign(doc_set.begin(), doc_set.end());
    for (uint32_t i = 0; i < index.concept_ids_.size(); ++i)
        index.concept_index_.emplace(index.concept_ids_[i], i);
    std::unordered_map<std::string, uint32_t> doc_index;
    for (uint32_t i = 0; i < index.doc_ids_.size(); ++i) doc_index.emplace(index.doc_ids_[i], i);

    index.postings_.resize(index.concept_ids_.size());
    for (const auto& t : tags) {
        if (!(t.confidence > 0.0 && t.confidence <= 1.0))
            throw std::runtime_error("tag index: weight for (" + t.concept_id + ", " + t.doc_id +
                                     ") must be in (0,1], got " + format_roundtrip(t.confidence));
        index.postings_[index.concept_index_.at(t.concept_id)].push_back(
            {doc_index.at(t.doc_id), t.confidence});
    }

    index.mass_.resize(index.postings_.size(), 0.0);
    for (uint32_t i = 0; i < index.postings_.size(); ++i) {
        auto& list = index.postings_[i];
        std::sort(list.begin(), list.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t k = 1; k < list.size(); ++k)
            if (list[k].first == list[k - 1].first)
                throw std::runtime_error("tag index: duplicate pair (" + index.concept_ids_[i] +
                                         ", " + index.doc_ids_[list[k].first] + ")");
        double m = 0.0;
        for (const auto& [doc, w] : list) m += w;
        index.mass_[i] = m;
    }
    return index;
}

std::optional<uint32_t> TagIndex::index_of(const std::string& concept_id) const {
    auto it = concept_index_.find(concept_id);
    if (it == concept_index_.end()) return std::nullopt;
    return it->second;
}

TagIndex build_tag_index(const std::vector<TagPair>& tags) { return TagIndex::build(tags); }

namespace {

uint32_t require_concept(const TagIndex& index, const std::string& id) {
    auto idx = index.index_of(id);
    if (!idx) throw std::runtime_error("unknown concept in tag index: " + id);
    return *idx;
}

// Sums of child and parent weights over the intersection of two posting
// lists, plus the raw intersection size.
struct Overlap {
    double wi = 0.0;
    double wj = 0.0;
    size_t docs = 0;
};

Overlap intersect(const std::vector<std::pair<uint32_t, double>>& a,
                  const std::vector<std::pair<uint32_t, double>>& b) {
    Overlap o;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) ++i;
        else if (b[j].first < a[i].first) ++j;
        else {
            o.wi += a[i].second;
            o.wj += b[j].second;
            ++o.docs;
            ++i;
            ++j;
        }
    }
    return o;
}

double rc_from_overlap(const Overlap& o, double mass_i, double mass_j) {
    if (o.docs == 0) return 0.0;
    return o.wi / mass_i - o.wj / mass_j;
}

}  // namespace

double relative_coverage(const TagIndex& index, const std::string& concept_i,
                         const std::string& concept_j) {
    uint32_t i = require_concept(index, concept_i);
    uint32_t j = require_concept(index, concept_j);
    Overlap o = intersect(index.postings(i), index.postings(j));
    return rc_from_overlap(o, index.mass(i), index.mass(j));
}

bool classic_subsumption(const TagIndex& index, const std::string& concept_i,
                         const std::string& concept_j, double p) {
    uint32_t i = require_concept(index, concept_i);
    uint32_t j = require_concept(index, concept_j);
    Overlap o = intersect(index.postings(i), index.postings(j));
    size_t size_i = index.postings(i).size();
    size_t size_j = index.postings(j).size();
    if (size_i == 0 || size_j == 0) return false;
    double p_j_given_i = static_cast<double>(o.docs) / static_cast<double>(size_i);
    double p_i_given_j = static_cast<double>(o.docs) / static_cast<double>(size_j);
    return p_j_given_i >= p && p_i_given_j < 1.0;
}

LeveledDag build_hierarchy(const TagIndex& index, double threshold, const SeedTaxonomy& seeds) {
    if (!(threshold > 0.0)) throw std::runtime_error("hierarchy: threshold must be positive");

    // Enumerate concept pairs that share at least one document by joining
    // through the docs; everything else has RC = 0.
    std::vector<std::vector<uint32_t>> doc_to_concepts(index.doc_count());
    for (uint32_t c = 0; c < index.concept_count(); ++c)
        for (const auto& [doc, w] : index.postings(c)) doc_to_concepts[doc].push_back(c);

    std::set<std::pair<uint32_t, uint32_t>> pairs;
    for (const auto& concepts : doc_to_concepts)
        for (size_t a = 0; a < concepts.size(); ++a)
            for (size_t b = a + 1; b < concepts.size(); ++b)
                pairs.insert({concepts[a], concepts[b]});

    // Parent eligibility is a strict total order on concepts (mass, then id),
    // so every admitted edge points "up" and no cycle can form.
    auto outranks = [&](uint32_t parent, uint32_t child) {
        if (index.mass(parent) != index.mass(child))
            return index.mass(parent) > index.mass(child);
        return index.concept_id(parent) < index.concept_id(child);
    };

    std::vector<HierarchyEdge> edges;
    for (const auto& [a, b] : pairs) {
        Overlap o = intersect(index.postings(a), index.postings(b));
        double rc_ab = rc_from_overlap(o, index.mass(a), index.mass(b));
        if (rc_ab > threshold && outranks(b, a))
            edges.push_back({index.concept_id(a), index.concept_id(b), rc_ab});
        double rc_ba = -rc_ab;
        if (rc_ba > threshold && outranks(a, b))
            edges.push_back({index.concept_id(b), index.concept_id(a), rc_ba});
    }

    // Curated L0/L1 edges replace anything computed for L0/L1 children; level
    // pinning makes computed parents for those concepts incoherent anyway.
    std::vector<HierarchyEdge> kept;
    for (auto& e : edges)
        if (!seeds.is_l0(e.child) && !seeds.is_l1(e.child)) kept.push_back(std::move(e));
    for (const auto& [child, parent] : seeds.l0_l1_edges) {
        double rc = 0.0;
        if (index.index_of(child) && index.index_of(parent))
            rc = relative_coverage(index, child, parent);
        kept.push_back({child, parent, rc});
    }
    std::sort(kept.begin(), kept.end(), [](const HierarchyEdge& a, const HierarchyEdge& b) {
        if (a.child != b.child) return a.child < b.child;
        return a.parent < b.parent;
    });
    kept.erase(std::unique(kept.begin(), kept.end(),
                           [](const HierarchyEdge& a, const HierarchyEdge& b) {
                               return a.child == b.child && a.parent == b.parent;
                           }),
               kept.end());

    std::vector<std::string> nodes;
    for (uint32_t c = 0; c < index.concept_count(); ++c) nodes.push_back(index.concept_id(c));
    for (const auto& [child, parent] : seeds.l0_l1_edges) {
        nodes.push_back(child);
        nodes.push_back(parent);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    LeveledDag dag;
    dag.edges = std::move(kept);
    dag.level = assign_levels(dag.edges, seeds, nodes);
    return dag;
}

std::map<std::string, int> assign_levels(const std::vector<HierarchyEdge>& edges,
                                         const SeedTaxonomy& seeds,
                                         const std::vector<std::string>& nodes) {
    std::map<std::string, std::vector<std::string>> parents_of;   // child -> parents
    std::map<std::string, std::vector<std::string>> children_of;  // parent -> children
    std::map<std::string, size_t> pending_parents;
    std::set<std::string> all(nodes.begin(), nodes.end());
    for (const auto& e : edges) {
        all.insert(e.child);
        all.insert(e.parent);
    }
    for (const auto& n : all) pending_parents[n] = 0;
    for (const auto& e : edges) {
        parents_of[e.child].push_back(e.parent);
        children_of[e.parent].push_back(e.child);
        ++pending_parents[e.child];
    }

    // Kahn order over the dependency "all parents before the child".
    std::deque<std::string> ready;
    for (const auto& [n, deg] : pending_parents)
        if (deg == 0) ready.push_back(n);
    std::map<std::string, int> level;
    size_t processed = 0;
    while (!ready.empty()) {
        std::string n = std::move(ready.front());
        ready.pop_front();
        ++processed;
        int lvl;
        if (seeds.is_l0(n)) {
            lvl = 0;
        } else if (seeds.is_l1(n)) {
            lvl = 1;
        } else {
            auto it = parents_of.find(n);
            if (it == parents_of.end() || it->second.empty()) {
                lvl = 2;  // parentless non-seed
            } else {
                int max_parent = 0;
                for (const auto& p : it->second) max_parent = std::max(max_parent, level.at(p));
                lvl = std::min(5, max_parent + 1);
            }
        }
        level[n] = lvl;
        auto ch = children_of.find(n);
        if (ch != children_of.end())
            for (const auto& c : ch->second)
                if (--pending_parents[c] == 0) ready.push_back(c);
    }
    if (processed != all.size()) throw std::runtime_error("assign_levels: hierarchy has a cycle");
    return level;
}

DagDiagnostics check_dag(const LeveledDag& dag) {
    DagDiagnostics diag;

    std::set<std::string> nodes;
    for (const auto& [n, l] : dag.level) nodes.insert(n);
    for (const auto& e : dag.edges) {
        nodes.insert(e.child);
        nodes.insert(e.parent);
    }
    diag.node_count = nodes.size();
    diag.edge_count = dag.edges.size();

    std::map<std::string, std::vector<std::string>> parents_of, children_of;
    std::map<std::string, size_t> pending;
    std::set<std::string> touched;
    for (const auto& n : nodes) pending[n] = 0;
    for (const auto& e : dag.edges) {
        parents_of[e.child].push_back(e.parent);
        children_of[e.parent].push_back(e.child);
        ++pending[e.child];
        touched.insert(e.child);
        touched.insert(e.parent);
    }
    diag.orphan_count = nodes.size() - touched.size();

    // Kahn with longest-chain tracking: depth(n) = 1 + max depth of parents.
    std::deque<std::string> ready;
    std::map<std::string, size_t> depth;
    for (const auto& [n, deg] : pending)
        if (deg == 0) ready.push_back(n);
    size_t processed = 0;
    while (!ready.empty()) {
        std::string n = std::move(ready.front());
        ready.pop_front();
        ++processed;
        size_t d = 1;
        auto it = parents_of.find(n);
        if (it != parents_of.end())
            for (const auto& p : it->second) d = std::max(d, depth[p] + 1);
        depth[n] = d;
        diag.max_depth = std::max(diag.max_depth, d);
        auto ch = children_of.find(n);
        if (ch != children_of.end())
            for (const auto& c : ch->second)
                if (--pending[c] == 0) ready.push_back(c);
    }

    if (processed != nodes.size()) {
        diag.acyclic = false;
        // Extract one cycle: walk parent pointers among unprocessed nodes.
        std::set<std::string> stuck;
        for (const auto& [n, deg] : pending)
            if (deg > 0) stuck.insert(n);
        std::string cur = *stuck.begin();
        std::vector<std::string> path;
        std::map<std::string, size_t> seen_at;
        while (!seen_at.count(cur)) {
            seen_at[cur] = path.size();
            path.push_back(cur);
            for (const auto& p : parents_of[cur])
                if (stuck.count(p)) { cur = p; break; }
        }
        diag.cycle.assign(path.begin() + static_cast<long>(seen_at[cur]), path.end());
    }

    for (const auto& [n, l] : dag.level)
        if (l >= 0 && l <= 5) ++diag.level_histogram[static_cast<size_t>(l)];

    return diag;
}

std::string DagDiagnostics::to_string() const {
    std::ostringstream out;
    out << "nodes: " << node_count << "\n"
        << "edges: " << edge_count << "\n"
        << "acyclic: " << (acyclic ? "yes" : "no") << "\n";
    if (!acyclic) {
        out << "cycle:";
        for (const auto& n : cycle) out << " " << n;
        out << "\n";
    }
    out << "orphans: " << orphan_count << "\n"
        << "max depth: " << max_depth << "\n";
    for (size_t l = 0; l < level_histogram.size(); ++l)
        out << "level " << l << ": " << level_histogram[l] << "\n";
    return out.str();
}

void write_hierarchy_tsv(const LeveledDag& dag, const std::filesystem::path& path) {
    std::string out;
    for (const auto& e : dag.edges) {
        out += e.child;
        out.push_back('\t');
        out += e.parent;
        out.push_back('\t');
        out += format_fixed6(e.rc);
        out.push_back('\n');
    }
    write_file(path, out);
}

void write_levels_tsv(const LeveledDag& dag, const std::filesystem::path& path) {
    std::string out;
    for (const auto& [n, l] : dag.level) {
        out += n;
        out.push_back('\t');
        out += std::to_string(l);
        out.push_back('\n');
    }
    write_file(path, out);
}

LeveledDag read_hierarchy(const std::filesystem::path& edges_path,
                          const std::filesystem::path& levels_path) {
    LeveledDag dag;
    {
        std::ifstream in(edges_path);
        if (!in) throw std::runtime_error("cannot open hierarchy file: " + edges_path.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            HierarchyEdge e;
            std::string rc;
            if (!std::getline(ss, e.child, '\t') || !std::getline(ss, e.parent, '\t') ||
                !std::getline(ss, rc) || !parse_double(rc, e.rc))
                throw std::runtime_error("bad hierarchy row: " + line);
            dag.edges.push_back(std::move(e));
        }
    }
    {
        std::ifstream in(levels_path);
        if (!in) throw std::runtime_error("cannot open levels file: " + levels_path.string());
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::string node, lvl;
            if (!std::getline(ss, node, '\t') || !std::getline(ss, lvl))
                throw std::runtime_error("bad levels row: " + line);
            dag.level[node] = std::stoi(lvl);
        }
    }
    return dag;
}

}  // namespace fos
