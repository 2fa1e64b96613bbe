#include "fos/discovery.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "fos/util.hpp"

namespace fos {

void DiscoveryParams::validate() const {
    if (n_neighbors < 1) throw std::runtime_error("discovery: N must be >= 1");
    if (vote_threshold < 1 || vote_threshold > n_neighbors)
        throw std::runtime_error("discovery: K must satisfy 1 <= K <= N");
    if (max_iterations < 1) throw std::runtime_error("discovery: max_iterations must be >= 1");
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::seed: return "seed";
        case Provenance::vote: return "vote";
        case Provenance::type_enrichment: return "type-enrichment";
    }
    return "unknown";
}

Provenance provenance_from_name(std::string_view name) {
    if (name == "seed") return Provenance::seed;
    if (name == "vote") return Provenance::vote;
    if (name == "type-enrichment") return Provenance::type_enrichment;
    throw std::runtime_error("unknown provenance: " + std::string(name));
}

bool FosRegistry::contains(const std::string& id) const {
    auto it = std::lower_bound(records.begin(), records.end(), id,
                               [](const Record& r, const std::string& v) { return r.id < v; });
    return it != records.end() && it->id == id;
}

std::vector<std::string> FosRegistry::concept_ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.id);
    return out;
}

bool knn_vote(const LinkIndex& index, std::string_view e,
              const std::set<std::string>& current_fos, const DiscoveryParams& params) {
    if (current_fos.count(std::string(e)))
        throw std::runtime_error("knn_vote: entity is already a member: " + std::string(e));
    size_t count = 0;
    for (const auto& [idx, score] : index.top_n(index.index_of(e), params.n_neighbors))
        if (current_fos.count(index.id_of(idx))) ++count;
    return count > params.vote_threshold;
}

namespace {

bool has_any_type(const Entity& e, const std::vector<std::string>& sorted_types) {
    for (const auto& t : e.kb_types)
        if (std::binary_search(sorted_types.begin(), sorted_types.end(), t)) return true;
    return false;
}

}  // namespace

TypeFilterResult type_filter(const EntityStore& entities, const std::set<std::string>& candidates,
                             const std::vector<std::string>& allowlist,
                             const std::vector<std::string>& blocklist) {
    std::vector<std::string> allow(allowlist), block(blocklist);
    std::sort(allow.begin(), allow.end());
    std::sort(block.begin(), block.end());
    std::vector<std::string> overlap;
    std::set_intersection(allow.begin(), allow.end(), block.begin(), block.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty())
        throw std::runtime_error("type filter: '" + overlap.front() +
                                 "' is both allowlisted and blocklisted");

    TypeFilterResult result;
    for (const auto& id : candidates) {
        const Entity* e = entities.find(id);
        if (!e) throw std::runtime_error("type filter: unknown entity '" + id + "'");
        if (has_any_type(*e, block)) result.rejected.insert(id);
        else result.accepted.insert(id);
    }
    if (!allow.empty()) {
        for (const Entity& e : entities) {
            // Blocklist wins when an entity carries types from both lists.
            if (has_any_type(e, allow) && !has_any_type(e, block)) result.enriched.insert(e.id);
        }
    }
    return result;
}

FosRegistry discover(const CorpusSnapshot& snap, const LinkIndex& index,
                     const DiscoveryParams& params, std::ostream* log) {
    params.validate();
    const size_t n = index.entity_count();

    std::vector<char> in_fos(n, 0);
    std::vector<Provenance> prov(n, Provenance::seed);
    std::vector<uint32_t> iter_added(n, 0);
    for (const auto& id : snap.seeds.seed_fos) {
        uint32_t idx = index.index_of(id);
        in_fos[idx] = 1;
    }

    // Concepts need a definition paragraph; entities without one never join.
    std::vector<char> promotable(n, 1);
    for (uint32_t i = 0; i < n; ++i)
        if (snap.entities.at(i).first_paragraph.empty()) promotable[i] = 0;

    // The link graph is static, so each entity's top-N list is computed once
    // and only the membership counts change between iterations.
    std::vector<std::vector<uint32_t>> topn(n);
    std::vector<char> topn_ready(n, 0);

    for (size_t iteration = 1; iteration <= params.max_iterations; ++iteration) {
        std::vector<char> voted(n, 0);
        parallel_for(n, [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i) {
                if (in_fos[i] || !promotable[i]) continue;
                if (!topn_ready[i]) {
                    auto ranked = index.top_n(static_cast<uint32_t>(i), params.n_neighbors);
                    topn[i].reserve(ranked.size());
                    for (const auto& [t, s] : ranked) topn[i].push_back(t);
                    topn_ready[i] = 1;
                }
                size_t count = 0;
                for (uint32_t t : topn[i])
                    if (in_fos[t]) ++count;
                if (count > params.vote_threshold) voted[i] = 1;
            }
        });

        std::set<std::string> candidates;
        for (uint32_t i = 0; i < n; ++i)
            if (voted[i]) candidates.insert(index.id_of(i));

        TypeFilterResult filtered = type_filter(snap.entities, candidates,
                                                snap.seeds.type_allowlist,
                                                snap.seeds.type_blocklist);

        size_t added = 0;
        for (const auto& id : filtered.accepted) {
            uint32_t i = index.index_of(id);
            if (in_fos[i]) continue;
            in_fos[i] = 1;
            prov[i] = Provenance::vote;
            iter_added[i] = static_cast<uint32_t>(iteration);
            ++added;
        }
        for (const auto& id : filtered.enriched) {
            uint32_t i = index.index_of(id);
            if (in_fos[i] || !promotable[i]) continue;
            in_fos[i] = 1;
            prov[i] = Provenance::type_enrichment;
            iter_added[i] = static_cast<uint32_t>(iteration);
            ++added;
        }

        if (log)
            *log << "discovery iteration " << iteration << ": +" << added << " concepts ("
                 << filtered.accepted.size() << " voted, " << filtered.rejected.size()
                 << " type-rejected, " << filtered.enriched.size() << " type-enriched)\n";
        if (added == 0) break;
    }

    FosRegistry registry;
    for (uint32_t i = 0; i < n; ++i)
        if (in_fos[i]) registry.records.push_back({index.id_of(i), prov[i], iter_added[i]});
    std::sort(registry.records.begin(), registry.records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return registry;
}

void write_registry_jsonl(const FosRegistry& registry, const std::filesystem::path& path) {
    std::string out;
    for (const auto& r : registry.records) {
        nlohmann::ordered_json j{
            {"id", r.id}, {"provenance", provenance_name(r.provenance)}, {"iteration", r.iteration}};
        out += j.dump();
        out.push_back('\n');
    }
    write_file(path, out);
}

FosRegistry read_registry_jsonl(const std::filesystem::path& path) {
    FosRegistry registry;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open registry file: " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": malformed JSON: " + e.what());
        }
        registry.records.push_back({j.at("id").get<std::string>(),
                                    provenance_from_name(j.at("provenance").get<std::string>()),
                                    j.at("iteration").get<uint32_t>()});
    }
    std::sort(registry.records.begin(), registry.records.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return registry;
}

}  // namespace fos
