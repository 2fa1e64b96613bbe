#include "fos/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fos/util.hpp"

namespace fos {

namespace {

using nlohmann::json;

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

[[noreturn]] void fail_at(const std::filesystem::path& path, size_t line, const std::string& msg) {
    throw std::runtime_error(path.filename().string() + ":" + std::to_string(line) + ": " + msg);
}

json parse_line(const std::filesystem::path& path, size_t line_no, const std::string& line) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
    }
}

std::string get_string(const json& j, const char* key, const std::filesystem::path& path,
                       size_t line_no, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) fail_at(path, line_no, std::string("missing field '") + key + "'");
        return {};
    }
    if (!it->is_string()) fail_at(path, line_no, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> get_string_array(const json& j, const char* key,
                                          const std::filesystem::path& path, size_t line_no) {
    auto it = j.find(key);
    if (it == j.end()) return {};
    if (!it->is_array()) fail_at(path, line_no, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string())
            fail_at(path, line_no, std::string("field '") + key + "' must contain only strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

// Warn once per unexpected field name per file.
void warn_unknown_fields(const json& j, std::initializer_list<const char*> known,
                         const std::filesystem::path& path, std::set<std::string>& seen) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok && seen.insert(it.key()).second)
            std::cerr << "warning: " << path.filename().string() << ": ignoring unknown field '"
                      << it.key() << "'\n";
    }
}

// Runs fn(line_no, line) for each non-empty line of the file.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path.string());
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fn(line_no, line);
    }
}

// Duplicate-id detection that reports both offending lines.
class LineRegistry {
public:
    void check(const std::string& id, size_t line_no, const std::filesystem::path& path,
               const char* what) {
        auto [it, fresh] = first_line_.emplace(id, line_no);
        if (!fresh)
            fail_at(path, line_no,
                    std::string("duplicate ") + what + " id '" + id + "' (first seen at line " +
                        std::to_string(it->second) + ", again at line " + std::to_string(line_no) +
                        ")");
    }

private:
    std::unordered_map<std::string, size_t> first_line_;
};

void build_in_links(EntityStore& store) {
    std::vector<std::vector<std::string>> in(store.size());
    for (size_t i = 0; i < store.size(); ++i) {
        const Entity& e = store.at(i);
        for (const auto& target : e.out_links) {
            auto idx = store.index_of(target);
            if (idx) in[*idx].push_back(e.id);
        }
    }
    for (size_t i = 0; i < store.size(); ++i) {
        sort_unique(in[i]);
        store.at_mut(i).in_links = std::move(in[i]);
    }
}

void build_citations(DocumentStore& store) {
    std::vector<std::vector<std::string>> cit(store.size());
    for (size_t i = 0; i < store.size(); ++i) {
        const Document& d = store.at(i);
        for (const auto& target : d.references) {
            auto idx = store.index_of(target);
            if (idx) cit[*idx].push_back(d.id);
        }
    }
    for (size_t i = 0; i < store.size(); ++i) {
        sort_unique(cit[i]);
        store.at_mut(i).citations = std::move(cit[i]);
    }
}

}  // namespace

bool SeedTaxonomy::is_l0(const std::string& id) const {
    return std::binary_search(l0.begin(), l0.end(), id);
}
bool SeedTaxonomy::is_l1(const std::string& id) const {
    return std::binary_search(l1.begin(), l1.end(), id);
}
bool SeedTaxonomy::is_seed(const std::string& id) const {
    return std::binary_search(seed_fos.begin(), seed_fos.end(), id);
}

EntityStore load_entities(const std::filesystem::path& path) {
    EntityStore store;
    LineRegistry lines;
    std::set<std::string> unknown_seen;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        json j = parse_line(path, line_no, line);
        if (!j.is_object()) fail_at(path, line_no, "record must be a JSON object");
        warn_unknown_fields(j, {"id", "title", "first_paragraph", "kb_types", "out_links"}, path,
                            unknown_seen);
        Entity e;
        e.id = get_string(j, "id", path, line_no, true);
        if (e.id.empty()) fail_at(path, line_no, "empty id");
        lines.check(e.id, line_no, path, "entity");
        e.title = get_string(j, "title", path, line_no, false);
        e.first_paragraph = get_string(j, "first_paragraph", path, line_no, false);
        e.kb_types = get_string_array(j, "kb_types", path, line_no);
        e.out_links = get_string_array(j, "out_links", path, line_no);
        sort_unique(e.kb_types);
        sort_unique(e.out_links);
        store.add(std::move(e));
    });
    build_in_links(store);
    return store;
}

DocumentStore load_documents(const std::filesystem::path& path) {
    DocumentStore store;
    LineRegistry lines;
    std::set<std::string> unknown_seen;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        json j = parse_line(path, line_no, line);
        if (!j.is_object()) fail_at(path, line_no, "record must be a JSON object");
        warn_unknown_fields(j, {"id", "title", "keywords", "abstract", "venue_id", "references"},
                            path, unknown_seen);
        Document d;
        d.id = get_string(j, "id", path, line_no, true);
        if (d.id.empty()) fail_at(path, line_no, "empty id");
        lines.check(d.id, line_no, path, "document");
        d.title = get_string(j, "title", path, line_no, false);
        d.keywords = get_string_array(j, "keywords", path, line_no);
        d.abstract = get_string(j, "abstract", path, line_no, false);
        if (j.contains("venue_id") && !j["venue_id"].is_null()) {
            std::string v = get_string(j, "venue_id", path, line_no, false);
            if (!v.empty()) d.venue_id = std::move(v);
        }
        d.references = get_string_array(j, "references", path, line_no);
        sort_unique(d.references);
        if (std::binary_search(d.references.begin(), d.references.end(), d.id))
            fail_at(path, line_no, "document '" + d.id + "' references itself");
        store.add(std::move(d));
    });

    // References must resolve within the store.
    std::vector<std::string> dangling;
    for (const Document& d : store)
        for (const auto& r : d.references)
            if (!store.find(r)) dangling.push_back(d.id + " -> " + r);
    if (!dangling.empty()) {
        std::sort(dangling.begin(), dangling.end());
        std::string msg = "dangling document references: ";
        size_t show = std::min<size_t>(dangling.size(), 10);
        for (size_t i = 0; i < show; ++i) msg += (i ? ", " : "") + dangling[i];
        if (dangling.size() > show)
            msg += " (and " + std::to_string(dangling.size() - show) + " more)";
        throw std::runtime_error(path.filename().string() + ": " + msg);
    }

    build_citations(store);
    return store;
}

VenueStore load_venues(const std::filesystem::path& path) {
    VenueStore store;
    LineRegistry lines;
    std::set<std::string> unknown_seen;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        json j = parse_line(path, line_no, line);
        if (!j.is_object()) fail_at(path, line_no, "record must be a JSON object");
        warn_unknown_fields(j, {"id", "full_name"}, path, unknown_seen);
        Venue v;
        v.id = get_string(j, "id", path, line_no, true);
        if (v.id.empty()) fail_at(path, line_no, "empty id");
        lines.check(v.id, line_no, path, "venue");
        v.full_name = get_string(j, "full_name", path, line_no, false);
        store.add(std::move(v));
    });
    return store;
}

SeedTaxonomy load_seed_taxonomy(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path.filename().string() + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path.filename().string() + ": expected an object");

    SeedTaxonomy raw;
    raw.l0 = get_string_array(j, "l0", path, 0);
    raw.l1 = get_string_array(j, "l1", path, 0);
    raw.seed_fos = get_string_array(j, "seed_fos", path, 0);
    raw.type_allowlist = get_string_array(j, "type_allowlist", path, 0);
    raw.type_blocklist = get_string_array(j, "type_blocklist", path, 0);
    if (j.contains("l0_l1_edges")) {
        if (!j["l0_l1_edges"].is_array())
            throw std::runtime_error(path.filename().string() + ": l0_l1_edges must be an array");
        for (const auto& pair : j["l0_l1_edges"]) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
                throw std::runtime_error(path.filename().string() +
                                         ": l0_l1_edges entries must be [child, parent] pairs");
            raw.l0_l1_edges.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
    }
    if (j.contains("concept_venue_map")) {
        if (!j["concept_venue_map"].is_object())
            throw std::runtime_error(path.filename().string() + ": concept_venue_map must be an object");
        for (auto it = j["concept_venue_map"].begin(); it != j["concept_venue_map"].end(); ++it) {
            if (!it.value().is_array())
                throw std::runtime_error(path.filename().string() +
                                         ": concept_venue_map values must be arrays");
            std::vector<std::string> venues;
            for (const auto& v : it.value()) {
                if (!v.is_string())
                    throw std::runtime_error(path.filename().string() +
                                             ": concept_venue_map venue ids must be strings");
                venues.push_back(v.get<std::string>());
            }
            raw.concept_venue_map.emplace(it.key(), std::move(venues));
        }
    }
    return build_seed_taxonomy(std::move(raw));
}

EntityStore build_entity_store(std::vector<Entity> records) {
    EntityStore store;
    for (auto& e : records) {
        sort_unique(e.kb_types);
        sort_unique(e.out_links);
        e.in_links.clear();
        store.add(std::move(e));
    }
    build_in_links(store);
    return store;
}

DocumentStore build_document_store(std::vector<Document> records) {
    DocumentStore store;
    for (auto& d : records) {
        sort_unique(d.references);
        if (std::binary_search(d.references.begin(), d.references.end(), d.id))
            throw std::runtime_error("document '" + d.id + "' references itself");
        d.citations.clear();
        store.add(std::move(d));
    }
    std::vector<std::string> dangling;
    for (const Document& d : store)
        for (const auto& r : d.references)
            if (!store.find(r)) dangling.push_back(d.id + " -> " + r);
    if (!dangling.empty())
        throw std::runtime_error("dangling document references: " + dangling.front() +
                                 (dangling.size() > 1
                                      ? " (and " + std::to_string(dangling.size() - 1) + " more)"
                                      : ""));
    build_citations(store);
    return store;
}

VenueStore build_venue_store(std::vector<Venue> records) {
    VenueStore store;
    for (auto& v : records) {
        v.member_docs.clear();
        store.add(std::move(v));
    }
    return store;
}

SeedTaxonomy build_seed_taxonomy(SeedTaxonomy raw) {
    sort_unique(raw.l0);
    sort_unique(raw.l1);
    sort_unique(raw.seed_fos);
    sort_unique(raw.type_allowlist);
    sort_unique(raw.type_blocklist);

    std::vector<std::string> overlap;
    std::set_intersection(raw.l0.begin(), raw.l0.end(), raw.l1.begin(), raw.l1.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty())
        throw std::runtime_error("seed taxonomy: l0 and l1 overlap on '" + overlap.front() + "'");

    // l0 and l1 are part of the seed set by definition.
    for (const auto& id : raw.l0)
        if (!std::binary_search(raw.seed_fos.begin(), raw.seed_fos.end(), id))
            throw std::runtime_error("seed taxonomy: l0 concept '" + id + "' missing from seed_fos");
    for (const auto& id : raw.l1)
        if (!std::binary_search(raw.seed_fos.begin(), raw.seed_fos.end(), id))
            throw std::runtime_error("seed taxonomy: l1 concept '" + id + "' missing from seed_fos");

    std::vector<std::string> type_overlap;
    std::set_intersection(raw.type_allowlist.begin(), raw.type_allowlist.end(),
                          raw.type_blocklist.begin(), raw.type_blocklist.end(),
                          std::back_inserter(type_overlap));
    if (!type_overlap.empty())
        throw std::runtime_error("seed taxonomy: type '" + type_overlap.front() +
                                 "' appears in both allowlist and blocklist");
    return raw;
}

CorpusSnapshot make_snapshot(EntityStore entities, DocumentStore documents, VenueStore venues,
                             SeedTaxonomy seeds) {
    CorpusSnapshot snap{std::move(entities), std::move(documents), std::move(venues),
                        std::move(seeds)};
    std::vector<std::vector<std::string>> members(snap.venues.size());
    for (const Document& d : snap.documents) {
        if (!d.venue_id) continue;
        auto idx = snap.venues.index_of(*d.venue_id);
        if (idx) members[*idx].push_back(d.id);
    }
    for (size_t i = 0; i < snap.venues.size(); ++i) {
        std::sort(members[i].begin(), members[i].end());
        snap.venues.at_mut(i).member_docs = std::move(members[i]);
    }
    return snap;
}

ValidationReport validate_corpus(const CorpusSnapshot& snap) {
    ValidationReport rep;
    rep.entity_count = snap.entities.size();
    rep.document_count = snap.documents.size();
    rep.venue_count = snap.venues.size();
    rep.seed_count = snap.seeds.seed_fos.size();

    for (const Entity& e : snap.entities)
        for (const auto& t : e.out_links)
            if (!snap.entities.find(t)) ++rep.dangling_entity_links;
    if (rep.dangling_entity_links > 0)
        rep.warnings.push_back(std::to_string(rep.dangling_entity_links) +
                               " entity out-links point outside the store");

    for (const Document& d : snap.documents) {
        if (d.venue_id && !snap.venues.find(*d.venue_id)) {
            ++rep.unresolved_venue_docs;
            rep.warnings.push_back("document '" + d.id + "' has unresolved venue '" + *d.venue_id +
                                   "'");
        }
    }

    for (const Venue& v : snap.venues)
        if (v.member_docs.empty())
            rep.warnings.push_back("venue '" + v.id + "' has no member documents");

    const SeedTaxonomy& s = snap.seeds;
    for (const auto& id : s.seed_fos) {
        const Entity* e = snap.entities.find(id);
        if (!e) {
            rep.errors.push_back("seed concept '" + id + "' not found in entity store");
        } else if (e->first_paragraph.empty()) {
            rep.errors.push_back("seed concept '" + id + "' has an empty first_paragraph");
        }
    }
    for (const auto& [child, parent] : s.l0_l1_edges) {
        if (!s.is_l1(child))
            rep.errors.push_back("curated edge child '" + child + "' is not an l1 concept");
        if (!s.is_l0(parent))
            rep.errors.push_back("curated edge parent '" + parent + "' is not an l0 concept");
    }
    for (const auto& [concept_id, venue_ids] : s.concept_venue_map) {
        if (!s.is_seed(concept_id))
            rep.errors.push_back("concept_venue_map concept '" + concept_id + "' is not a seed");
        for (const auto& vid : venue_ids)
            if (!snap.venues.find(vid))
                rep.errors.push_back("concept_venue_map venue '" + vid + "' not found (concept '" +
                                     concept_id + "')");
    }
    return rep;
}

CorpusSnapshot load_corpus(const std::filesystem::path& entities_path,
                           const std::filesystem::path& documents_path,
                           const std::filesystem::path& venues_path,
                           const std::filesystem::path& seeds_path) {
    CorpusSnapshot snap =
        make_snapshot(load_entities(entities_path), load_documents(documents_path),
                      load_venues(venues_path), load_seed_taxonomy(seeds_path));
    ValidationReport rep = validate_corpus(snap);
    if (!rep.ok()) {
        std::string msg = "corpus validation failed:";
        for (const auto& e : rep.errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "corpus: " << rep.entity_count << " entities, " << rep.document_count
              << " documents, " << rep.venue_count << " venues, " << rep.seed_count
              << " seed concepts\n";
    return snap;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    out << "entities: " << entity_count << "\n"
        << "documents: " << document_count << "\n"
        << "venues: " << venue_count << "\n"
        << "seed concepts: " << seed_count << "\n"
        << "dangling entity links: " << dangling_entity_links << "\n"
        << "unresolved venue docs: " << unresolved_venue_docs << "\n"
        << "errors: " << errors.size() << "\n";
    for (const auto& e : errors) out << "  error: " << e << "\n";
    out << "warnings: " << warnings.size() << "\n";
    for (const auto& w : warnings) out << "  warning: " << w << "\n";
    return out.str();
}

std::string snapshot_serialize(const CorpusSnapshot& snap) {
    using nlohmann::ordered_json;
    ordered_json root;

    auto ids_sorted = [](auto& store) {
        std::vector<std::string> ids;
        ids.reserve(store.size());
        for (const auto& rec : store) ids.push_back(rec.id);
        std::sort(ids.begin(), ids.end());
        return ids;
    };

    ordered_json ents = ordered_json::array();
    for (const auto& id : ids_sorted(snap.entities)) {
        const Entity& e = *snap.entities.find(id);
        ents.push_back({{"id", e.id},
                        {"title", e.title},
                        {"first_paragraph", e.first_paragraph},
                        {"kb_types", e.kb_types},
                        {"out_links", e.out_links},
                        {"in_links", e.in_links}});
    }
    root["entities"] = std::move(ents);

    ordered_json docs = ordered_json::array();
    for (const auto& id : ids_sorted(snap.documents)) {
        const Document& d = *snap.documents.find(id);
        docs.push_back({{"id", d.id},
                        {"title", d.title},
                        {"keywords", d.keywords},
                        {"abstract", d.abstract},
                        {"venue_id", d.venue_id ? *d.venue_id : ""},
                        {"references", d.references},
                        {"citations", d.citations}});
    }
    root["documents"] = std::move(docs);

    ordered_json vens = ordered_json::array();
    for (const auto& id : ids_sorted(snap.venues)) {
        const Venue& v = *snap.venues.find(id);
        vens.push_back({{"id", v.id}, {"full_name", v.full_name}, {"member_docs", v.member_docs}});
    }
    root["venues"] = std::move(vens);

    ordered_json seeds;
    seeds["l0"] = snap.seeds.l0;
    seeds["l1"] = snap.seeds.l1;
    seeds["seed_fos"] = snap.seeds.seed_fos;
    ordered_json edges = ordered_json::array();
    for (const auto& [c, p] : snap.seeds.l0_l1_edges) edges.push_back({c, p});
    seeds["l0_l1_edges"] = std::move(edges);
    ordered_json cvm;
    for (const auto& [c, vs] : snap.seeds.concept_venue_map) cvm[c] = vs;
    seeds["concept_venue_map"] = std::move(cvm);
    seeds["type_allowlist"] = snap.seeds.type_allowlist;
    seeds["type_blocklist"] = snap.seeds.type_blocklist;
    root["seeds"] = std::move(seeds);

    return root.dump(1);
}

}  // namespace fos
