#include "fos/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fos/util.hpp"

namespace fos {

namespace {

using nlohmann::ordered_json;

std::map<std::string, std::string> parse_flat_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!split_ws(line).empty())
                throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                         ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": empty key");
        if (!kv.emplace(key, value).second)
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": duplicate key '" + key + "'");
    }
    return kv;
}

double to_double(const std::string& key, const std::string& value) {
    double v;
    if (!parse_double(value, v)) throw std::runtime_error("config: bad number for '" + key + "'");
    return v;
}

uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        return std::stoull(value);
    } catch (const std::exception&) {
        throw std::runtime_error("config: bad integer for '" + key + "'");
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::runtime_error("config: bad boolean for '" + key + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || p.empty()) return path;
    return base / path;
}

struct Manifest {
    std::string config_digest;
    // stage -> (artifact file -> digest)
    std::map<std::string, std::map<std::string, std::string>> stages;
    std::map<std::string, bool> complete;

    static Manifest read(const std::filesystem::path& path) {
        Manifest m;
        if (!std::filesystem::exists(path)) return m;
        ordered_json j = ordered_json::parse(read_file(path));
        m.config_digest = j.value("config_digest", "");
        if (j.contains("stages"))
            for (auto it = j["stages"].begin(); it != j["stages"].end(); ++it) {
                m.complete[it.key()] = it.value().value("complete", false);
                if (it.value().contains("artifacts"))
                    for (auto a = it.value()["artifacts"].begin();
                         a != it.value()["artifacts"].end(); ++a)
                        m.stages[it.key()][a.key()] = a.value().get<std::string>();
            }
        return m;
    }

    void write(const std::filesystem::path& path) const {
        ordered_json j;
        j["config_digest"] = config_digest;
        ordered_json stages_json;
        std::set<std::string> names;
        for (const auto& [s, a] : stages) names.insert(s);
        for (const auto& [s, c] : complete) names.insert(s);
        for (const auto& s : names) {
            ordered_json js;
            auto c = complete.find(s);
            js["complete"] = c != complete.end() && c->second;
            ordered_json arts;
            auto it = stages.find(s);
            if (it != stages.end())
                for (const auto& [file, digest] : it->second) arts[file] = digest;
            js["artifacts"] = std::move(arts);
            stages_json[s] = std::move(js);
        }
        j["stages"] = std::move(stages_json);
        write_file(path, j.dump(1) + "\n");
    }
};

const std::map<std::string, std::vector<std::string>>& stage_artifacts() {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"discover", {"fos_registry.jsonl"}},
        {"tag", {"tags.tsv"}},
        {"hierarchy", {"hierarchy.tsv", "levels.tsv"}},
    };
    return table;
}

bool stage_is_fresh(const Manifest& m, const PipelineConfig& cfg, const std::string& stage) {
    if (m.config_digest != cfg.digest()) return false;
    auto c = m.complete.find(stage);
    if (c == m.complete.end() || !c->second) return false;
    auto arts = m.stages.find(stage);
    if (arts == m.stages.end()) return false;
    for (const auto& file : stage_artifacts().at(stage)) {
        auto rec = arts->second.find(file);
        if (rec == arts->second.end()) return false;
        auto path = cfg.out_dir / file;
        if (!std::filesystem::exists(path) || file_digest(path) != rec->second) return false;
    }
    return true;
}

void mark_stage(Manifest& m, const PipelineConfig& cfg, const std::string& stage, bool complete) {
    m.config_digest = cfg.digest();
    m.complete[stage] = complete;
    m.stages[stage].clear();
    if (complete)
        for (const auto& file : stage_artifacts().at(stage))
            m.stages[stage][file] = file_digest(cfg.out_dir / file);
    m.write(cfg.out_dir / "manifest.json");
}

CorpusSnapshot load_snapshot(const PipelineConfig& cfg) {
    return load_corpus(cfg.entities_path, cfg.documents_path, cfg.venues_path, cfg.seeds_path);
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    auto kv = parse_flat_config(path);
    PipelineConfig cfg;
    auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    for (const auto& [key, value] : kv) {
        if (key == "paths.entities") cfg.entities_path = resolve(base, value);
        else if (key == "paths.documents") cfg.documents_path = resolve(base, value);
        else if (key == "paths.venues") cfg.venues_path = resolve(base, value);
        else if (key == "paths.seeds") cfg.seeds_path = resolve(base, value);
        else if (key == "paths.embeddings") cfg.embeddings_path = resolve(base, value);
        else if (key == "paths.out") cfg.out_dir = resolve(base, value);
        else if (key == "discovery.n") cfg.discovery.n_neighbors = to_u64(key, value);
        else if (key == "discovery.k") cfg.discovery.vote_threshold = to_u64(key, value);
        else if (key == "discovery.max_iterations") cfg.discovery.max_iterations = to_u64(key, value);
        else if (key == "weights.cit") cfg.weights.cit = to_double(key, value);
        else if (key == "weights.ref") cfg.weights.ref = to_double(key, value);
        else if (key == "weights.venue") cfg.weights.venue = to_double(key, value);
        else if (key == "neighbor_cap") cfg.weights.neighbor_cap = to_u64(key, value);
        else if (key == "venue_sample") cfg.weights.venue_sample = to_u64(key, value);
        else if (key == "theta") cfg.tagging.theta = to_double(key, value);
        else if (key == "candidate_cap") cfg.tagging.candidate_cap = to_u64(key, value);
        else if (key == "rc_threshold") cfg.rc_threshold = to_double(key, value);
        else if (key == "block_weights.bow") cfg.block_weights.bow = to_double(key, value);
        else if (key == "block_weights.boe") cfg.block_weights.boe = to_double(key, value);
        else if (key == "block_weights.eow") cfg.block_weights.eow = to_double(key, value);
        else if (key == "block_weights.eoe") cfg.block_weights.eoe = to_double(key, value);
        else if (key == "min_df") cfg.min_df = static_cast<uint32_t>(to_u64(key, value));
        else if (key == "embedding_dim") cfg.embedding_dim = to_u64(key, value);
        else if (key == "embeddings.hash_fallback") cfg.hash_fallback = to_bool(key, value);
        else if (key == "rng_seed") cfg.rng_seed = to_u64(key, value);
        else throw std::runtime_error("config: unknown key '" + key + "'");
    }
    return cfg;
}

void PipelineConfig::validate() const {
    for (const auto& [name, p] :
         {std::pair<const char*, const std::filesystem::path*>{"paths.entities", &entities_path},
          {"paths.documents", &documents_path},
          {"paths.venues", &venues_path},
          {"paths.seeds", &seeds_path}}) {
        if (p->empty()) throw std::runtime_error(std::string("config: ") + name + " is required");
        if (!std::filesystem::exists(*p))
            throw std::runtime_error(std::string("config: ") + name + " does not exist: " +
                                     p->string());
    }
    if (out_dir.empty()) throw std::runtime_error("config: paths.out is required");
    discovery.validate();
    weights.validate();
    tagging.validate();
    if (!(rc_threshold > 0.0)) throw std::runtime_error("config: rc_threshold must be positive");
    if (embedding_dim == 0) throw std::runtime_error("config: embedding_dim must be positive");
    if (block_weights.bow < 0.0 || block_weights.boe < 0.0 || block_weights.eow < 0.0 ||
        block_weights.eoe < 0.0)
        throw std::runtime_error("config: block weights must be non-negative");
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out << "entities=" << entities_path.string() << '\n'
        << "documents=" << documents_path.string() << '\n'
        << "venues=" << venues_path.string() << '\n'
        << "seeds=" << seeds_path.string() << '\n'
        << "embeddings=" << embeddings_path.string() << '\n'
        << "discovery.n=" << discovery.n_neighbors << '\n'
        << "discovery.k=" << discovery.vote_threshold << '\n'
        << "discovery.max_iterations=" << discovery.max_iterations << '\n'
        << "weights.cit=" << format_roundtrip(weights.cit) << '\n'
        << "weights.ref=" << format_roundtrip(weights.ref) << '\n'
        << "weights.venue=" << format_roundtrip(weights.venue) << '\n'
        << "neighbor_cap=" << weights.neighbor_cap << '\n'
        << "venue_sample=" << weights.venue_sample << '\n'
        << "theta=" << format_roundtrip(tagging.theta) << '\n'
        << "candidate_cap=" << tagging.candidate_cap << '\n'
        << "rc_threshold=" << format_roundtrip(rc_threshold) << '\n'
        << "block_weights=" << format_roundtrip(block_weights.bow) << ','
        << format_roundtrip(block_weights.boe) << ',' << format_roundtrip(block_weights.eow) << ','
        << format_roundtrip(block_weights.eoe) << '\n'
        << "min_df=" << min_df << '\n'
        << "embedding_dim=" << embedding_dim << '\n'
        << "hash_fallback=" << (hash_fallback ? 1 : 0) << '\n'
        << "rng_seed=" << rng_seed << '\n';
    return out.str();
}

std::string PipelineConfig::digest() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

uint64_t PipelineConfig::stage_seed(std::string_view stage) const {
    return combine_seed(rng_seed, stage);
}

EmbeddingTable load_embedding_table(const PipelineConfig& cfg) {
    if (!cfg.embeddings_path.empty()) {
        if (!std::filesystem::exists(cfg.embeddings_path))
            throw std::runtime_error("embeddings file not found: " + cfg.embeddings_path.string());
        return EmbeddingTable::load(cfg.embeddings_path);
    }
    if (!cfg.hash_fallback)
        throw std::runtime_error(
            "no embeddings file configured (paths.embeddings) and hash fallback is disabled");
    return EmbeddingTable::hash_fallback(cfg.embedding_dim, cfg.stage_seed("embeddings"));
}

void run_discover_stage(const PipelineConfig& cfg, std::ostream& log) {
    CorpusSnapshot snap = load_snapshot(cfg);
    LinkIndex index = build_link_index(snap);
    FosRegistry registry = discover(snap, index, cfg.discovery, &log);
    std::filesystem::create_directories(cfg.out_dir);
    write_registry_jsonl(registry, cfg.out_dir / "fos_registry.jsonl");
    log << "discover: " << registry.size() << " concepts\n";
}

void run_tag_stage(const PipelineConfig& cfg, std::ostream& log) {
    CorpusSnapshot snap = load_snapshot(cfg);
    FosRegistry registry = read_registry_jsonl(cfg.out_dir / "fos_registry.jsonl");
    FeatureContext ctx = build_feature_context(snap, registry.concept_ids(),
                                               load_embedding_table(cfg), cfg.block_weights,
                                               cfg.min_df);
    TaggingEngine engine(snap, ctx, registry, cfg.weights, cfg.stage_seed("venue-sample"));
    TaggingStats stats;
    TaggingParams params = cfg.tagging;
    params.rng_seed = cfg.stage_seed("tagging");
    std::vector<TagPair> tags = engine.tag_corpus(params, &stats);
    write_tags_tsv(tags, cfg.out_dir / "tags.tsv");
    log << "tag: " << tags.size() << " pairs from " << stats.scored_pairs << " scored candidates\n";
}

void run_hierarchy_stage(const PipelineConfig& cfg, std::ostream& log) {
    SeedTaxonomy seeds = load_seed_taxonomy(cfg.seeds_path);
    std::vector<TagPair> tags = read_tags_tsv(cfg.out_dir / "tags.tsv");
    TagIndex index = build_tag_index(tags);
    LeveledDag dag = build_hierarchy(index, cfg.rc_threshold, seeds);
    DagDiagnostics diag = check_dag(dag);
    if (!diag.acyclic) throw std::runtime_error("hierarchy stage produced a cycle");
    write_hierarchy_tsv(dag, cfg.out_dir / "hierarchy.tsv");
    write_levels_tsv(dag, cfg.out_dir / "levels.tsv");
    log << "hierarchy: " << dag.edges.size() << " edges over " << diag.node_count
        << " concepts, max depth " << diag.max_depth << "\n";
}

int run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    Manifest manifest = Manifest::read(cfg.out_dir / "manifest.json");
    if (manifest.config_digest != cfg.digest()) {
        // Artifacts from a different configuration are stale as a set.
        manifest = Manifest{};
        manifest.config_digest = cfg.digest();
    }

    struct Stage {
        const char* name;
        void (*run)(const PipelineConfig&, std::ostream&);
    };
    const Stage stages[] = {{"discover", run_discover_stage},
                            {"tag", run_tag_stage},
                            {"hierarchy", run_hierarchy_stage}};

    for (const Stage& stage : stages) {
        if (stage_is_fresh(manifest, cfg, stage.name)) {
            log << stage.name << ": up to date, skipping\n";
            continue;
        }
        mark_stage(manifest, cfg, stage.name, false);
        try {
            stage.run(cfg, log);
        } catch (const std::exception& e) {
            log << "error in stage '" << stage.name << "': " << e.what() << "\n";
            return 1;
        }
        mark_stage(manifest, cfg, stage.name, true);
    }

    write_file(cfg.out_dir / "stats.txt", stats_report(cfg));
    return 0;
}

std::string stats_report(const PipelineConfig& cfg) {
    std::ostringstream out;
    auto registry_path = cfg.out_dir / "fos_registry.jsonl";
    auto tags_path = cfg.out_dir / "tags.tsv";
    auto hierarchy_path = cfg.out_dir / "hierarchy.tsv";
    auto levels_path = cfg.out_dir / "levels.tsv";

    if (std::filesystem::exists(registry_path)) {
        FosRegistry registry = read_registry_jsonl(registry_path);
        size_t seeds = 0, voted = 0, enriched = 0;
        for (const auto& r : registry.records) {
            if (r.provenance == Provenance::seed) ++seeds;
            else if (r.provenance == Provenance::vote) ++voted;
            else ++enriched;
        }
        out << "concepts: " << registry.size() << "\n"
            << "  seed: " << seeds << "\n"
            << "  vote: " << voted << "\n"
            << "  type-enrichment: " << enriched << "\n";
    }

    if (std::filesystem::exists(tags_path)) {
        std::vector<TagPair> tags = read_tags_tsv(tags_path);
        out << "tag pairs: " << tags.size() << "\n";
        std::array<size_t, 10> hist{};
        std::map<std::string, double> mass;
        for (const auto& t : tags) {
            size_t bin = std::min<size_t>(9, static_cast<size_t>(t.confidence * 10.0));
            ++hist[bin];
            mass[t.concept_id] += t.confidence;
        }
        out << "confidence histogram:\n";
        for (size_t b = 0; b < hist.size(); ++b) {
            out << "  [" << format_fixed6(b / 10.0) << ", "
                << (b == 9 ? std::string("1.000000]") : format_fixed6((b + 1) / 10.0) + ")") << " "
                << hist[b] << "\n";
        }
        std::vector<std::pair<std::string, double>> ranked(mass.begin(), mass.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        out << "top concepts by tag mass:\n";
        for (size_t i = 0; i < std::min<size_t>(10, ranked.size()); ++i)
            out << "  " << ranked[i].first << " " << format_fixed6(ranked[i].second) << "\n";
    }

    if (std::filesystem::exists(hierarchy_path) && std::filesystem::exists(levels_path)) {
        LeveledDag dag = read_hierarchy(hierarchy_path, levels_path);
        DagDiagnostics diag = check_dag(dag);
        out << "hierarchy edges: " << dag.edges.size() << "\n"
            << "level histogram:\n";
        for (size_t l = 0; l < diag.level_histogram.size(); ++l)
            out << "  L" << l << ": " << diag.level_histogram[l] << "\n";
        out << "max depth: " << diag.max_depth << "\n"
            << "orphans: " << diag.orphan_count << "\n";
    }
    return out.str();
}

size_t sample_for_eval(const PipelineConfig& cfg, const std::string& stage, uint64_t seed,
                       std::ostream& log) {
    const size_t target = 500;
    const size_t groups = 5;

    CorpusSnapshot snap = load_snapshot(cfg);
    auto entity_title = [&](const std::string& id) {
        const Entity* e = snap.entities.find(id);
        return e ? e->title : std::string("?");
    };
    auto entity_definition = [&](const std::string& id) {
        const Entity* e = snap.entities.find(id);
        if (!e) return std::string("?");
        std::string p = e->first_paragraph.substr(0, 160);
        for (auto& c : p)
            if (c == '\t' || c == '\n') c = ' ';
        return p;
    };

    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    if (stage == "discovery") {
        FosRegistry registry = read_registry_jsonl(cfg.out_dir / "fos_registry.jsonl");
        header = {"concept_id", "provenance", "iteration", "title", "definition"};
        for (const auto& r : registry.records)
            rows.push_back({r.id, provenance_name(r.provenance), std::to_string(r.iteration),
                            entity_title(r.id), entity_definition(r.id)});
    } else if (stage == "tagging") {
        std::vector<TagPair> tags = read_tags_tsv(cfg.out_dir / "tags.tsv");
        header = {"doc_id", "doc_title", "concept_id", "concept_title", "concept_definition",
                  "confidence"};
        for (const auto& t : tags) {
            const Document* d = snap.documents.find(t.doc_id);
            rows.push_back({t.doc_id, d ? d->title : "?", t.concept_id, entity_title(t.concept_id),
                            entity_definition(t.concept_id), format_fixed6(t.confidence)});
        }
    } else if (stage == "hierarchy") {
        LeveledDag dag =
            read_hierarchy(cfg.out_dir / "hierarchy.tsv", cfg.out_dir / "levels.tsv");
        header = {"child_id", "child_title", "child_definition", "parent_id", "parent_title",
                  "parent_definition", "rc"};
        for (const auto& e : dag.edges)
            rows.push_back({e.child, entity_title(e.child), entity_definition(e.child), e.parent,
                            entity_title(e.parent), entity_definition(e.parent),
                            format_fixed6(e.rc)});
    } else {
        throw std::runtime_error("unknown eval stage: " + stage +
                                 " (expected discovery, tagging, or hierarchy)");
    }

    size_t n = rows.size();
    size_t take = std::min(n, target);
    if (n < target)
        log << "warning: stage '" << stage << "' has only " << n << " rows; sampling all of them\n";

    Rng rng(combine_seed(seed, stage));
    auto picks = rng.sample_indices(n, take);

    auto dir = cfg.out_dir / "samples";
    std::filesystem::create_directories(dir);
    size_t per_group = (take + groups - 1) / groups;
    size_t written = 0;
    for (size_t g = 0; g < groups; ++g) {
        size_t begin = g * per_group;
        if (begin >= take) break;
        size_t end = std::min(take, begin + per_group);
        std::string out;
        for (size_t h = 0; h < header.size(); ++h) {
            if (h) out.push_back('\t');
            out += header[h];
        }
        out.push_back('\n');
        for (size_t k = begin; k < end; ++k) {
            const auto& row = rows[picks[k]];
            for (size_t h = 0; h < row.size(); ++h) {
                if (h) out.push_back('\t');
                out += row[h];
            }
            out.push_back('\n');
        }
        write_file(dir / (stage + "_group" + std::to_string(g + 1) + ".tsv"), out);
        ++written;
    }
    log << "sampled " << take << " " << stage << " rows into " << written << " groups\n";
    return written;
}

}  // namespace fos
