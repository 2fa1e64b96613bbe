#include "fos/tagging.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include "fos/util.hpp"

namespace fos {

void ErtWeights::validate() const {
    if (cit < 0.0 || ref < 0.0 || venue < 0.0)
        throw std::runtime_error("tagging: neighbor weights must be non-negative");
}

void TaggingParams::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw std::runtime_error("tagging: theta must be in (0,1)");
    if (candidate_cap < 1) throw std::runtime_error("tagging: candidate_cap must be >= 1");
}

std::string TaggingEngine::srt_text(const Document& doc) {
    std::string text = doc.title;
    for (const auto& k : doc.keywords) {
        text.push_back(' ');
        text += k;
    }
    text.push_back(' ');
    text += doc.abstract;
    return text;
}

TaggingEngine::TaggingEngine(const CorpusSnapshot& snap, const FeatureContext& ctx,
                             const FosRegistry& registry, ErtWeights weights, uint64_t rng_seed)
    : snap_(snap), ctx_(ctx), weights_(weights) {
    weights_.validate();

    doc_srt_.resize(snap.documents.size());
    parallel_for(snap.documents.size(), [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i)
            doc_srt_[i] = ctx_.featurize(srt_text(snap.documents.at(i)));
    });

    // Venue ERT: sampled member-doc SRTs summed onto the venue SRT. The
    // sample stream is derived from the venue id, so results do not depend
    // on processing order.
    venue_ert_.resize(snap.venues.size());
    for (size_t vi = 0; vi < snap.venues.size(); ++vi) {
        const Venue& v = snap.venues.at(vi);
        FeatureVector ert = ctx_.featurize(v.full_name);
        const auto& members = v.member_docs;
        size_t k = std::min(weights_.venue_sample, members.size());
        Rng rng(combine_seed(rng_seed, v.id));
        auto picks = rng.sample_indices(members.size(), k);
        std::sort(picks.begin(), picks.end());  // summation order fixed by doc id
        for (size_t pick : picks) {
            auto di = snap.documents.index_of(members[pick]);
            if (di) add_scaled(ert, doc_srt_[*di], 1.0);
        }
        venue_ert_[vi] = std::move(ert);
    }

    concept_vec_.resize(ctx_.names.column_count());
    for (uint32_t col = 0; col < concept_vec_.size(); ++col) {
        const std::string& id = ctx_.names.column_id(col);
        const Entity* e = snap.entities.find(id);
        FeatureVector vec = ctx_.featurize(e ? e->first_paragraph : std::string());
        auto it = snap.seeds.concept_venue_map.find(id);
        if (it != snap.seeds.concept_venue_map.end()) {
            for (const auto& vid : it->second) {
                auto vi = snap.venues.index_of(vid);
                if (vi) add_scaled(vec, venue_ert_[*vi], 1.0);
            }
        }
        concept_vec_[col] = std::move(vec);
    }

    for (const auto& id : snap.seeds.l0)
        if (auto col = ctx_.names.column_of(id)) l0l1_columns_.push_back(*col);
    for (const auto& id : snap.seeds.l1)
        if (auto col = ctx_.names.column_of(id)) l0l1_columns_.push_back(*col);
    std::sort(l0l1_columns_.begin(), l0l1_columns_.end());
    l0l1_columns_.erase(std::unique(l0l1_columns_.begin(), l0l1_columns_.end()),
                        l0l1_columns_.end());

    for (const auto& id : registry.concept_ids())
        if (!ctx_.names.column_of(id))
            throw std::runtime_error("feature context is missing registry concept '" + id + "'");
}

FeatureVector TaggingEngine::srt_publication(const Document& doc) const {
    return ctx_.featurize(srt_text(doc));
}

FeatureVector TaggingEngine::srt_venue(const Venue& venue) const {
    return ctx_.featurize(venue.full_name);
}

FeatureVector TaggingEngine::srt_concept(const Entity& concept_entity) const {
    return ctx_.featurize(concept_entity.first_paragraph);
}

const FeatureVector& TaggingEngine::venue_ert(const std::string& venue_id) const {
    auto vi = snap_.venues.index_of(venue_id);
    if (!vi) throw std::runtime_error("unknown venue: " + venue_id);
    return venue_ert_[*vi];
}

const FeatureVector& TaggingEngine::concept_vector(const std::string& concept_id) const {
    auto col = ctx_.names.column_of(concept_id);
    if (!col) throw std::runtime_error("unknown concept: " + concept_id);
    return concept_vec_[*col];
}

FeatureVector TaggingEngine::ert_publication(const Document& doc) const {
    auto di = snap_.documents.index_of(doc.id);
    FeatureVector ert = di ? doc_srt_[*di] : srt_publication(doc);

    if (weights_.cit != 0.0) {
        size_t used = 0;
        for (const auto& cid : doc.citations) {  // sorted ascending
            if (used >= weights_.neighbor_cap) break;
            auto ci = snap_.documents.index_of(cid);
            if (!ci) continue;
            add_scaled(ert, doc_srt_[*ci], weights_.cit);
            ++used;
        }
    }
    if (weights_.ref != 0.0) {
        size_t used = 0;
        for (const auto& rid : doc.references) {
            if (used >= weights_.neighbor_cap) break;
            auto ri = snap_.documents.index_of(rid);
            if (!ri) continue;
            add_scaled(ert, doc_srt_[*ri], weights_.ref);
            ++used;
        }
    }
    if (weights_.venue != 0.0 && doc.venue_id) {
        auto vi = snap_.venues.index_of(*doc.venue_id);
        if (vi) add_scaled(ert, venue_ert_[*vi], weights_.venue);
    }
    return ert;
}

std::string TaggingEngine::ert_text(const Document& doc) const {
    std::string text = srt_text(doc);
    size_t used = 0;
    for (const auto& cid : doc.citations) {
        if (used >= weights_.neighbor_cap) break;
        const Document* c = snap_.documents.find(cid);
        if (!c) continue;
        text.push_back(' ');
        text += c->title;
        ++used;
    }
    used = 0;
    for (const auto& rid : doc.references) {
        if (used >= weights_.neighbor_cap) break;
        const Document* r = snap_.documents.find(rid);
        if (!r) continue;
        text.push_back(' ');
        text += r->title;
        ++used;
    }
    if (doc.venue_id) {
        const Venue* v = snap_.venues.find(*doc.venue_id);
        if (v) {
            text.push_back(' ');
            text += v->full_name;
        }
    }
    return text;
}

std::vector<uint32_t> TaggingEngine::candidate_concepts(const Document& doc,
                                                        const TaggingParams& params) const {
    if (params.candidate_cap < l0l1_columns_.size())
        throw std::runtime_error("tagging: candidate_cap must cover all L0 and L1 concepts");
    auto mentions = ctx_.names.spot(ert_text(doc));

    // Spotted concepts ranked by mention count, ties by concept id.
    std::sort(mentions.begin(), mentions.end(), [&](const Mention& a, const Mention& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.entity_id < b.entity_id;
    });

    std::vector<char> taken(ctx_.names.column_count(), 0);
    std::vector<uint32_t> candidates;
    for (uint32_t col : l0l1_columns_) {
        taken[col] = 1;
        candidates.push_back(col);
    }
    for (const auto& m : mentions) {
        if (candidates.size() >= params.candidate_cap) break;
        if (taken[m.column]) continue;
        taken[m.column] = 1;
        candidates.push_back(m.column);
    }
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

std::vector<TagPair> score_tag_pairs(
    const std::string& doc_id, const FeatureVector& doc_ert,
    const std::vector<std::pair<std::string, const FeatureVector*>>& candidates, double theta,
    TaggingStats* stats) {
    std::vector<TagPair> pairs;
    for (const auto& [concept_id, vec] : candidates) {
        double score = cosine(*vec, doc_ert);
        if (stats) ++stats->scored_pairs;
        if (score < theta) continue;
        if (score > 1.0) score = 1.0;
        pairs.push_back({doc_id, concept_id, score});
    }
    std::sort(pairs.begin(), pairs.end(), [](const TagPair& a, const TagPair& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.concept_id < b.concept_id;
    });
    if (stats) stats->emitted_pairs += pairs.size();
    return pairs;
}

std::vector<TagPair> TaggingEngine::tag_document(const Document& doc, const TaggingParams& params,
                                                 TaggingStats* stats) const {
    params.validate();
    auto candidates = candidate_concepts(doc, params);
    FeatureVector ert = ert_publication(doc);

    std::vector<std::pair<std::string, const FeatureVector*>> scored;
    scored.reserve(candidates.size());
    for (uint32_t col : candidates)
        scored.emplace_back(ctx_.names.column_id(col), &concept_vec_[col]);
    if (stats) stats->spotted_candidates += candidates.size();
    return score_tag_pairs(doc.id, ert, scored, params.theta, stats);
}

std::vector<TagPair> TaggingEngine::tag_corpus(const TaggingParams& params,
                                               TaggingStats* stats) const {
    params.validate();
    std::vector<uint32_t> order(snap_.documents.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return snap_.documents.at(a).id < snap_.documents.at(b).id;
    });

    std::vector<std::vector<TagPair>> per_doc(order.size());
    std::vector<TaggingStats> per_chunk_stats;
    std::mutex stats_mutex;
    parallel_for(order.size(), [&](size_t begin, size_t end) {
        TaggingStats local;
        for (size_t i = begin; i < end; ++i)
            per_doc[i] = tag_document(snap_.documents.at(order[i]), params, &local);
        if (stats) {
            std::lock_guard<std::mutex> lock(stats_mutex);
            per_chunk_stats.push_back(local);
        }
    });
    if (stats)
        for (const auto& s : per_chunk_stats) {
            stats->scored_pairs += s.scored_pairs;
            stats->emitted_pairs += s.emitted_pairs;
            stats->spotted_candidates += s.spotted_candidates;
        }

    std::vector<TagPair> all;
    for (auto& pairs : per_doc)
        for (auto& p : pairs) all.push_back(std::move(p));
    return all;
}

void write_tags_tsv(const std::vector<TagPair>& tags, const std::filesystem::path& path) {
    std::string out;
    for (const auto& t : tags) {
        out += t.doc_id;
        out.push_back('\t');
        out += t.concept_id;
        out.push_back('\t');
        out += format_fixed6(t.confidence);
        out.push_back('\n');
    }
    write_file(path, out);
}

std::vector<TagPair> read_tags_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tags file: " + path.string());
    std::vector<TagPair> tags;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        TagPair t;
        std::string conf;
        if (!std::getline(ss, t.doc_id, '\t') || !std::getline(ss, t.concept_id, '\t') ||
            !std::getline(ss, conf))
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": expected doc_id\\tconcept_id\\tconfidence");
        if (!parse_double(conf, t.confidence))
            throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                                     ": bad confidence '" + conf + "'");
        tags.push_back(std::move(t));
    }
    return tags;
}

}  // namespace fos
