#include "fos/relatedness.hpp"

#include <algorithm>
#include <cmath>

#include "fos/util.hpp"

namespace fos {

namespace {

size_t intersection_size(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    size_t n = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

double closeness_from_counts(size_t size_a, size_t size_b, size_t inter, size_t total) {
    if (inter == 0) return 0.0;
    size_t hi = std::max(size_a, size_b);
    size_t lo = std::min(size_a, size_b);
    double num = std::log(static_cast<double>(hi)) - std::log(static_cast<double>(inter));
    if (num <= 0.0) return 1.0;  // identical in-link sets
    double den = std::log(static_cast<double>(total)) - std::log(static_cast<double>(lo));
    double score = 1.0 - num / den;
    if (score < 0.0) return 0.0;
    if (score > 1.0) return 1.0;
    return score;
}

}  // namespace

LinkIndex LinkIndex::build(const CorpusSnapshot& snap) {
    LinkIndex idx;
    size_t n = snap.entities.size();
    idx.ids_.reserve(n);
    for (const Entity& e : snap.entities) {
        idx.id_to_idx_.emplace(e.id, static_cast<uint32_t>(idx.ids_.size()));
        idx.ids_.push_back(e.id);
    }
    idx.in_links_.resize(n);
    idx.out_links_.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const Entity& e = snap.entities.at(i);
        auto& in = idx.in_links_[i];
        in.reserve(e.in_links.size());
        for (const auto& src : e.in_links) in.push_back(idx.id_to_idx_.at(src));
        std::sort(in.begin(), in.end());
        auto& out = idx.out_links_[i];
        for (const auto& dst : e.out_links) {
            auto it = idx.id_to_idx_.find(dst);
            if (it != idx.id_to_idx_.end()) out.push_back(it->second);
        }
        std::sort(out.begin(), out.end());
    }
    idx.by_id_.resize(n);
    for (uint32_t i = 0; i < n; ++i) idx.by_id_[i] = i;
    std::sort(idx.by_id_.begin(), idx.by_id_.end(),
              [&](uint32_t a, uint32_t b) { return idx.ids_[a] < idx.ids_[b]; });
    idx.id_rank_.resize(n);
    for (uint32_t r = 0; r < n; ++r) idx.id_rank_[idx.by_id_[r]] = r;
    return idx;
}

uint32_t LinkIndex::index_of(std::string_view id) const {
    auto it = id_to_idx_.find(std::string(id));
    if (it == id_to_idx_.end()) throw std::runtime_error("unknown entity id: " + std::string(id));
    return it->second;
}

double LinkIndex::closeness(uint32_t a, uint32_t b) const {
    const auto& la = in_links_[a];
    const auto& lb = in_links_[b];
    if (la.empty() || lb.empty()) return 0.0;
    size_t inter = (a == b) ? la.size() : intersection_size(la, lb);
    return closeness_from_counts(la.size(), lb.size(), inter, entity_count());
}

std::vector<std::pair<uint32_t, double>> LinkIndex::top_n(uint32_t e, size_t n) const {
    size_t total = entity_count();
    if (n == 0 || total <= 1) return {};

    // Only entities sharing an in-link with e can score above zero; find them
    // through the out-lists of e's in-linkers.
    std::vector<size_t> shared(total, 0);
    std::vector<uint32_t> touched;
    for (uint32_t z : in_links_[e]) {
        for (uint32_t t : out_links_[z]) {
            if (t == e) continue;
            if (shared[t]++ == 0) touched.push_back(t);
        }
    }

    std::vector<std::pair<uint32_t, double>> scored;
    scored.reserve(touched.size());
    size_t size_e = in_links_[e].size();
    for (uint32_t t : touched) {
        double s = closeness_from_counts(size_e, in_links_[t].size(), shared[t], total);
        if (s > 0.0) scored.push_back({t, s});
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return id_rank_[x.first] < id_rank_[y.first];
    });
    if (scored.size() > n) {
        scored.resize(n);
        return scored;
    }

    // Pad with zero-score entities in id order.
    std::vector<char> used(total, 0);
    used[e] = 1;
    for (const auto& [t, s] : scored) used[t] = 1;
    for (uint32_t r = 0; r < total && scored.size() < n; ++r) {
        uint32_t t = by_id_[r];
        if (!used[t]) scored.push_back({t, 0.0});
    }
    return scored;
}

LinkIndex build_link_index(const CorpusSnapshot& snap) { return LinkIndex::build(snap); }

double semantic_closeness(const LinkIndex& index, std::string_view a, std::string_view b) {
    return index.closeness(index.index_of(a), index.index_of(b));
}

std::vector<std::pair<std::string, double>> top_n_neighbors(const LinkIndex& index,
                                                            std::string_view e, size_t n) {
    auto raw = index.top_n(index.index_of(e), n);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(raw.size());
    for (const auto& [idx, score] : raw) out.emplace_back(index.id_of(idx), score);
    return out;
}

void dump_top_n_tsv(const LinkIndex& index, size_t n, std::ostream& out) {
    std::vector<uint32_t> order(index.entity_count());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return index.id_of(a) < index.id_of(b); });
    for (uint32_t e : order)
        for (const auto& [t, score] : index.top_n(e, n))
            out << index.id_of(e) << '\t' << index.id_of(t) << '\t' << format_fixed6(score)
                << '\n';
}

}  // namespace fos
