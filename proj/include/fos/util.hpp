#pragma once
// Small shared helpers: deterministic hashing and RNG, float formatting,
// line-oriented file IO, and a chunked parallel_for.
//
// Everything here is platform-independent on purpose: pipeline outputs must
// be byte-identical across runs, so no std::random distributions and no
// locale-sensitive formatting are used anywhere.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fos {

// FNV-1a over bytes.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// splitmix64 step; also used to combine seeds.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t combine_seed(uint64_t seed, std::string_view tag) {
    return mix64(seed ^ fnv1a64(tag));
}

// splitmix64 generator. Fully specified, so streams are identical on every
// platform; std::uniform_* distributions are not and must not be used.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Modulo bias is irrelevant here; the sampler is part
    // of the artifact's defined behavior, not a statistical claim.
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // First k elements of a random permutation, order of selection preserved.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        if (k > n) k = n;
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    uint64_t state_;
};

// Fixed-point formatting with 6 decimals, used by every TSV emitter.
std::string format_fixed6(double v);

// Shortest decimal string that round-trips the exact double value.
std::string format_roundtrip(double v);

// Parse a double with std::from_chars; returns false on any trailing junk.
bool parse_double(std::string_view s, double& out);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// 64-bit content hash of a file, hex-encoded. Change detection only.
std::string file_digest(const std::filesystem::path& path);

std::vector<std::string> split_ws(std::string_view s);

// Runs f(begin, end) over chunks of [0, n) on worker threads and joins.
// Callers must write results only to disjoint preallocated slots.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& f);

}  // namespace fos
