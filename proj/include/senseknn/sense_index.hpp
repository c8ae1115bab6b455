#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "senseknn/corpus.hpp"
#include "senseknn/vectors.hpp"

namespace senseknn {

/// One labelled training vector.
struct IndexEntry {
    Vector vector;
    std::string sense;
    InstanceKey provenance;

    bool operator==(const IndexEntry&) const = default;
};

/// All training entries of one word key plus their sense histogram.
struct Bucket {
    std::vector<IndexEntry> entries;
    std::map<std::string, std::size_t> sense_counts;

    bool operator==(const Bucket&) const = default;
};

/// A ranked neighbor: position of the entry within its bucket plus the
/// label, provenance and distance copied out for reporting.
struct Neighbor {
    std::size_t entry = 0;
    std::string sense;
    InstanceKey provenance;
    double distance = 0.0;

    bool operator==(const Neighbor&) const = default;
};

enum class Method { Knn, Mfs, MfsBackoff, Abstain };
enum class Backoff { None, GlobalMfs };

std::string_view to_string(Method method);
std::string_view to_string(Backoff backoff);
/// Accepts "none" and "mfs".
std::optional<Backoff> parse_backoff(std::string_view text);

struct Prediction {
    std::optional<std::string> sense;
    /// Size of the vote set for Knn; 0 otherwise.
    std::size_t k_used = 0;
    /// The vote set (Knn) ranked by distance, then provenance.
    std::vector<Neighbor> neighbors;
    Method method = Method::Abstain;

    bool operator==(const Prediction&) const = default;
};

/// Localized nearest-neighbor sense index: one bucket of training vectors per
/// target word, searched exhaustively.
class SenseIndex {
public:
    SenseIndex(std::size_t dim, Keying keying);

    std::size_t dim() const noexcept { return dim_; }
    Keying keying() const noexcept { return keying_; }
    const std::map<WordKey, Bucket>& buckets() const noexcept { return buckets_; }
    const Bucket* find(const WordKey& key) const;
    bool contains(const WordKey& key) const { return find(key) != nullptr; }
    std::size_t entry_count() const noexcept { return entry_count_; }

    /// Throws DimensionError on a vector of the wrong length and Error on a
    /// provenance key that is already indexed.
    void add(const WordKey& key, IndexEntry entry);

    /// min(k, smallest per-sense count of the key). Throws LookupError when
    /// the key is absent.
    std::size_t effective_k(const WordKey& key, std::size_t k) const;

    /// Every entry of the key's bucket sorted by (distance, provenance).
    std::vector<Neighbor> rank(const WordKey& key, VectorView query) const;

    /// The min(n, bucket size) nearest entries. Throws LookupError when absent.
    std::vector<Neighbor> neighbors(const WordKey& key, VectorView query, std::size_t n) const;

    /// k'-balanced plurality vote. Ties go to the smaller summed distance of
    /// the voting neighbors, then the lexicographically smaller sense key.
    Prediction classify(const WordKey& key, VectorView query, std::size_t k,
                        Backoff backoff = Backoff::None) const;

    /// Vote over an already ranked bucket; `ranked` must come from rank(key, ...).
    Prediction vote(const WordKey& key, const std::vector<Neighbor>& ranked, std::size_t k) const;

    /// Most frequent training sense of the key, or of the whole training set
    /// when the key is unknown. Abstains only on an empty index.
    Prediction mfs_predict(const WordKey& key) const;

    /// Most frequent sense over all buckets (ties: smallest key).
    std::optional<std::string> global_mfs() const;

    bool operator==(const SenseIndex& other) const {
        return dim_ == other.dim_ && keying_ == other.keying_ && buckets_ == other.buckets_;
    }

private:
    std::size_t dim_;
    Keying keying_;
    std::map<WordKey, Bucket> buckets_;
    std::map<std::string, std::size_t> global_counts_;
    std::map<std::string, std::size_t> provenance_;
    std::size_t entry_count_ = 0;
};

struct BuildReport {
    std::size_t indexed = 0;
    std::vector<InstanceKey> missing_vectors;
};

/// Indexes every annotated training instance that has a vector in `store`,
/// labelled with its first sense key.
SenseIndex build_index(const Corpus& train, const VectorStore& store, Keying keying,
                       BuildReport* report = nullptr);

/// Adds another corpus to an existing index. Throws DimensionError when the
/// store dimension differs from the index.
BuildReport extend_index(SenseIndex& index, const Corpus& train, const VectorStore& store);

/// "SKNNIDX1", one JSON metadata line, then a CWE1 block of entry vectors.
std::string save_index(const SenseIndex& index);
SenseIndex load_index(std::string_view bytes);

}  // namespace senseknn
