#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace senseknn {

using Vector = std::vector<float>;
using VectorView = std::span<const float>;

/// Instance-keyed embedding vectors of one fixed dimension.
///
/// Components are held as the exact 32-bit values of the on-disk format, so
/// read/write round-trips are lossless. Arithmetic on them happens in double.
class VectorStore {
public:
    explicit VectorStore(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return keys_.size(); }
    bool empty() const noexcept { return keys_.empty(); }

    /// Throws DimensionError on a length mismatch, DomainError on a non-finite
    /// component and Error on a duplicate key.
    void insert(std::string key, VectorView values);

    /// The stored vector, or nullopt when the key is unknown.
    std::optional<VectorView> lookup(std::string_view key) const;
    bool contains(std::string_view key) const { return index_.count(std::string(key)) != 0; }

    /// Keys in insertion order.
    const std::vector<std::string>& keys() const noexcept { return keys_; }

    /// Same dimension and the same key to vector mapping, regardless of order.
    bool operator==(const VectorStore& other) const;

private:
    std::size_t dim_;
    std::vector<std::string> keys_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Parses the CWE1 binary format:
///   "CWE1" | u32 dim | u64 count | count x (u16 key_len | key | dim x f32)
/// all little-endian.
VectorStore read_store(std::string_view bytes);

/// Serializes with keys in lexicographic byte order.
std::string write_store(const VectorStore& store);

VectorStore load_store(const std::string& path);
void save_store(const std::string& path, const VectorStore& store);

/// 1 - u.v / (|u| |v|), accumulated left to right in double and clamped to
/// [0, 2]. Identical vectors give exactly 0.
double cosine_distance(VectorView u, VectorView v);

}  // namespace senseknn
