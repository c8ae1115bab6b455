#include "senseknn/vectors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "senseknn/error.hpp"
#include "senseknn/io.hpp"

namespace senseknn {

namespace {

constexpr std::string_view kMagic = "CWE1";
constexpr std::size_t kHeaderSize = 16;

template <typename U>
void put_le(std::string& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
    }
}

template <typename U>
U get_le(std::string_view bytes, std::size_t pos) {
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    return value;
}

}  // namespace

VectorStore::VectorStore(std::size_t dim) : dim_(dim) {
    if (dim == 0 || dim > std::numeric_limits<std::uint32_t>::max()) {
        throw DimensionError("vector store dimension must be in [1, 2^32)");
    }
}

void VectorStore::insert(std::string key, VectorView values) {
    if (values.size() != dim_) {
        throw DimensionError("vector for '" + key + "' has length " + std::to_string(values.size()) +
                             ", store dimension is " + std::to_string(dim_));
    }
    if (!std::all_of(values.begin(), values.end(), [](float x) { return std::isfinite(x); })) {
        throw DomainError("vector for '" + key + "' has a non-finite component");
    }
    if (index_.count(key) != 0) {
        throw Error("duplicate vector key '" + key + "'");
    }
    index_.emplace(key, keys_.size());
    keys_.push_back(std::move(key));
    data_.insert(data_.end(), values.begin(), values.end());
}

std::optional<VectorView> VectorStore::lookup(std::string_view key) const {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return VectorView(data_.data() + it->second * dim_, dim_);
}

bool VectorStore::operator==(const VectorStore& other) const {
    if (dim_ != other.dim_ || size() != other.size()) {
        return false;
    }
    for (const auto& key : keys_) {
        auto mine = lookup(key);
        auto theirs = other.lookup(key);
        if (!theirs || !std::equal(mine->begin(), mine->end(), theirs->begin())) {
            return false;
        }
    }
    return true;
}

VectorStore read_store(std::string_view bytes) {
    if (bytes.size() < kHeaderSize || bytes.substr(0, 4) != kMagic) {
        throw FormatError("not a CWE1 vector store (bad magic or short header)");
    }
    const auto dim = get_le<std::uint32_t>(bytes, 4);
    const auto count = get_le<std::uint64_t>(bytes, 8);
    if (dim == 0) {
        throw FormatError("CWE1 header declares dimension 0");
    }
    VectorStore store(dim);
    std::size_t pos = kHeaderSize;
    std::vector<float> values(dim);
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        auto truncated = [&] {
            return FormatError("truncated CWE1 record " + std::to_string(rec));
        };
        if (bytes.size() - pos < 2) {
            throw truncated();
        }
        const auto key_len = get_le<std::uint16_t>(bytes, pos);
        pos += 2;
        if (bytes.size() - pos < key_len) {
            throw truncated();
        }
        std::string key(bytes.substr(pos, key_len));
        pos += key_len;
        if ((bytes.size() - pos) / 4 < dim) {
            throw truncated();
        }
        for (std::uint32_t i = 0; i < dim; ++i) {
            values[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
            pos += 4;
        }
        if (store.contains(key)) {
            throw FormatError("duplicate key '" + key + "' in CWE1 record " + std::to_string(rec));
        }
        try {
            store.insert(std::move(key), values);
        } catch (const DomainError& e) {
            throw FormatError(std::string(e.what()) + " (record " + std::to_string(rec) + ")");
        }
    }
    if (pos != bytes.size()) {
        throw FormatError("trailing bytes after " + std::to_string(count) + " CWE1 records");
    }
    return store;
}

std::string write_store(const VectorStore& store) {
    std::vector<const std::string*> keys;
    keys.reserve(store.size());
    for (const auto& k : store.keys()) {
        if (k.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw FormatError("key of " + std::to_string(k.size()) + " bytes exceeds the 65535-byte limit");
        }
        keys.push_back(&k);
    }
    std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });

    std::string out;
    out.reserve(kHeaderSize + store.size() * (2 + 16 + 4 * store.dim()));
    out.append(kMagic);
    put_le(out, static_cast<std::uint32_t>(store.dim()));
    put_le(out, static_cast<std::uint64_t>(store.size()));
    for (const auto* key : keys) {
        put_le(out, static_cast<std::uint16_t>(key->size()));
        out.append(*key);
        const VectorView v = *store.lookup(*key);
        for (float x : v) {
            put_le(out, std::bit_cast<std::uint32_t>(x));
        }
    }
    return out;
}

VectorStore load_store(const std::string& path) {
    return read_store(read_file(path));
}

void save_store(const std::string& path, const VectorStore& store) {
    write_file(path, write_store(store));
}

double cosine_distance(VectorView u, VectorView v) {
    if (u.size() != v.size()) {
        throw DimensionError("cosine distance of vectors with lengths " + std::to_string(u.size()) +
                             " and " + std::to_string(v.size()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i];
        const double b = v[i];
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if (uu == 0.0 || vv == 0.0) {
        throw DomainError("cosine distance is undefined for a zero vector");
    }
    // sqrt(x * x) == x exactly, so d(u, u) is exactly zero.
    const double d = 1.0 - dot / std::sqrt(uu * vv);
    return std::clamp(d, 0.0, 2.0);
}

}  // namespace senseknn
