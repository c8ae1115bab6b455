#include "senseknn/sense_index.hpp"

#include <algorithm>
#include <cstdint>

#include "json.hpp"
#include "senseknn/error.hpp"

namespace senseknn {

namespace {

constexpr std::string_view kIndexMagic = "SKNNIDX1";
constexpr int kIndexVersion = 1;

void require_k(std::size_t k) {
    if (k < 1) {
        throw DomainError("k must be at least 1");
    }
}

std::string_view best_of(const std::map<std::string, std::size_t>& counts) {
    std::string_view best;
    std::size_t best_count = 0;
    for (const auto& [sense, n] : counts) {
        if (n > best_count) {
            best = sense;
            best_count = n;
        }
    }
    return best;
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Knn: return "knn";
        case Method::Mfs: return "mfs";
        case Method::MfsBackoff: return "mfs-backoff";
        case Method::Abstain: return "abstain";
    }
    return "abstain";
}

std::string_view to_string(Backoff backoff) {
    return backoff == Backoff::None ? "none" : "mfs";
}

std::optional<Backoff> parse_backoff(std::string_view text) {
    if (text == "none") {
        return Backoff::None;
    }
    if (text == "mfs") {
        return Backoff::GlobalMfs;
    }
    return std::nullopt;
}

SenseIndex::SenseIndex(std::size_t dim, Keying keying) : dim_(dim), keying_(keying) {
    if (dim == 0) {
        throw DimensionError("index dimension must be at least 1");
    }
}

const Bucket* SenseIndex::find(const WordKey& key) const {
    auto it = buckets_.find(key);
    return it == buckets_.end() ? nullptr : &it->second;
}

void SenseIndex::add(const WordKey& key, IndexEntry entry) {
    if (entry.vector.size() != dim_) {
        throw DimensionError("entry '" + entry.provenance.str() + "' has dimension " +
                             std::to_string(entry.vector.size()) + ", index dimension is " +
                             std::to_string(dim_));
    }
    if ((keying_ == Keying::LemmaPos) != key.pos.has_value()) {
        throw Error("word key '" + key.str() + "' does not match the index keying '" +
                    std::string(to_string(keying_)) + "'");
    }
    auto [slot, fresh] = provenance_.try_emplace(entry.provenance.str(), entry_count_);
    if (!fresh) {
        throw Error("instance '" + entry.provenance.str() + "' is already indexed");
    }
    Bucket& bucket = buckets_[key];
    ++bucket.sense_counts[entry.sense];
    ++global_counts_[entry.sense];
    bucket.entries.push_back(std::move(entry));
    ++entry_count_;
}

std::size_t SenseIndex::effective_k(const WordKey& key, std::size_t k) const {
    require_k(k);
    const Bucket* bucket = find(key);
    if (bucket == nullptr) {
        throw LookupError("word '" + key.str() + "' is not in the index");
    }
    std::size_t c_min = bucket->entries.size();
    for (const auto& [sense, n] : bucket->sense_counts) {
        c_min = std::min(c_min, n);
    }
    return std::min(k, c_min);
}

std::vector<Neighbor> SenseIndex::rank(const WordKey& key, VectorView query) const {
    if (query.size() != dim_) {
        throw DimensionError("query has dimension " + std::to_string(query.size()) +
                             ", index dimension is " + std::to_string(dim_));
    }
    const Bucket* bucket = find(key);
    if (bucket == nullptr) {
        throw LookupError("word '" + key.str() + "' is not in the index");
    }
    std::vector<Neighbor> ranked;
    ranked.reserve(bucket->entries.size());
    for (std::size_t i = 0; i < bucket->entries.size(); ++i) {
        const IndexEntry& e = bucket->entries[i];
        ranked.push_back({i, e.sense, e.provenance, cosine_distance(query, e.vector)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) {
            return a.distance < b.distance;
        }
        return a.provenance.str() < b.provenance.str();
    });
    return ranked;
}

std::vector<Neighbor> SenseIndex::neighbors(const WordKey& key, VectorView query, std::size_t n) const {
    require_k(n);
    auto ranked = rank(key, query);
    ranked.resize(std::min(n, ranked.size()));
    return ranked;
}

Prediction SenseIndex::vote(const WordKey& key, const std::vector<Neighbor>& ranked, std::size_t k) const {
    const std::size_t k_used = std::min(effective_k(key, k), ranked.size());
    if (k_used == 0) {
        throw Error("empty neighbor ranking for '" + key.str() + "'");
    }
    struct Tally {
        std::size_t votes = 0;
        double distance = 0.0;
    };
    std::map<std::string_view, Tally> tally;
    for (std::size_t i = 0; i < k_used; ++i) {
        Tally& t = tally[ranked[i].sense];
        ++t.votes;
        t.distance += ranked[i].distance;
    }
    // std::map iterates senses in lexicographic order; only strictly better
    // candidates replace the incumbent.
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        const Tally& c = it->second;
        const Tally& b = best->second;
        if (c.votes > b.votes || (c.votes == b.votes && c.distance < b.distance)) {
            best = it;
        }
    }
    Prediction p;
    p.sense = std::string(best->first);
    p.k_used = k_used;
    p.neighbors.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k_used));
    p.method = Method::Knn;
    return p;
}

Prediction SenseIndex::classify(const WordKey& key, VectorView query, std::size_t k, Backoff backoff) const {
    require_k(k);
    if (query.size() != dim_) {
        throw DimensionError("query has dimension " + std::to_string(query.size()) +
                             ", index dimension is " + std::to_string(dim_));
    }
    if (!contains(key)) {
        Prediction p;
        if (backoff == Backoff::GlobalMfs) {
            p.sense = global_mfs();
            p.method = p.sense ? Method::MfsBackoff : Method::Abstain;
        }
        return p;
    }
    return vote(key, rank(key, query), k);
}

std::optional<std::string> SenseIndex::global_mfs() const {
    if (global_counts_.empty()) {
        return std::nullopt;
    }
    return std::string(best_of(global_counts_));
}

Prediction SenseIndex::mfs_predict(const WordKey& key) const {
    Prediction p;
    if (const Bucket* bucket = find(key)) {
        p.sense = std::string(best_of(bucket->sense_counts));
        p.method = Method::Mfs;
    } else if (auto global = global_mfs()) {
        p.sense = std::move(global);
        p.method = Method::MfsBackoff;
    }
    return p;
}

BuildReport extend_index(SenseIndex& index, const Corpus& train, const VectorStore& store) {
    if (store.dim() != index.dim()) {
        throw DimensionError("vector store dimension " + std::to_string(store.dim()) +
                             " does not match index dimension " + std::to_string(index.dim()));
    }
    BuildReport report;
    for (auto& inst : annotated_instances(train)) {
        auto vec = store.lookup(inst.key.str());
        if (!vec) {
            report.missing_vectors.push_back(std::move(inst.key));
            continue;
        }
        index.add(inst.word_key(index.keying()),
                  IndexEntry{Vector(vec->begin(), vec->end()), inst.sense().str(), inst.key});
        ++report.indexed;
    }
    return report;
}

SenseIndex build_index(const Corpus& train, const VectorStore& store, Keying keying, BuildReport* report) {
    SenseIndex index(store.dim(), keying);
    BuildReport r = extend_index(index, train, store);
    if (report != nullptr) {
        *report = std::move(r);
    }
    return index;
}

std::string save_index(const SenseIndex& index) {
    using nlohmann::ordered_json;
    ordered_json meta;
    meta["version"] = kIndexVersion;
    meta["keying"] = std::string(to_string(index.keying()));
    meta["dim"] = index.dim();
    ordered_json buckets = ordered_json::array();
    VectorStore vectors(index.dim());
    for (const auto& [key, bucket] : index.buckets()) {
        ordered_json b;
        b["lemma"] = key.lemma;
        b["pos"] = key.pos ? ordered_json(std::string(to_string(*key.pos))) : ordered_json(nullptr);
        ordered_json entries = ordered_json::array();
        for (const auto& e : bucket.entries) {
            entries.push_back(ordered_json::array({e.provenance.str(), e.sense}));
            vectors.insert(e.provenance.str(), e.vector);
        }
        b["entries"] = std::move(entries);
        buckets.push_back(std::move(b));
    }
    meta["buckets"] = std::move(buckets);

    std::string out(kIndexMagic);
    out += meta.dump();
    out += '\n';
    out += write_store(vectors);
    return out;
}

SenseIndex load_index(std::string_view bytes) {
    using nlohmann::json;
    if (bytes.substr(0, kIndexMagic.size()) != kIndexMagic) {
        throw FormatError("not a sense index file (bad magic)");
    }
    bytes.remove_prefix(kIndexMagic.size());
    const std::size_t eol = bytes.find('\n');
    if (eol == std::string_view::npos) {
        throw FormatError("sense index metadata line is not terminated");
    }
    json meta;
    try {
        meta = json::parse(bytes.substr(0, eol));
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("sense index metadata: ") + e.what());
    }
    const VectorStore vectors = read_store(bytes.substr(eol + 1));

    try {
        if (meta.at("version").get<int>() != kIndexVersion) {
            throw FormatError("unsupported sense index version " + meta.at("version").dump());
        }
        auto keying = parse_keying(meta.at("keying").get<std::string>());
        if (!keying) {
            throw FormatError("unknown keying " + meta.at("keying").dump());
        }
        const auto dim = meta.at("dim").get<std::size_t>();
        if (dim != vectors.dim()) {
            throw FormatError("metadata dimension " + std::to_string(dim) +
                              " does not match vector block dimension " + std::to_string(vectors.dim()));
        }
        SenseIndex index(dim, *keying);
        for (const auto& b : meta.at("buckets")) {
            WordKey key{b.at("lemma").get<std::string>(), std::nullopt};
            if (!b.at("pos").is_null()) {
                key.pos = parse_pos_name(b.at("pos").get<std::string>());
                if (!key.pos) {
                    throw FormatError("unknown POS " + b.at("pos").dump());
                }
            }
            if (b.at("entries").empty()) {
                throw FormatError("bucket '" + key.str() + "' has no entries");
            }
            for (const auto& e : b.at("entries")) {
                const auto prov = e.at(0).get<std::string>();
                auto vec = vectors.lookup(prov);
                if (!vec) {
                    throw FormatError("no vector for indexed instance '" + prov + "'");
                }
                index.add(key, IndexEntry{Vector(vec->begin(), vec->end()), e.at(1).get<std::string>(),
                                          InstanceKey::parse(prov)});
            }
        }
        if (index.entry_count() != vectors.size()) {
            throw FormatError("vector block holds " + std::to_string(vectors.size()) +
                              " records but the manifest lists " + std::to_string(index.entry_count()));
        }
        return index;
    } catch (const json::exception& e) {
        throw FormatError(std::string("sense index metadata: ") + e.what());
    }
}

}  // namespace senseknn
