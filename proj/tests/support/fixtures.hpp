#pragma once

// Synthetic corpora and vector stores shared by the unit and acceptance suites.

#include <cstdint>
#include <cstring>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "senseknn/corpus.hpp"
#include "senseknn/vectors.hpp"

namespace fixtures {

/// One-token sentence "<id>" whose single token is `lemma` annotated with `sense`.
inline senseknn::Sentence single(const std::string& id, const std::string& lemma, const std::string& sense,
                                 std::optional<senseknn::Pos> pos = senseknn::Pos::Noun) {
    senseknn::Token t{lemma, lemma, pos, {senseknn::SenseKey(sense)}};
    return senseknn::Sentence{id, {t}};
}

struct Labelled {
    senseknn::Corpus corpus;
    senseknn::VectorStore store;
};

/// Two senses of "bank" drawn from isotropic unit Gaussians in `dim`
/// dimensions whose centers lie `separation` apart (antipodal about the
/// origin along the first axis).
inline Labelled gaussian_senses(std::uint64_t seed, const std::string& prefix, std::size_t per_sense,
                                double separation, std::size_t dim = 50) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Labelled out{senseknn::Corpus(prefix), senseknn::VectorStore(dim)};
    const char* senses[] = {"bank%1:14:00::", "bank%1:17:01::"};
    for (int s = 0; s < 2; ++s) {
        for (std::size_t i = 0; i < per_sense; ++i) {
            const std::string id = prefix + std::to_string(s) + "_" + std::to_string(i);
            out.corpus.add(single(id, "bank", senses[s]));
            std::vector<float> v(dim);
            for (std::size_t c = 0; c < dim; ++c) {
                v[c] = static_cast<float>(noise(rng));
            }
            v[0] += static_cast<float>((s == 0 ? 0.5 : -0.5) * separation);
            out.store.insert(id + "#0", v);
        }
    }
    return out;
}

/// Little-endian CWE1 encoding written straight from the format description.
inline std::string encode_cwe1(std::uint32_t dim, const std::vector<std::pair<std::string, std::vector<float>>>& recs) {
    std::string out = "CWE1";
    auto put = [&](std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
    };
    put(dim, 4);
    put(recs.size(), 8);
    for (const auto& [key, vec] : recs) {
        put(key.size(), 2);
        out += key;
        for (float f : vec) {
            std::uint32_t bits;
            std::memcpy(&bits, &f, 4);
            put(bits, 4);
        }
    }
    return out;
}

}  // namespace fixtures
