#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "senseknn/corpus.hpp"
#include "senseknn/sense_index.hpp"
#include "senseknn/vectors.hpp"

namespace senseknn {

struct Counts {
    std::size_t attempted = 0;
    std::size_t correct = 0;
    std::size_t total = 0;

    bool operator==(const Counts&) const = default;
};

struct EvalResult {
    std::size_t attempted = 0;
    std::size_t correct = 0;
    std::size_t total = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::map<Pos, Counts> per_pos;
    /// Gold instances that received no prediction at all (no vector).
    std::size_t missing_vectors = 0;
    /// Gold instances whose prediction was an explicit abstention.
    std::size_t abstained = 0;

    bool operator==(const EvalResult&) const = default;
};

struct SweepResult {
    std::vector<std::pair<std::size_t, EvalResult>> rows;
};

struct GoldInstance {
    InstanceKey key;
    std::vector<std::string> senses;
    std::optional<Pos> pos;
};

struct SystemAnswer {
    InstanceKey key;
    std::optional<std::string> sense;
};

/// Gold annotations of every annotated token of a corpus.
std::vector<GoldInstance> gold_from_corpus(const Corpus& corpus);

/// Precision/recall/F1 of `answers` against `gold`. An answer is correct when
/// its sense is any of the gold keys. Throws LookupError for an answer to an
/// unknown instance and Error for two answers to the same instance.
EvalResult score(const std::vector<SystemAnswer>& answers, const std::vector<GoldInstance>& gold);

/// Classifies every annotated test instance that has a vector and scores the
/// result; instances without a vector count as missing.
EvalResult evaluate(const SenseIndex& index, const Corpus& test, const VectorStore& test_store,
                    std::size_t k, Backoff backoff, Keying keying);

/// evaluate() for each k in ascending `ks`, ranking each instance only once.
SweepResult sweep_k(const SenseIndex& index, const Corpus& test, const VectorStore& test_store,
                    const std::vector<std::size_t>& ks, Backoff backoff, Keying keying);

/// Most-frequent-sense baseline; needs no vectors.
EvalResult evaluate_mfs(const SenseIndex& index, const Corpus& test, Keying keying);

/// 1..10, 50, 100, 500, 1000.
std::vector<std::size_t> default_k_grid();

enum class TableFormat { Tsv, Markdown };

std::optional<TableFormat> parse_table_format(std::string_view text);

/// Percentages with two decimals, e.g. 0.761 -> "76.10".
std::string percent(double fraction);

std::string render_table(const EvalResult& result, TableFormat format);

/// One row per k; `mfs`, when given, is appended as a row labelled "MFS".
std::string render_table(const SweepResult& sweep, TableFormat format, const EvalResult* mfs = nullptr);

}  // namespace senseknn
