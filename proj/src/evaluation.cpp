#include "senseknn/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "senseknn/error.hpp"

namespace senseknn {

namespace {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Prf prf(std::size_t correct, std::size_t attempted, std::size_t total) {
    Prf r;
    r.precision = attempted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(attempted);
    r.recall = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    const double sum = r.precision + r.recall;
    r.f1 = sum == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / sum;
    return r;
}

void check_eval_inputs(const SenseIndex& index, const VectorStore& test_store, Keying keying) {
    if (index.keying() != keying) {
        throw Error("index keying '" + std::string(to_string(index.keying())) +
                    "' does not match requested keying '" + std::string(to_string(keying)) + "'");
    }
    if (index.dim() != test_store.dim()) {
        throw DimensionError("test vectors have dimension " + std::to_string(test_store.dim()) +
                             ", index dimension is " + std::to_string(index.dim()));
    }
}

}  // namespace

std::vector<GoldInstance> gold_from_corpus(const Corpus& corpus) {
    std::vector<GoldInstance> gold;
    for (auto& inst : annotated_instances(corpus)) {
        GoldInstance g{std::move(inst.key), {}, inst.pos};
        for (const auto& s : inst.senses) {
            g.senses.push_back(s.str());
        }
        gold.push_back(std::move(g));
    }
    return gold;
}

EvalResult score(const std::vector<SystemAnswer>& answers, const std::vector<GoldInstance>& gold) {
    std::unordered_map<std::string, std::size_t> gold_at;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (!gold_at.emplace(gold[i].key.str(), i).second) {
            throw Error("duplicate gold instance '" + gold[i].key.str() + "'");
        }
    }

    EvalResult r;
    r.total = gold.size();
    std::vector<bool> answered(gold.size(), false);
    for (const auto& g : gold) {
        ++r.per_pos[g.pos.value_or(Pos::Other)].total;
    }
    for (const auto& a : answers) {
        auto it = gold_at.find(a.key.str());
        if (it == gold_at.end()) {
            throw LookupError("prediction for unknown instance '" + a.key.str() + "'");
        }
        if (answered[it->second]) {
            throw Error("two predictions for instance '" + a.key.str() + "'");
        }
        answered[it->second] = true;
        const GoldInstance& g = gold[it->second];
        if (!a.sense) {
            ++r.abstained;
            continue;
        }
        Counts& c = r.per_pos[g.pos.value_or(Pos::Other)];
        ++r.attempted;
        ++c.attempted;
        if (std::find(g.senses.begin(), g.senses.end(), *a.sense) != g.senses.end()) {
            ++r.correct;
            ++c.correct;
        }
    }
    r.missing_vectors = r.total - r.attempted - r.abstained;
    const Prf m = prf(r.correct, r.attempted, r.total);
    r.precision = m.precision;
    r.recall = m.recall;
    r.f1 = m.f1;
    return r;
}

EvalResult evaluate(const SenseIndex& index, const Corpus& test, const VectorStore& test_store,
                    std::size_t k, Backoff backoff, Keying keying) {
    check_eval_inputs(index, test_store, keying);
    std::vector<SystemAnswer> answers;
    for (const auto& inst : annotated_instances(test)) {
        auto vec = test_store.lookup(inst.key.str());
        if (!vec) {
            continue;
        }
        Prediction p = index.classify(inst.word_key(keying), *vec, k, backoff);
        answers.push_back({inst.key, std::move(p.sense)});
    }
    return score(answers, gold_from_corpus(test));
}

SweepResult sweep_k(const SenseIndex& index, const Corpus& test, const VectorStore& test_store,
                    const std::vector<std::size_t>& ks, Backoff backoff, Keying keying) {
    if (ks.empty()) {
        throw Error("k list is empty");
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1 || (i > 0 && ks[i] <= ks[i - 1])) {
            throw Error("k list must be strictly ascending values >= 1");
        }
    }
    check_eval_inputs(index, test_store, keying);

    std::vector<std::vector<SystemAnswer>> answers(ks.size());
    for (const auto& inst : annotated_instances(test)) {
        auto vec = test_store.lookup(inst.key.str());
        if (!vec) {
            continue;
        }
        const WordKey key = inst.word_key(keying);
        if (!index.contains(key)) {
            const Prediction p = index.classify(key, *vec, ks.front(), backoff);
            for (auto& per_k : answers) {
                per_k.push_back({inst.key, p.sense});
            }
            continue;
        }
        const auto ranked = index.rank(key, *vec);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            answers[i].push_back({inst.key, index.vote(key, ranked, ks[i]).sense});
        }
    }

    const auto gold = gold_from_corpus(test);
    SweepResult sweep;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        sweep.rows.emplace_back(ks[i], score(answers[i], gold));
    }
    return sweep;
}

EvalResult evaluate_mfs(const SenseIndex& index, const Corpus& test, Keying keying) {
    if (index.keying() != keying) {
        throw Error("index keying does not match requested keying");
    }
    std::vector<SystemAnswer> answers;
    for (const auto& inst : annotated_instances(test)) {
        answers.push_back({inst.key, index.mfs_predict(inst.word_key(keying)).sense});
    }
    return score(answers, gold_from_corpus(test));
}

std::vector<std::size_t> default_k_grid() {
    return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 100, 500, 1000};
}

std::optional<TableFormat> parse_table_format(std::string_view text) {
    if (text == "tsv") {
        return TableFormat::Tsv;
    }
    if (text == "md" || text == "markdown") {
        return TableFormat::Markdown;
    }
    return std::nullopt;
}

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", fraction * 100.0);
    return buf;
}

namespace {

using Row = std::vector<std::string>;

std::string emit(const Row& header, const std::vector<Row>& rows, TableFormat format) {
    std::string out;
    auto line = [&](const Row& cells) {
        if (format == TableFormat::Tsv) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out += (i == 0 ? "" : "\t") + cells[i];
            }
        } else {
            out += "|";
            for (const auto& c : cells) {
                out += " " + c + " |";
            }
        }
        out += '\n';
    };
    line(header);
    if (format == TableFormat::Markdown) {
        out += "|";
        for (std::size_t i = 0; i < header.size(); ++i) {
            out += i == 0 ? " --- |" : " ---: |";
        }
        out += '\n';
    }
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

Row result_row(std::string label, std::size_t attempted, std::size_t correct, std::size_t total,
               std::string abstained, std::string missing) {
    const Prf m = prf(correct, attempted, total);
    return {std::move(label),      percent(m.precision),      percent(m.recall),
            percent(m.f1),         std::to_string(attempted), std::to_string(correct),
            std::to_string(total), std::move(abstained),      std::move(missing)};
}

Row result_row(std::string label, const EvalResult& r) {
    return result_row(std::move(label), r.attempted, r.correct, r.total, std::to_string(r.abstained),
                      std::to_string(r.missing_vectors));
}

const Row kColumns = {"P", "R", "F1", "attempted", "correct", "total", "abstained", "missing"};

Row header_with(std::string first) {
    Row h{std::move(first)};
    h.insert(h.end(), kColumns.begin(), kColumns.end());
    return h;
}

}  // namespace

std::string render_table(const EvalResult& result, TableFormat format) {
    std::vector<Row> rows{result_row("all", result)};
    for (const auto& [pos, c] : result.per_pos) {
        rows.push_back(result_row(std::string(to_string(pos)), c.attempted, c.correct, c.total, "-", "-"));
    }
    return emit(header_with("subset"), rows, format);
}

std::string render_table(const SweepResult& sweep, TableFormat format, const EvalResult* mfs) {
    std::vector<Row> rows;
    for (const auto& [k, r] : sweep.rows) {
        rows.push_back(result_row(std::to_string(k), r));
    }
    if (mfs != nullptr) {
        rows.push_back(result_row("MFS", *mfs));
    }
    return emit(header_with("k"), rows, format);
}

}  // namespace senseknn
