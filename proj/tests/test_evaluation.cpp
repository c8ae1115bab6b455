#include <random>

#include "doctest.h"
#include "senseknn/error.hpp"
#include "senseknn/evaluation.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace senseknn;

namespace {

GoldInstance gold(const std::string& key, std::vector<std::string> senses) {
    return GoldInstance{InstanceKey::parse(key), std::move(senses), Pos::Noun};
}

SystemAnswer answer(const std::string& key, std::optional<std::string> sense) {
    return SystemAnswer{InstanceKey::parse(key), std::move(sense)};
}

}  // namespace

TEST_CASE("score: hand arithmetic") {
    SUBCASE("3 gold, 3 predictions, 2 correct") {
        const auto r = score({answer("a#0", "x%1"), answer("b#0", "y%1"), answer("c#0", "q%1")},
                             {gold("a#0", {"x%1"}), gold("b#0", {"y%1"}), gold("c#0", {"z%1"})});
        CHECK(r.precision == doctest::Approx(2.0 / 3.0));
        CHECK(r.recall == doctest::Approx(2.0 / 3.0));
        CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("4 gold, 2 predictions both correct") {
        const auto r = score({answer("a#0", "x%1"), answer("b#0", "y%1")},
                             {gold("a#0", {"x%1"}), gold("b#0", {"y%1"}), gold("c#0", {"z%1"}), gold("d#0", {"z%1"})});
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 0.5);
        CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
        CHECK(r.missing_vectors == 2);
    }
    SUBCASE("any gold key counts") {
        const auto r = score({answer("a#0", "x%2")}, {gold("a#0", {"x%1", "x%2"})});
        CHECK(r.correct == 1);
    }
    SUBCASE("abstentions") {
        const auto r = score({answer("a#0", std::nullopt), answer("b#0", "y%1")},
                             {gold("a#0", {"x%1"}), gold("b#0", {"y%1"})});
        CHECK(r.abstained == 1);
        CHECK(r.attempted == 1);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 0.5);
    }
    SUBCASE("nothing attempted") {
        const auto r = score({}, {gold("a#0", {"x%1"})});
        CHECK(r.precision == 0.0);
        CHECK(r.f1 == 0.0);
    }
}

TEST_CASE("score: errors") {
    CHECK_THROWS_AS(score({answer("z#0", "x%1")}, {gold("a#0", {"x%1"})}), LookupError);
    CHECK_THROWS_AS(score({answer("a#0", "x%1"), answer("a#0", "x%1")}, {gold("a#0", {"x%1"})}), Error);
}

TEST_CASE("property: score agrees with an independent scorer and is order-free") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = rng() % 30;
        std::vector<GoldInstance> g;
        std::map<std::string, std::set<std::string>> g_oracle;
        std::vector<SystemAnswer> a;
        std::map<std::string, std::optional<std::string>> a_oracle;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string key = "s" + std::to_string(i) + "#" + std::to_string(rng() % 3);
            std::vector<std::string> senses{"w%" + std::to_string(rng() % 3)};
            if (rng() % 4 == 0) {
                senses.push_back("w%" + std::to_string(rng() % 3));
            }
            g.push_back(gold(key, senses));
            g_oracle[key] = std::set<std::string>(senses.begin(), senses.end());
            const auto roll = rng() % 5;
            if (roll == 0) {
                continue;
            }
            std::optional<std::string> s;
            if (roll != 1) {
                s = "w%" + std::to_string(rng() % 3);
            }
            a.push_back(answer(key, s));
            a_oracle[key] = s;
        }
        const auto r = score(a, g);
        const auto o = oracle::independent_score(a_oracle, g_oracle);
        CHECK(r.precision == doctest::Approx(o.precision).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(o.recall).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(o.f1).epsilon(1e-12));
        CHECK(r.abstained == o.abstained);
        CHECK(r.missing_vectors == o.missing);
        CHECK(r.attempted + r.abstained + r.missing_vectors == r.total);

        std::shuffle(a.begin(), a.end(), rng);
        CHECK(score(a, g) == r);
    }
}

TEST_CASE("evaluate: self-evaluation is perfect") {
    auto data = fixtures::gaussian_senses(5, "tr", 15, 3.0, 8);
    const auto idx = build_index(data.corpus, data.store, Keying::Lemma);
    const auto r = evaluate(idx, data.corpus, data.store, 1, Backoff::None, Keying::Lemma);
    CHECK(r.f1 == 1.0);
    CHECK(percent(r.f1) == "100.00");
    CHECK(r.precision == r.recall);
}

TEST_CASE("evaluate: missing vectors and unseen words") {
    auto data = fixtures::gaussian_senses(1, "tr", 4, 10.0, 4);
    const auto idx = build_index(data.corpus, data.store, Keying::Lemma);
    Corpus test;
    test.add(fixtures::single("t0", "bank", "bank%1:14:00::"));
    test.add(fixtures::single("t1", "bank", "bank%1:14:00::"));
    test.add(fixtures::single("t2", "river", "river%1:17:00::"));
    VectorStore store(4);
    store.insert("t0#0", std::vector<float>{5, 0, 0, 0});
    store.insert("t2#0", std::vector<float>{5, 0, 0, 0});

    const auto none = evaluate(idx, test, store, 1, Backoff::None, Keying::Lemma);
    CHECK(none.total == 3);
    CHECK(none.attempted == 1);
    CHECK(none.correct == 1);
    CHECK(none.missing_vectors == 1);
    CHECK(none.abstained == 1);

    const auto mfs = evaluate(idx, test, store, 1, Backoff::GlobalMfs, Keying::Lemma);
    CHECK(mfs.attempted == 2);
    CHECK(mfs.abstained == 0);
    CHECK(mfs.recall >= none.recall);

    CHECK_THROWS_AS(evaluate(idx, test, VectorStore(3), 1, Backoff::None, Keying::Lemma), DimensionError);
    CHECK_THROWS_AS(evaluate(idx, test, store, 1, Backoff::None, Keying::LemmaPos), Error);
}

TEST_CASE("property: evaluate equals classify-then-score, sweep equals per-k evaluate") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto train = fixtures::gaussian_senses(rng(), "tr", 3 + rng() % 6, 1.0, 6);
        auto test = fixtures::gaussian_senses(rng(), "te", 2 + rng() % 5, 1.0, 6);
        const auto idx = build_index(train.corpus, train.store, Keying::Lemma);
        const std::vector<std::size_t> ks{1, 2, 3, 5, 8, 13};
        const auto sweep = sweep_k(idx, test.corpus, test.store, ks, Backoff::None, Keying::Lemma);
        REQUIRE(sweep.rows.size() == ks.size());
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const auto direct = evaluate(idx, test.corpus, test.store, ks[i], Backoff::None, Keying::Lemma);
            CHECK(sweep.rows[i].second == direct);

            std::vector<SystemAnswer> answers;
            for (const auto& inst : annotated_instances(test.corpus)) {
                auto v = test.store.lookup(inst.key.str());
                answers.push_back({inst.key, idx.classify(inst.word_key(Keying::Lemma), *v, ks[i]).sense});
            }
            CHECK(score(answers, gold_from_corpus(test.corpus)) == direct);
        }
    }
}

TEST_CASE("sweep: plateau beyond c_min") {
    auto train = fixtures::gaussian_senses(3, "tr", 2, 0.5, 6);
    auto test = fixtures::gaussian_senses(4, "te", 10, 0.5, 6);
    const auto idx = build_index(train.corpus, train.store, Keying::Lemma);
    const auto sweep = sweep_k(idx, test.corpus, test.store, default_k_grid(), Backoff::None, Keying::Lemma);
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
        CHECK(sweep.rows[i].second == sweep.rows[1].second);
    }
    CHECK_THROWS_AS(sweep_k(idx, test.corpus, test.store, {}, Backoff::None, Keying::Lemma), Error);
    CHECK_THROWS_AS(sweep_k(idx, test.corpus, test.store, {3, 2}, Backoff::None, Keying::Lemma), Error);
}

TEST_CASE("default k grid") {
    CHECK(default_k_grid() == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 50, 100, 500, 1000});
}

TEST_CASE("render_table") {
    EvalResult r;
    r.attempted = r.total = 10000;
    r.correct = 7610;
    r.precision = r.recall = r.f1 = 0.7610;
    r.per_pos[Pos::Noun] = Counts{10000, 7610, 10000};
    CHECK(percent(0.7610) == "76.10");

    const std::string tsv = render_table(r, TableFormat::Tsv);
    CHECK(tsv.find("all\t76.10\t76.10\t76.10\t10000\t7610\t10000\t0\t0\n") != std::string::npos);
    CHECK(tsv == render_table(r, TableFormat::Tsv));

    SweepResult empty;
    CHECK(render_table(empty, TableFormat::Tsv) == "k\tP\tR\tF1\tattempted\tcorrect\ttotal\tabstained\tmissing\n");
    const std::string md = render_table(empty, TableFormat::Markdown);
    CHECK(md == "| k | P | R | F1 | attempted | correct | total | abstained | missing |\n"
                "| --- | ---: | ---: | ---: | ---: | ---: | ---: | ---: | ---: |\n");

    SweepResult sweep;
    sweep.rows.emplace_back(1, r);
    const std::string with_mfs = render_table(sweep, TableFormat::Tsv, &r);
    CHECK(with_mfs.find("\nMFS\t76.10") != std::string::npos);
}

TEST_CASE("evaluate_mfs") {
    Corpus train;
    train.add(fixtures::single("a", "bank", "bank%1:14:00::"));
    train.add(fixtures::single("b", "bank", "bank%1:14:00::"));
    train.add(fixtures::single("c", "bank", "bank%1:17:01::"));
    VectorStore store(1);
    for (const char* k : {"a#0", "b#0", "c#0"}) {
        store.insert(k, std::vector<float>{1});
    }
    const auto idx = build_index(train, store, Keying::Lemma);
    const auto r = evaluate_mfs(idx, train, Keying::Lemma);
    CHECK(r.correct == 2);
    CHECK(r.attempted == 3);
}
