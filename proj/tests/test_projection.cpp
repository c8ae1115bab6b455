#include <cmath>
#include <random>

#include "doctest.h"
#include "senseknn/error.hpp"
#include "senseknn/projection.hpp"
#include "support/oracles.hpp"

using namespace senseknn;

namespace {

std::vector<std::vector<double>> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::normal_distribution<double> g;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    for (auto& p : pts) {
        for (auto& x : p) {
            x = g(rng);
        }
    }
    return pts;
}

double row_perplexity_of(const std::vector<double>& row) {
    double h = 0;
    for (double p : row) {
        if (p > 0) h -= p * std::log(p);
    }
    return std::exp(h);
}

}  // namespace

TEST_CASE("affinities: normalization, symmetry and perplexity calibration") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng() % 30;
        const auto pts = random_points(rng, n, 1 + rng() % 10);
        const double perp = 1.5 + double(rng() % 100) / 100.0 * (double(n - 1) / 2.0);
        const auto a = pairwise_affinities(pts, perp);
        CHECK(a.unconverged_rows == 0);
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(a.p(i, i) == 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                total += a.p(i, j);
                CHECK(a.p(i, j) >= 0.0);
                CHECK(a.p(i, j) == doctest::Approx(a.p(j, i)).epsilon(1e-12));
            }
            CHECK(std::abs(a.row_perplexity[i] - perp) < 1e-4);
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
}

TEST_CASE("affinities: equidistant points give uniform P") {
    // Unit basis vectors are exactly equidistant, so every conditional row is
    // uniform whatever the bandwidth: perplexity n - 1 regardless of target.
    for (std::size_t n : {3u, 6u}) {
        std::vector<std::vector<double>> simplex(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) simplex[i][i] = 1.0;
        const auto a = pairwise_affinities(simplex, 1.5);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                CHECK(a.p(i, j) == doctest::Approx(1.0 / double(n * (n - 1))).epsilon(1e-12));
                row.push_back(a.p(i, j) * double(n));
            }
            CHECK(row_perplexity_of(row) == doctest::Approx(double(n - 1)));
        }
    }
}

TEST_CASE("affinities: duplicates share mass") {
    const std::vector<std::vector<double>> pts{{0, 0}, {0, 0}, {3, 0}, {0, 4}, {5, 5}};
    const auto a = pairwise_affinities(pts, 2.0);
    CHECK(a.p(2, 0) == doctest::Approx(a.p(2, 1)).epsilon(1e-12));
    CHECK(a.p(3, 0) == doctest::Approx(a.p(3, 1)).epsilon(1e-12));
}

TEST_CASE("affinities: input validation") {
    CHECK_THROWS_AS(pairwise_affinities({{0.0}, {1.0}}, 1.5), DomainError);
    CHECK_THROWS_AS(pairwise_affinities({{0.0}, {1.0}, {2.0}}, 3.0), DomainError);
    CHECK_THROWS_AS(pairwise_affinities({{0.0}, {1.0}, {2.0, 1.0}}, 1.5), DimensionError);
}

TEST_CASE("kl_gradient: finite differences, non-negativity, translation invariance") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10;
        const auto a = pairwise_affinities(random_points(rng, n, 5), 3.0);
        std::vector<Point2D> y(n);
        std::vector<double> flat;
        for (auto& p : y) {
            p = {g(rng), g(rng)};
            flat.push_back(p[0]);
            flat.push_back(p[1]);
        }
        const auto kg = kl_gradient(a.p, y);
        CHECK(kg.kl >= 0.0);
        CHECK(kg.kl == doctest::Approx(double(oracle::naive_kl(a.p.values, flat, n))).epsilon(1e-10));

        const auto fd = oracle::fd_gradient(a.p.values, flat, n, 1e-5);
        double scale = 0;
        for (double v : fd) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                const double ref = fd[2 * i + c];
                const double rel = std::abs(kg.grad[i][c] - ref) / std::max(std::abs(ref), 1e-3 * scale);
                CHECK(rel < 1e-4);
            }
        }

        auto shifted = y;
        for (auto& p : shifted) {
            p[0] += 3.7;
            p[1] -= 12.5;
        }
        CHECK(kl_gradient(a.p, shifted).kl == doctest::Approx(kg.kl).epsilon(1e-9));
    }
}

TEST_CASE("config validation and perplexity clamp") {
    ProjectionConfig c;
    CHECK_NOTHROW(c.validate());
    c.perplexity = 1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ProjectionConfig{};
    c.momentum = 1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = ProjectionConfig{};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);

    CHECK(effective_perplexity(30.0, 1000) == 30.0);
    CHECK(effective_perplexity(30.0, 40) == 13.0);
    CHECK(effective_perplexity(30.0, 3) == 1.5);
    CHECK(effective_perplexity(1.2, 3) == 1.2);
}

TEST_CASE("tsne: determinism, objective decrease, error path") {
    std::mt19937_64 rng(44);
    const auto pts = random_points(rng, 25, 8);
    std::vector<std::string> labels(25, "a%1"), prov;
    for (int i = 0; i < 25; ++i) prov.push_back("s" + std::to_string(i) + "#0");
    ProjectionConfig cfg;
    const auto r1 = tsne(pts, labels, prov, cfg);
    const auto r2 = tsne(pts, labels, prov, cfg);
    CHECK(r1.coords == r2.coords);
    CHECK(r1.trace.size() == 1001);
    CHECK(r1.trace.back().kl <= r1.trace.front().kl);
    for (const auto& t : r1.trace) CHECK(t.kl >= 0.0);
    for (const auto& p : r1.coords.points) {
        CHECK(std::isfinite(p.x));
        CHECK(std::isfinite(p.y));
    }
    CHECK(export_plot_data(r1.coords, 0) == export_plot_data(r2.coords, 0));

    cfg.seed = 7;
    CHECK_FALSE(tsne(pts, labels, prov, cfg).coords == r1.coords);

    CHECK_THROWS_AS(tsne({{1.0}, {2.0}}, {"a", "b"}, {"x", "y"}, ProjectionConfig{}), DomainError);
    CHECK_THROWS_AS(tsne(pts, {"a"}, prov, ProjectionConfig{}), DimensionError);
}

TEST_CASE("tsne: normalization flag") {
    std::mt19937_64 rng(45);
    auto pts = random_points(rng, 12, 4);
    std::vector<std::string> labels(12, "a%1"), prov(12, "p#0");
    ProjectionConfig cfg;
    cfg.iterations = 50;
    cfg.normalize = true;
    auto scaled = pts;
    for (std::size_t i = 0; i < scaled.size(); ++i)
        for (auto& x : scaled[i]) x *= std::ldexp(1.0, int(i) - 4);  // exact rescaling
    CHECK(tsne(pts, labels, prov, cfg).coords == tsne(scaled, labels, prov, cfg).coords);
    pts[0].assign(4, 0.0);
    CHECK_THROWS_AS(tsne(pts, labels, prov, cfg), DomainError);
}

TEST_CASE("export_plot_data filters rare senses") {
    Coords2D c;
    c.points = {{0, 0, "a%1", "s1#0"}, {1, 1, "a%1", "s2#0"}, {2, 2, "b%1", "s3#0"},
                {3, 3, "c%1", "s4#0"}, {4, 4, "c%1", "s,5#0"}, {5, 5, "c%1", "s6#0"}};
    const std::string all = export_plot_data(c, 0);
    const std::string filtered = export_plot_data(c, 2);
    auto lines = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };
    CHECK(all.rfind("x,y,sense,provenance\n", 0) == 0);
    CHECK(lines(all) == 1 + 6);
    CHECK(lines(filtered) == 1 + 2 + 3);
    CHECK(filtered.find("b%1") == std::string::npos);
    CHECK(all.find("\"s,5#0\"") != std::string::npos);
    CHECK(lines(export_plot_data(c, 4)) == 1);
    CHECK(export_trace({{0, 1.5}, {1, 1.25}}) == "iteration,kl\n0,1.5\n1,1.25\n");
}
