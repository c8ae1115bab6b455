#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "senseknn/corpus.hpp"

namespace senseknn {

/// Exact t-SNE settings. The defaults are the conventional ones: perplexity 30,
/// 1000 iterations, learning rate 200, momentum 0.5 then 0.8 from iteration
/// 250, and x12 early exaggeration for the first 250 iterations.
struct ProjectionConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    double early_exaggeration_factor = 12.0;
    int early_exaggeration_iters = 250;
    std::uint64_t seed = 42;
    /// Length-normalize inputs before computing affinities.
    bool normalize = false;

    /// Throws DomainError on an out-of-range field.
    void validate() const;
};

/// Dense row-major n x n matrix.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> values;

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t size) : n(size), values(size * size, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

using Point2D = std::array<double, 2>;

struct Affinities {
    /// Symmetric joint probabilities, zero diagonal, summing to 1.
    SquareMatrix p;
    /// Perplexity reached by each conditional row distribution.
    std::vector<double> row_perplexity;
    /// Rows whose bandwidth search stopped at the iteration cap.
    std::size_t unconverged_rows = 0;
};

/// Gaussian affinities over squared Euclidean distances with a per-row
/// bandwidth found by bisection (at most 64 steps) to match `perplexity`.
/// Throws DomainError for fewer than 3 points or perplexity outside (1, n).
Affinities pairwise_affinities(const std::vector<std::vector<double>>& points, double perplexity);

struct KlGradient {
    double kl = 0.0;
    std::vector<Point2D> grad;
};

/// KL(P || Q) with Q from the Student-t kernel and its gradient with respect
/// to Y: 4 * sum_j (p_ij - q_ij) (y_i - y_j) / (1 + |y_i - y_j|^2).
KlGradient kl_gradient(const SquareMatrix& p, const std::vector<Point2D>& y);

struct ProjectedPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
    std::string provenance;

    bool operator==(const ProjectedPoint&) const = default;
};

struct Coords2D {
    std::vector<ProjectedPoint> points;

    bool operator==(const Coords2D&) const = default;
};

struct TraceRow {
    int iteration = 0;
    double kl = 0.0;
};

struct ProjectionResult {
    Coords2D coords;
    /// KL(P || Q) of the unexaggerated P: initial state, then after each step.
    std::vector<TraceRow> trace;
    double perplexity_used = 0.0;
    std::size_t unconverged_rows = 0;
};

/// Perplexity actually used for n points: the requested value capped at
/// (n - 1) / 3, but never below min(requested, 1.5).
double effective_perplexity(double requested, std::size_t n);

/// Exact t-SNE into 2D. Initial coordinates are drawn from N(0, 1e-4^2)
/// with a generator seeded by `config.seed`.
ProjectionResult tsne(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels,
                      const std::vector<std::string>& provenance, const ProjectionConfig& config);

/// CSV "x,y,sense,provenance"; rows whose label occurs fewer than
/// `min_label_frequency` times are dropped.
std::string export_plot_data(const Coords2D& coords, std::size_t min_label_frequency);

/// CSV "iteration,kl".
std::string export_trace(const std::vector<TraceRow>& trace);

}  // namespace senseknn
