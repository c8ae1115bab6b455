#include "senseknn/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>

#include "senseknn/error.hpp"

namespace senseknn {

namespace {

constexpr int kMaxBisectionSteps = 64;
constexpr double kPerplexityTolerance = 1e-5;
constexpr double kMinGain = 0.01;

std::vector<std::vector<double>> checked_points(const std::vector<std::vector<double>>& points) {
    if (points.size() < 3) {
        throw DomainError("t-SNE needs at least 3 points, got " + std::to_string(points.size()));
    }
    const std::size_t dim = points.front().size();
    if (dim == 0) {
        throw DimensionError("t-SNE input vectors are empty");
    }
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw DimensionError("t-SNE input vectors differ in length");
        }
        if (!std::all_of(p.begin(), p.end(), [](double x) { return std::isfinite(x); })) {
            throw DomainError("t-SNE input has a non-finite component");
        }
    }
    return points;
}

SquareMatrix squared_distances(const std::vector<std::vector<double>>& points) {
    const std::size_t n = points.size();
    SquareMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < points[i].size(); ++c) {
                const double diff = points[i][c] - points[j][c];
                s += diff * diff;
            }
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return d;
}

struct RowFit {
    double perplexity = 0.0;
    bool converged = false;
};

// Fills row i of `cond` with exp(-beta * (d_ij - d_min)) / Z and searches
// beta so that exp(entropy) matches the target perplexity.
RowFit fit_row(const SquareMatrix& dist, std::size_t i, double perplexity, SquareMatrix& cond) {
    const std::size_t n = dist.n;
    double d_min = std::numeric_limits<double>::infinity();
    double d_mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            d_min = std::min(d_min, dist(i, j));
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
            d_mean += dist(i, j) - d_min;
        }
    }
    d_mean /= static_cast<double>(n - 1);

    auto evaluate = [&](double beta) {
        double z = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                cond(i, j) = 0.0;
                continue;
            }
            const double shifted = dist(i, j) - d_min;
            const double w = std::exp(-beta * shifted);
            cond(i, j) = w;
            z += w;
            weighted += w * shifted;
        }
        for (std::size_t j = 0; j < n; ++j) {
            cond(i, j) /= z;
        }
        return std::exp(std::log(z) + beta * weighted / z);
    };

    double beta = d_mean > 0.0 ? 1.0 / d_mean : 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
        const double perp = evaluate(beta);
        if (std::abs(perp - perplexity) < kPerplexityTolerance) {
            return {perp, true};
        }
        if (perp > perplexity) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
    }
    const double midpoint = std::isinf(hi) ? beta : 0.5 * (lo + hi);
    return {evaluate(midpoint), false};
}

// KL(P || Q) for the true P; the gradient uses exaggeration * P.
double objective(const SquareMatrix& p, const std::vector<Point2D>& y, double exaggeration,
                 std::vector<Point2D>& grad) {
    const std::size_t n = p.n;
    SquareMatrix w(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y[i][0] - y[j][0];
            const double dy = y[i][1] - y[j][1];
            const double kernel = 1.0 / (1.0 + dx * dx + dy * dy);
            w(i, j) = kernel;
            w(j, i) = kernel;
            z += 2.0 * kernel;
        }
    }
    grad.assign(n, Point2D{0.0, 0.0});
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double q = w(i, j) / z;
            const double pij = p(i, j);
            if (pij > 0.0) {
                kl += pij * std::log(pij / q);
            }
            const double mult = 4.0 * (exaggeration * pij - q) * w(i, j);
            grad[i][0] += mult * (y[i][0] - y[j][0]);
            grad[i][1] += mult * (y[i][1] - y[j][1]);
        }
    }
    return kl;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

}  // namespace

void ProjectionConfig::validate() const {
    if (!(perplexity > 1.0)) {
        throw DomainError("perplexity must be greater than 1");
    }
    if (iterations < 1) {
        throw DomainError("iterations must be at least 1");
    }
    if (!(learning_rate > 0.0)) {
        throw DomainError("learning rate must be positive");
    }
    if (!(momentum >= 0.0 && momentum < 1.0) || !(final_momentum >= 0.0 && final_momentum < 1.0)) {
        throw DomainError("momentum must lie in [0, 1)");
    }
    if (!(early_exaggeration_factor >= 1.0)) {
        throw DomainError("early exaggeration factor must be at least 1");
    }
    if (early_exaggeration_iters < 0 || momentum_switch_iter < 0) {
        throw DomainError("iteration thresholds must be non-negative");
    }
}

Affinities pairwise_affinities(const std::vector<std::vector<double>>& points, double perplexity) {
    const auto& x = checked_points(points);
    const std::size_t n = x.size();
    if (!(perplexity > 1.0) || !(perplexity < static_cast<double>(n))) {
        throw DomainError("perplexity must lie in (1, " + std::to_string(n) + ")");
    }
    const SquareMatrix dist = squared_distances(x);
    SquareMatrix cond(n);
    Affinities out;
    out.row_perplexity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RowFit fit = fit_row(dist, i, perplexity, cond);
        out.row_perplexity[i] = fit.perplexity;
        if (!fit.converged) {
            ++out.unconverged_rows;
        }
    }

    out.p = SquareMatrix(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) {
                out.p(i, j) = cond(i, j) + cond(j, i);
                total += out.p(i, j);
            }
        }
    }
    for (double& v : out.p.values) {
        v /= total;
    }
    return out;
}

KlGradient kl_gradient(const SquareMatrix& p, const std::vector<Point2D>& y) {
    if (p.n != y.size()) {
        throw DimensionError("affinity matrix has " + std::to_string(p.n) + " rows but " +
                             std::to_string(y.size()) + " points were given");
    }
    KlGradient out;
    out.kl = objective(p, y, 1.0, out.grad);
    return out;
}

double effective_perplexity(double requested, std::size_t n) {
    const double cap = (static_cast<double>(n) - 1.0) / 3.0;
    const double floor = std::min(requested, 1.5);
    return std::max(std::min(requested, cap), floor);
}

ProjectionResult tsne(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels,
                      const std::vector<std::string>& provenance, const ProjectionConfig& config) {
    config.validate();
    auto x = checked_points(points);
    const std::size_t n = x.size();
    if (labels.size() != n || provenance.size() != n) {
        throw DimensionError("labels and provenance must have one entry per point");
    }
    if (config.normalize) {
        for (auto& v : x) {
            double norm = 0.0;
            for (double c : v) {
                norm += c * c;
            }
            if (norm == 0.0) {
                throw DomainError("cannot length-normalize a zero vector");
            }
            norm = std::sqrt(norm);
            for (double& c : v) {
                c /= norm;
            }
        }
    }

    ProjectionResult result;
    result.perplexity_used = effective_perplexity(config.perplexity, n);
    const Affinities aff = pairwise_affinities(x, result.perplexity_used);
    result.unconverged_rows = aff.unconverged_rows;

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> init(0.0, 1e-4);
    std::vector<Point2D> y(n);
    for (auto& pt : y) {
        pt[0] = init(rng);
        pt[1] = init(rng);
    }

    std::vector<Point2D> grad;
    std::vector<Point2D> update(n, Point2D{0.0, 0.0});
    std::vector<Point2D> gains(n, Point2D{1.0, 1.0});
    for (int iter = 0; iter < config.iterations; ++iter) {
        const double exaggeration = iter < config.early_exaggeration_iters ? config.early_exaggeration_factor : 1.0;
        const double momentum = iter < config.momentum_switch_iter ? config.momentum : config.final_momentum;
        result.trace.push_back({iter, objective(aff.p, y, exaggeration, grad)});

        Point2D mean{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < 2; ++c) {
                double& g = gains[i][c];
                g = (grad[i][c] > 0.0) != (update[i][c] > 0.0) ? g + 0.2 : g * 0.8;
                g = std::max(g, kMinGain);
                update[i][c] = momentum * update[i][c] - config.learning_rate * g * grad[i][c];
                y[i][c] += update[i][c];
                mean[c] += y[i][c];
            }
        }
        for (auto& pt : y) {
            pt[0] -= mean[0] / static_cast<double>(n);
            pt[1] -= mean[1] / static_cast<double>(n);
        }
    }
    result.trace.push_back({config.iterations, objective(aff.p, y, 1.0, grad)});

    result.coords.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i][0]) || !std::isfinite(y[i][1])) {
            throw Error("t-SNE diverged (non-finite coordinate); lower the learning rate");
        }
        result.coords.points.push_back({y[i][0], y[i][1], labels[i], provenance[i]});
    }
    return result;
}

std::string export_plot_data(const Coords2D& coords, std::size_t min_label_frequency) {
    std::map<std::string, std::size_t> freq;
    for (const auto& p : coords.points) {
        ++freq[p.label];
    }
    std::string out = "x,y,sense,provenance\n";
    for (const auto& p : coords.points) {
        if (freq[p.label] < min_label_frequency) {
            continue;
        }
        out += number(p.x) + "," + number(p.y) + "," + csv_field(p.label) + "," + csv_field(p.provenance) + "\n";
    }
    return out;
}

std::string export_trace(const std::vector<TraceRow>& trace) {
    std::string out = "iteration,kl\n";
    for (const auto& row : trace) {
        out += std::to_string(row.iteration) + "," + number(row.kl) + "\n";
    }
    return out;
}

}  // namespace senseknn
