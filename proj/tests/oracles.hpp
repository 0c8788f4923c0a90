// Independent reference implementations used to cross-check the library.
// Nothing here may call into the code paths under test: the IoU, the path
// search, and the SVM solver are all re-derived from scratch.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tubekit/linker.hpp"
#include "tubekit/prng.hpp"

namespace oracle {

inline double iou_ref(const tubekit::Box& a, const tubekit::Box& b) {
    const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    const double inter = w * h;
    const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
    const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
    return inter / (area_a + area_b - inter);
}

// Total link-score sum of one concrete choice of regions.
inline double path_total(const std::vector<std::vector<tubekit::ScoredRegion>>& frames,
                         const std::vector<std::size_t>& choices, double lambda) {
    if (frames.size() == 1) {
        return frames[0][choices[0]].unary;
    }
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
        const auto& a = frames[t][choices[t]];
        const auto& b = frames[t + 1][choices[t + 1]];
        total += a.unary + b.unary + lambda * iou_ref(a.box, b.box);
    }
    return total;
}

struct EnumeratedPath {
    std::vector<std::size_t> choices;
    double total = 0.0;  // unnormalized sum (or the unary for T = 1)
};

// Exhaustive search over every per-frame combination; the first maximizer
// in odometer order wins. Only usable for tiny instances.
inline EnumeratedPath enumerate_best_path(const std::vector<std::vector<tubekit::ScoredRegion>>& frames,
                                          double lambda) {
    EnumeratedPath best;
    std::vector<std::size_t> choices(frames.size(), 0);
    bool first = true;
    while (true) {
        const double total = path_total(frames, choices, lambda);
        if (first || total > best.total) {
            best.choices = choices;
            best.total = total;
            first = false;
        }
        std::size_t t = 0;
        while (t < frames.size()) {
            if (++choices[t] < frames[t].size()) break;
            choices[t] = 0;
            ++t;
        }
        if (t == frames.size()) break;
    }
    return best;
}

// Random path-search instances shared by the linker tests and the
// acceptance suite.
inline std::vector<std::vector<tubekit::ScoredRegion>> random_frames(tubekit::Prng& rng, int max_frames,
                                                                     int max_regions, int min_frames = 1) {
    const int T = min_frames + static_cast<int>(rng.uniform_index(
                                   static_cast<std::uint64_t>(max_frames - min_frames + 1)));
    std::vector<std::vector<tubekit::ScoredRegion>> frames(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const int regions = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_regions)));
        for (int r = 0; r < regions; ++r) {
            tubekit::ScoredRegion region;
            region.region_id = r;
            region.frame = t;
            const double x = rng.uniform(0.0, 30.0);
            const double y = rng.uniform(0.0, 30.0);
            region.box = tubekit::Box{x, y, x + rng.uniform(2.0, 12.0), y + rng.uniform(2.0, 12.0)};
            region.unary = rng.normal() * 2.0;
            frames[static_cast<std::size_t>(t)].push_back(region);
        }
    }
    return frames;
}

struct RefSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
};

inline double ref_svm_objective(const std::vector<std::vector<double>>& xs,
                                const std::vector<double>& ys, const RefSvmModel& m, double cost) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double s = m.bias;
        for (std::size_t d = 0; d < xs[i].size(); ++d) s += m.weights[d] * xs[i][d];
        hinge += std::max(0.0, 1.0 - ys[i] * s);
    }
    double norm = 0.0;
    for (const double w : m.weights) norm += w * w;
    return 0.5 * norm + cost * hinge;
}

// Brute-force subgradient descent on (1/2)|w|^2 + C * sum hinge with a
// 1/sqrt(t) schedule, keeping the best iterate by objective. Written
// independently of the library solver.
inline RefSvmModel reference_svm(const std::vector<std::vector<double>>& xs,
                                 const std::vector<double>& ys, double cost, int iterations = 30000) {
    const std::size_t dim = xs.front().size();
    RefSvmModel current{std::vector<double>(dim, 0.0), 0.0};
    RefSvmModel best = current;
    double best_objective = ref_svm_objective(xs, ys, current, cost);

    for (int t = 0; t < iterations; ++t) {
        std::vector<double> grad(dim, 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double s = current.bias;
            for (std::size_t d = 0; d < dim; ++d) s += current.weights[d] * xs[i][d];
            if (ys[i] * s < 1.0) {
                for (std::size_t d = 0; d < dim; ++d) grad[d] -= ys[i] * xs[i][d];
                grad_b -= ys[i];
            }
        }
        const double step = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
        for (std::size_t d = 0; d < dim; ++d) {
            current.weights[d] -= step * (current.weights[d] + cost * grad[d]);
        }
        current.bias -= step * cost * grad_b;

        const double objective = ref_svm_objective(xs, ys, current, cost);
        if (objective < best_objective) {
            best_objective = objective;
            best = current;
        }
    }
    return best;
}

// Seeded, linearly separable two-blob problem (class means a fixed
// distance apart, unit noise).
struct BlobProblem {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
};

inline BlobProblem make_blobs(tubekit::Prng& rng, std::size_t per_class, double separation, int dim = 2) {
    BlobProblem problem;
    for (std::size_t i = 0; i < per_class; ++i) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = rng.normal();
        x[0] += separation / 2.0;
        problem.xs.push_back(std::move(x));
        problem.ys.push_back(1.0);
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (int d = 0; d < dim; ++d) x[static_cast<std::size_t>(d)] = rng.normal();
        x[0] -= separation / 2.0;
        problem.xs.push_back(std::move(x));
        problem.ys.push_back(-1.0);
    }
    return problem;
}

}  // namespace oracle
