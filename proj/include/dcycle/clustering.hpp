#pragma once

#include <dcycle/error.hpp>
#include <dcycle/log.hpp>
#include <dcycle/matrix.hpp>
#include <dcycle/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dcycle {

enum class ClusterMethod { MeanShift, KMeans };

inline std::string_view to_string(ClusterMethod m) {
    return m == ClusterMethod::MeanShift ? "mean_shift" : "kmeans";
}

/// Per-segment cluster labels plus per-cluster modes. For Mean Shift,
/// `freq[i][c]` counts how often point i fell inside a window of cluster c;
/// K-Means stores a one-hot row.
struct ClusterAssignment {
    ClusterMethod method = ClusterMethod::MeanShift;
    std::vector<std::size_t> labels;
    std::vector<std::vector<double>> modes;
    std::vector<std::vector<std::uint32_t>> freq;
    std::vector<bool> abnormal;
    double bandwidth = 0.0;  // Mean Shift only

    std::size_t cluster_count() const { return modes.size(); }

    std::vector<std::size_t> sizes() const {
        std::vector<std::size_t> s(modes.size(), 0);
        for (auto l : labels) ++s[l];
        return s;
    }

    std::vector<std::size_t> members(std::size_t cluster) const {
        std::vector<std::size_t> m;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cluster) m.push_back(i);
        return m;
    }
};

// ---------------------------------------------------------------- bandwidth

enum class BandwidthRule {
    Percentile,    // 20th percentile of sampled pairwise distances
    MeanFraction,  // 0.2 x mean sampled pairwise distance
};

struct BandwidthOptions {
    BandwidthRule rule = BandwidthRule::Percentile;
    double quantile = 0.20;
    std::size_t max_pairs = 1000;
};

namespace detail {

inline double linear_quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace detail

/// Window radius from the spread of point pairs. Up to `max_pairs`
/// distinct pairs are drawn with a generator seeded by `seed`; all pairs are
/// used when there are fewer. A zero result falls back to the smallest
/// positive pairwise distance.
inline double estimate_bandwidth(const Matrix& points, std::uint64_t seed,
                                 const BandwidthOptions& opts = {}) {
    const std::size_t n = points.rows();
    if (n < 2) throw InsufficientDataError("bandwidth estimation needs at least 2 points");

    const std::size_t total_pairs = n * (n - 1) / 2;
    std::vector<double> d;
    if (total_pairs <= opts.max_pairs) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) d.push_back(distance(points.row(i), points.row(j)));
    } else {
        Rng rng(seed);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        while (d.size() < opts.max_pairs) {
            std::size_t i = rng.index(n), j = rng.index(n);
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            if (!seen.insert({i, j}).second) continue;
            d.push_back(distance(points.row(i), points.row(j)));
        }
    }

    double h = 0.0;
    if (opts.rule == BandwidthRule::Percentile) {
        h = detail::linear_quantile(d, opts.quantile);
    } else {
        double s = 0.0;
        for (double x : d) s += x;
        h = opts.quantile * s / static_cast<double>(d.size());
    }
    if (h > 0.0) return h;

    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dij = distance(points.row(i), points.row(j));
            if (dij > 0.0) smallest = std::min(smallest, dij);
        }
    if (!std::isfinite(smallest)) throw DegenerateError("all points are identical");
    return smallest;
}

// --------------------------------------------------------------- mean shift

enum class Kernel { Flat, Gaussian };

struct MeanShiftParams {
    double bandwidth = 1.0;
    Kernel kernel = Kernel::Flat;
    double shift_tol_frac = 1e-4;  // convergence when |S| < shift_tol_frac * h
    std::size_t max_iter = 500;
    double merge_frac = 0.5;  // converged centres within merge_frac * h share a cluster

    void validate() const {
        if (!(bandwidth > 0.0)) throw ConfigError("mean shift bandwidth must be positive");
        if (!(merge_frac > 0.0 && merge_frac < 1.0))
            throw ConfigError("mean shift merge_frac must lie in (0, 1)");
        if (!(shift_tol_frac > 0.0)) throw ConfigError("mean shift shift_tol must be positive");
    }
};

/// One window update: the shift vector from `center` and the indices of the
/// points inside radius h. Flat kernel: mean of in-window offsets. Gaussian
/// kernel: exp(-|u|²/2h²) weights over points within 3h.
struct ShiftStep {
    std::vector<double> shift;
    std::vector<std::size_t> in_window;
};

inline ShiftStep mean_shift_step(const Matrix& points, std::span<const double> center,
                                 double h, Kernel kernel) {
    const std::size_t d = points.cols();
    ShiftStep step{std::vector<double>(d, 0.0), {}};
    const double h2 = h * h;
    const double support2 = kernel == Kernel::Flat ? h2 : 9.0 * h2;

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i) {
        const auto p = points.row(i);
        const double r2 = squared_distance(p, center);
        if (r2 <= h2) step.in_window.push_back(i);
        if (r2 > support2) continue;
        const double w = kernel == Kernel::Flat ? 1.0 : std::exp(-r2 / (2.0 * h2));
        weight_sum += w;
        for (std::size_t c = 0; c < d; ++c) step.shift[c] += w * (p[c] - center[c]);
    }
    if (weight_sum > 0.0)
        for (auto& s : step.shift) s /= weight_sum;
    return step;
}

namespace detail {

inline std::size_t argmax_lowest(const std::vector<std::uint32_t>& row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
        if (row[c] > row[best]) best = c;
    return best;
}

inline std::optional<std::size_t> nearest_mode(const std::vector<std::vector<double>>& modes,
                                               std::span<const double> x) {
    std::optional<std::size_t> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < modes.size(); ++c) {
        const double dc = squared_distance(modes[c], x);
        if (dc < best_d) {
            best_d = dc;
            best = c;
        }
    }
    return best;
}

}  // namespace detail

/// Mode-seeking clustering with visit-frequency voting.
///
/// Unvisited points seed windows in index order. Every point that falls
/// inside a window during a trajectory is marked visited and gains one vote
/// for that trajectory's cluster. A converged centre within merge_frac * h of
/// an existing mode joins that mode (which stays put), otherwise it opens a
/// new cluster. Each point is finally labelled by its most-voted cluster,
/// ties to the lower id; clusters that win no point are removed.
inline ClusterAssignment mean_shift(const Matrix& points, const MeanShiftParams& params) {
    params.validate();
    const std::size_t n = points.rows();
    if (n == 0) throw InsufficientDataError("mean shift needs at least 1 point");

    const double h = params.bandwidth;
    const double tol = params.shift_tol_frac * h;
    const double merge_radius = params.merge_frac * h;

    std::vector<bool> visited(n, false);
    std::vector<std::vector<double>> modes;
    std::vector<std::vector<std::uint32_t>> votes;  // per cluster, per point

    for (std::size_t seed = 0; seed < n; ++seed) {
        if (visited[seed]) continue;

        std::vector<double> center(points.row(seed).begin(), points.row(seed).end());
        std::vector<std::uint32_t> trajectory_votes(n, 0);
        bool converged = false;
        for (std::size_t it = 0; it < params.max_iter; ++it) {
            auto step = mean_shift_step(points, center, h, params.kernel);
            for (auto i : step.in_window) {
                visited[i] = true;
                ++trajectory_votes[i];
            }
            if (norm(step.shift) < tol) {
                converged = true;
                break;
            }
            for (std::size_t c = 0; c < center.size(); ++c) center[c] += step.shift[c];
        }

        std::optional<std::size_t> target;
        const auto nearest = detail::nearest_mode(modes, center);
        if (!converged) {
            log::warn("mean shift: seed " + std::to_string(seed) + " did not converge in " +
                      std::to_string(params.max_iter) + " iterations");
            target = nearest;
        } else if (nearest && distance(modes[*nearest], center) < merge_radius) {
            target = nearest;
        }

        if (target) {
            for (std::size_t i = 0; i < n; ++i) votes[*target][i] += trajectory_votes[i];
        } else {
            modes.push_back(std::move(center));
            votes.push_back(std::move(trajectory_votes));
        }
    }

    // Transpose to per-point rows and label by argmax.
    const std::size_t c_all = modes.size();
    std::vector<std::vector<std::uint32_t>> rows(n, std::vector<std::uint32_t>(c_all, 0));
    for (std::size_t c = 0; c < c_all; ++c)
        for (std::size_t i = 0; i < n; ++i) rows[i][c] = votes[c][i];

    std::vector<std::size_t> raw_labels(n);
    std::vector<bool> used(c_all, false);
    for (std::size_t i = 0; i < n; ++i) {
        raw_labels[i] = detail::argmax_lowest(rows[i]);
        used[raw_labels[i]] = true;
    }

    std::vector<std::size_t> remap(c_all, 0);
    ClusterAssignment out;
    out.method = ClusterMethod::MeanShift;
    out.bandwidth = h;
    for (std::size_t c = 0; c < c_all; ++c) {
        if (!used[c]) continue;
        remap[c] = out.modes.size();
        out.modes.push_back(modes[c]);
    }
    out.labels.resize(n);
    out.freq.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
        out.labels[i] = remap[raw_labels[i]];
        for (std::size_t c = 0; c < c_all; ++c)
            if (used[c]) out.freq[i].push_back(rows[i][c]);
    }
    out.abnormal.assign(out.modes.size(), false);
    return out;
}

// ------------------------------------------------------------------ k-means

struct KMeansResult {
    ClusterAssignment assignment;
    std::size_t iterations = 0;
    double inertia = 0.0;
};

/// Lloyd's algorithm from a deterministic farthest-point start: the first
/// centre is the point nearest the data mean, each further centre the point
/// farthest from those already chosen (lowest index on ties). An emptied
/// cluster is re-seeded with the point farthest from its own centre.
inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::size_t max_iter = 300) {
    const std::size_t n = points.rows(), d = points.cols();
    if (k == 0) throw ConfigError("k-means needs k >= 1");
    if (n < k)
        throw InsufficientDataError("k-means needs n >= k (n=" + std::to_string(n) +
                                    ", k=" + std::to_string(k) + ")");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c) mean[c] += points(i, c);
    for (auto& m : mean) m /= static_cast<double>(n);

    std::vector<std::vector<double>> centers;
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (squared_distance(points.row(i), mean) < squared_distance(points.row(first), mean))
            first = i;
    centers.emplace_back(points.row(first).begin(), points.row(first).end());

    std::vector<double> min_d(n);
    for (std::size_t i = 0; i < n; ++i) min_d[i] = squared_distance(points.row(i), centers[0]);
    while (centers.size() < k) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (min_d[i] > min_d[far]) far = i;
        centers.emplace_back(points.row(far).begin(), points.row(far).end());
        for (std::size_t i = 0; i < n; ++i)
            min_d[i] = std::min(min_d[i], squared_distance(points.row(i), centers.back()));
    }

    auto nearest = [&](std::size_t i) {
        std::size_t best = 0;
        double best_d = squared_distance(points.row(i), centers[0]);
        for (std::size_t c = 1; c < k; ++c) {
            const double dc = squared_distance(points.row(i), centers[c]);
            if (dc < best_d) {
                best_d = dc;
                best = c;
            }
        }
        return best;
    };

    std::vector<std::size_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) labels[i] = nearest(i);

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t c = 0; c < d; ++c) sums[labels[i]][c] += points(i, c);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double di = squared_distance(points.row(i), centers[labels[i]]);
                    if (di > far_d) {
                        far_d = di;
                        far = i;
                    }
                }
                centers[c].assign(points.row(far).begin(), points.row(far).end());
                labels[far] = c;
                continue;
            }
            for (std::size_t j = 0; j < d; ++j)
                centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto l = nearest(i);
            if (l != labels[i]) {
                labels[i] = l;
                changed = true;
            }
        }
        if (!changed) {
            ++iter;
            break;
        }
    }

    KMeansResult result;
    result.iterations = iter;
    auto& a = result.assignment;
    a.method = ClusterMethod::KMeans;
    a.labels = labels;
    a.modes = centers;
    a.freq.assign(n, std::vector<std::uint32_t>(k, 0));
    for (std::size_t i = 0; i < n; ++i) {
        a.freq[i][labels[i]] = 1;
        result.inertia += squared_distance(points.row(i), centers[labels[i]]);
    }
    a.abnormal.assign(k, false);
    return result;
}

// ------------------------------------------------------------ abnormal flags

/// Marks clusters with fewer than `min_size` members as abnormal.
inline ClusterAssignment flag_abnormal(ClusterAssignment a, std::size_t min_size = 3) {
    if (min_size == 0) throw ConfigError("abnormal min_size must be >= 1");
    const auto sizes = a.sizes();
    a.abnormal.assign(sizes.size(), false);
    for (std::size_t c = 0; c < sizes.size(); ++c) a.abnormal[c] = sizes[c] < min_size;
    return a;
}

/// Fraction of points whose cluster's majority class matches their own.
inline double purity(std::span<const std::size_t> labels, std::span<const std::size_t> truth) {
    if (labels.empty()) return 0.0;
    std::size_t clusters = 0, classes = 0;
    for (auto l : labels) clusters = std::max(clusters, l + 1);
    for (auto t : truth) classes = std::max(classes, t + 1);
    std::vector<std::vector<std::size_t>> table(clusters, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) ++table[labels[i]][truth[i]];
    std::size_t hit = 0;
    for (const auto& row : table) hit += *std::max_element(row.begin(), row.end());
    return static_cast<double>(hit) / static_cast<double>(labels.size());
}

}  // namespace dcycle
