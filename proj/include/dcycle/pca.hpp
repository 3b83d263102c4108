#pragma once

#include <dcycle/error.hpp>
#include <dcycle/features.hpp>
#include <dcycle/log.hpp>
#include <dcycle/matrix.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dcycle {

struct Standardized {
    Matrix x;
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<std::size_t> kept;  // indices of input columns present in x
};

/// Column z-scores with the n-1 divisor. A constant column raises
/// ZeroVarianceError naming it, or is dropped when `drop_constant` is set.
inline Standardized standardize(const Matrix& z, std::span<const std::string> names = {},
                                bool drop_constant = false) {
    const std::size_t n = z.rows();
    if (n < 2) throw InsufficientDataError("standardize needs at least 2 rows");

    std::vector<double> means, stds;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < z.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += z(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (z(i, j) - mean) * (z(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            if (drop_constant) continue;
            throw ZeroVarianceError(j < names.size() ? names[j] : "column " + std::to_string(j));
        }
        means.push_back(mean);
        stds.push_back(sd);
        kept.push_back(j);
    }

    Matrix x(n, kept.size());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < kept.size(); ++c) x(i, c) = (z(i, kept[c]) - means[c]) / stds[c];
    return {std::move(x), std::move(means), std::move(stds), std::move(kept)};
}

/// Pearson correlation of the columns of `x`. The diagonal is exactly 1.
inline Matrix correlation_matrix(const Matrix& x) {
    const std::size_t n = x.rows(), m = x.cols();
    std::vector<double> mean(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) mean[j] += x(i, j);
    for (auto& mu : mean) mu /= static_cast<double>(n);

    Matrix r(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < m; ++b) {
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double da = x(k, a) - mean[a], db = x(k, b) - mean[b];
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            const double rab = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
            r(a, b) = rab;
            r(b, a) = rab;
        }
    }
    return r;
}

struct ContributionRates {
    std::vector<double> rates;
    std::vector<double> cumulative;
};

inline ContributionRates contribution_rates(std::span<const double> eigenvalues) {
    double total = 0.0;
    for (double l : eigenvalues) total += l;
    if (!(total > 0.0)) throw NumericError("eigenvalue sum must be positive");

    ContributionRates out;
    double running = 0.0;
    for (double l : eigenvalues) {
        out.rates.push_back(l / total);
        running += l;
        out.cumulative.push_back(running / total);
    }
    if (!out.cumulative.empty()) out.cumulative.back() = 1.0;
    return out;
}

struct ComponentSelection {
    std::size_t k = 0;
    std::size_t k_cumulative = 0;  // smallest i with cumulative_i >= threshold
    std::size_t k_eigen = 0;       // number of eigenvalues >= eig_threshold
    bool cumulative_shortfall = false;
};

/// Keeps the leading components with eigenvalue >= `eig_threshold`. When
/// they explain less than `cum_threshold` of the variance, the eigenvalue
/// rule still wins and a warning reports the shortfall.
inline ComponentSelection select_components(std::span<const double> eigenvalues,
                                            std::span<const double> cumulative,
                                            double cum_threshold = 0.80,
                                            double eig_threshold = 1.0) {
    ComponentSelection sel;
    sel.k_cumulative = cumulative.size();
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
        if (cumulative[i] >= cum_threshold - 1e-12) {
            sel.k_cumulative = i + 1;
            break;
        }
    }
    while (sel.k_eigen < eigenvalues.size() && eigenvalues[sel.k_eigen] >= eig_threshold)
        ++sel.k_eigen;
    if (sel.k_eigen == 0)
        throw SelectionError("no eigenvalue reaches " + std::to_string(eig_threshold));

    // Eigenvalues descend, so every component the cumulative rule asks for
    // beyond k_eigen has eigenvalue < threshold; the eigenvalue rule decides.
    sel.k = sel.k_eigen;
    if (sel.k_cumulative > sel.k_eigen) {
        sel.cumulative_shortfall = true;
        log::warn("component selection: " + std::to_string(sel.k) +
                  " components with eigenvalue >= " + std::to_string(eig_threshold) +
                  " explain only " + std::to_string(cumulative[sel.k - 1]) + " of variance");
    }
    return sel;
}

/// Scores on the first `k` eigenvector columns.
inline Matrix project(const Matrix& x, const Matrix& eigenvectors, std::size_t k) {
    if (k > eigenvectors.cols()) throw ValidationError("k exceeds component count");
    return x * eigenvectors.left_cols(k);
}

struct PcaConfig {
    double cum_threshold = 0.80;
    double eig_threshold = 1.0;
    bool drop_constant = false;
};

struct PcaModel {
    std::vector<std::string> feature_names;  // kept columns
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<double> eigenvalues;
    Matrix loadings;  // columns are components
    std::vector<double> rates;
    std::vector<double> cumulative;
    ComponentSelection selection;

    std::size_t k() const { return selection.k; }
};

struct PcaFit {
    PcaModel model;
    Matrix standardized;
    Matrix scores;  // n x k
};

inline std::vector<std::string> feature_names() {
    return {kFeatureSymbols.begin(), kFeatureSymbols.end()};
}

inline Matrix to_matrix(const FeatureMatrix& features) {
    Matrix z(features.size(), kFeatureCount);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto v = features.rows[i].values();
        std::copy(v.begin(), v.end(), z.row(i).begin());
    }
    return z;
}

inline PcaFit fit_pca(const Matrix& z, std::span<const std::string> names,
                      const PcaConfig& cfg = {}) {
    auto st = standardize(z, names, cfg.drop_constant);
    const Matrix r = correlation_matrix(st.x);
    auto eig = eigendecompose_sym(r);
    auto contrib = contribution_rates(eig.values);
    const auto sel = select_components(eig.values, contrib.cumulative, cfg.cum_threshold,
                                       cfg.eig_threshold);

    PcaFit fit;
    for (auto j : st.kept)
        fit.model.feature_names.push_back(j < names.size() ? names[j] : std::to_string(j));
    fit.model.means = std::move(st.means);
    fit.model.stds = std::move(st.stds);
    fit.model.eigenvalues = std::move(eig.values);
    fit.model.loadings = std::move(eig.vectors);
    fit.model.rates = std::move(contrib.rates);
    fit.model.cumulative = std::move(contrib.cumulative);
    fit.model.selection = sel;
    fit.scores = project(st.x, fit.model.loadings, sel.k);
    fit.standardized = std::move(st.x);
    return fit;
}

inline PcaFit fit_pca(const FeatureMatrix& features, const PcaConfig& cfg = {}) {
    const auto names = feature_names();
    return fit_pca(to_matrix(features), names, cfg);
}

}  // namespace dcycle
