#pragma once

// Independent reference computations for the tests. Nothing in here calls
// into the library's numerics.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// det(A - x I), evaluated directly.
inline double char_poly(const Mat3& a, double x) {
    Mat3 m = a;
    for (int i = 0; i < 3; ++i) m[i][i] -= x;
    return det3(m);
}

/// Roots of the characteristic polynomial by a fine grid scan over the
/// Gershgorin interval followed by bisection on each sign change. Returned
/// in descending order. Fewer than three roots means the scan missed a
/// double root; callers treat that as a failed trial.
inline std::vector<double> eigenvalues_brute(const Mat3& a, int steps = 200000) {
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < 3; ++i) {
        double r = 0.0;
        for (int j = 0; j < 3; ++j)
            if (j != i) r += std::abs(a[i][j]);
        lo = std::min(lo, a[i][i] - r);
        hi = std::max(hi, a[i][i] + r);
    }
    lo -= 1.0;
    hi += 1.0;
    std::vector<double> roots;
    const double dx = (hi - lo) / steps;
    double x0 = lo, f0 = char_poly(a, x0);
    for (int s = 1; s <= steps; ++s) {
        const double x1 = lo + dx * s;
        const double f1 = char_poly(a, x1);
        if (f0 == 0.0) {
            roots.push_back(x0);
        } else if ((f0 < 0) != (f1 < 0) && f1 != 0.0) {
            double l = x0, r = x1, fl = f0;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (l + r);
                const double fm = char_poly(a, m);
                if ((fm < 0) == (fl < 0)) {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            roots.push_back(0.5 * (l + r));
        }
        x0 = x1;
        f0 = f1;
    }
    std::sort(roots.begin(), roots.end(), std::greater<>());
    return roots;
}

/// Sample mean and n-1 standard deviation.
inline std::pair<double, double> mean_std(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / static_cast<double>(x.size() - 1))};
}

inline std::filesystem::path fixture_dir() { return DCYCLE_FIXTURE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace oracle
