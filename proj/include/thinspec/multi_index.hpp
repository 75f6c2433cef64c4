#pragma once

#include <numeric>
#include <string>
#include <vector>

namespace thinspec {

/// Dense multi-index in Z_{>=0}^n. Dimensions stay small (n <= 7), so a plain
/// vector beats any sparse representation.
using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

inline bool all_even(const MultiIndex& m) {
    for (int v : m)
        if (v % 2 != 0) return false;
    return true;
}

/// Componentwise parity match: used for Hermite eigenfunction checks.
inline bool same_parity(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if ((a[i] - b[i]) % 2 != 0) return false;
    return true;
}

inline MultiIndex add(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

inline std::string to_string(const MultiIndex& m) {
    std::string s = "(";
    for (size_t i = 0; i < m.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(m[i]);
    }
    return s + ")";
}

}  // namespace thinspec
