#pragma once
// Independent reference computations used by the tests. Nothing here shares code
// with the library's reduction routines.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

using I = std::int64_t;
using M = std::vector<std::vector<I>>;

// Determinant by cofactor expansion (small matrices only).
inline I det(const M& a) {
    std::size_t n = a.size();
    if (n == 0) return 1;
    if (n == 1) return a[0][0];
    I s = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (a[0][c] == 0) continue;
        M minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<I> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(a[r][k]);
            minor.push_back(row);
        }
        I term = a[0][c] * det(minor);
        s += (c % 2 == 0) ? term : -term;
    }
    return s;
}

inline void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                    std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

// Invariant factors via determinantal divisors: d_k = gcd of all k x k minors,
// diagonal entry k is d_k / d_{k-1}.
inline std::vector<I> invariant_factors(const M& a, std::size_t cols) {
    std::size_t rows = a.size();
    std::size_t lim = std::min(rows, cols);
    std::vector<I> out;
    I prev = 1;
    for (std::size_t k = 1; k <= lim; ++k) {
        std::vector<std::vector<std::size_t>> rs, cs;
        std::vector<std::size_t> cur;
        subsets(rows, k, 0, cur, rs);
        subsets(cols, k, 0, cur, cs);
        I g = 0;
        for (const auto& r : rs)
            for (const auto& c : cs) {
                M sub(k, std::vector<I>(k));
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) sub[i][j] = a[r[i]][c[j]];
                I d = det(sub);
                g = std::gcd(g, d < 0 ? -d : d);
            }
        if (g == 0) {
            for (std::size_t rest = k; rest <= lim; ++rest) out.push_back(0);
            break;
        }
        out.push_back(g / prev);
        prev = g;
    }
    return out;
}

// Counts the elements of Z^n / column span of rel intersected down to a finite
// 2-group by brute force: enumerates vectors in a box of side `box` and counts
// distinct classes modulo the lattice. Only meant for tiny presentations whose
// lattice contains box * Z^n.
inline I brute_quotient_order(const M& rel, std::size_t n, I box) {
    // Build the sublattice of (Z/box)^n generated by the columns.
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(box);
    std::vector<char> in(total, 0);
    auto idx = [&](const std::vector<I>& v) {
        std::size_t x = 0;
        for (std::size_t i = 0; i < n; ++i) x = x * static_cast<std::size_t>(box) + static_cast<std::size_t>(((v[i] % box) + box) % box);
        return x;
    };
    std::vector<std::vector<I>> frontier{std::vector<I>(n, 0)};
    in[idx(frontier[0])] = 1;
    std::size_t count = 1;
    std::size_t ncols = rel.empty() ? 0 : rel[0].size();
    while (!frontier.empty()) {
        auto v = frontier.back();
        frontier.pop_back();
        for (std::size_t c = 0; c < ncols; ++c) {
            std::vector<I> w(v);
            for (std::size_t i = 0; i < n; ++i) w[i] = ((w[i] + rel[i][c]) % box + box) % box;
            std::size_t x = idx(w);
            if (!in[x]) {
                in[x] = 1;
                ++count;
                frontier.push_back(w);
            }
        }
    }
    return static_cast<I>(total / count);
}

// Exact product U * M * V in 128-bit arithmetic; returns false if the result does not
// fit back into 64 bits.
inline bool wide_triple_product(const M& u, const M& m, const M& v, std::size_t cols, M& out) {
    std::size_t r = u.size(), k = m.size();
    std::vector<std::vector<__int128>> um(r, std::vector<__int128>(cols, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t j = 0; j < cols; ++j) um[i][j] += static_cast<__int128>(u[i][t]) * m[t][j];
    out.assign(r, std::vector<I>(cols, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            __int128 acc = 0;
            for (std::size_t t = 0; t < cols; ++t) acc += um[i][t] * v[t][j];
            if (acc > INT64_MAX || acc < INT64_MIN) return false;
            out[i][j] = static_cast<I>(acc);
        }
    return true;
}

}  // namespace oracle
