#include "zp2/group.hpp"

#include <cstdlib>

namespace zp2 {

Int add(Int a, Int b) {
    Int r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in addition");
    return r;
}

Int mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in multiplication");
    return r;
}

Int pow2(int k) {
    if (k < 0 || k > 62) throw std::overflow_error("2^k out of range: k=" + std::to_string(k));
    return Int{1} << k;
}

int v2(Int n) {
    if (n == 0) throw std::invalid_argument("v2(0)");
    return __builtin_ctzll(static_cast<unsigned long long>(n));
}

bool is_pow2(Int n) { return n > 0 && (n & (n - 1)) == 0; }

Int mod(Int a, Int m) {
    if (m == 0) return a;
    Int r = a % m;
    return r < 0 ? r + m : r;
}

Int strip_odd(Int n) {
    if (n == 0) return 0;
    Int p = Int{1} << v2(n);
    return n < 0 ? -p : p;
}

Matrix identity(std::size_t n) {
    Matrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, std::vector<Int>(cols, 0)); }

std::size_t cols_of(const Matrix& m, std::size_t fallback) { return m.empty() ? fallback : m[0].size(); }

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t a_cols) {
    std::size_t n = a.size();
    std::size_t k = cols_of(a, a_cols);
    std::size_t c = cols_of(b, 0);
    if (b.size() != k) throw std::invalid_argument("matrix dimension mismatch");
    Matrix r = zeros(n, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            for (std::size_t j = 0; j < c; ++j) r[i][j] = add(r[i][j], mul(a[i][t], b[t][j]));
        }
    return r;
}

namespace {

// Quotient rounded to nearest, so remainders stay within half the pivot.
Int round_div(Int a, Int p) {
    Int q = a / p, r = a % p;
    Int ap = p < 0 ? -p : p;
    if (2 * (r < 0 ? -r : r) > ap) q += ((r < 0) == (p < 0)) ? 1 : -1;
    return q;
}

struct Reducer {
    Matrix a, u, ui, v, vi;
    std::size_t rows, cols;

    void row_sub(std::size_t i, std::size_t t, Int q) {  // R_i -= q R_t
        if (q == 0) return;
        for (std::size_t j = 0; j < cols; ++j) a[i][j] = add(a[i][j], -mul(q, a[t][j]));
        for (std::size_t j = 0; j < rows; ++j) u[i][j] = add(u[i][j], -mul(q, u[t][j]));
        for (std::size_t j = 0; j < rows; ++j) ui[j][t] = add(ui[j][t], mul(q, ui[j][i]));
    }
    void row_swap(std::size_t i, std::size_t t) {
        if (i == t) return;
        std::swap(a[i], a[t]);
        std::swap(u[i], u[t]);
        for (std::size_t j = 0; j < rows; ++j) std::swap(ui[j][i], ui[j][t]);
    }
    void row_neg(std::size_t i) {
        for (auto& x : a[i]) x = -x;
        for (auto& x : u[i]) x = -x;
        for (std::size_t j = 0; j < rows; ++j) ui[j][i] = -ui[j][i];
    }
    void col_sub(std::size_t j, std::size_t t, Int q) {  // C_j -= q C_t
        if (q == 0) return;
        for (std::size_t i = 0; i < rows; ++i) a[i][j] = add(a[i][j], -mul(q, a[i][t]));
        for (std::size_t i = 0; i < cols; ++i) v[i][j] = add(v[i][j], -mul(q, v[i][t]));
        for (std::size_t i = 0; i < cols; ++i) vi[t][i] = add(vi[t][i], mul(q, vi[j][i]));
    }
    void col_swap(std::size_t j, std::size_t t) {
        if (j == t) return;
        for (std::size_t i = 0; i < rows; ++i) std::swap(a[i][j], a[i][t]);
        for (std::size_t i = 0; i < cols; ++i) std::swap(v[i][j], v[i][t]);
        std::swap(vi[j], vi[t]);
    }

    // Smallest nonzero |entry| in the trailing block; ties go to the lowest row, then column.
    bool pick_pivot(std::size_t t, std::size_t& pi, std::size_t& pj) const {
        Int best = 0;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j) {
                Int x = a[i][j] < 0 ? -a[i][j] : a[i][j];
                if (x != 0 && (best == 0 || x < best)) {
                    best = x;
                    pi = i;
                    pj = j;
                }
            }
        return best != 0;
    }

    void run() {
        std::size_t lim = rows < cols ? rows : cols;
        for (std::size_t t = 0; t < lim; ++t) {
            std::size_t pi = 0, pj = 0;
            if (!pick_pivot(t, pi, pj)) break;
            row_swap(t, pi);
            col_swap(t, pj);
            for (;;) {
                bool dirty = false;
                for (std::size_t i = t + 1; i < rows; ++i) {
                    row_sub(i, t, round_div(a[i][t], a[t][t]));
                    if (a[i][t] != 0) dirty = true;
                }
                for (std::size_t j = t + 1; j < cols; ++j) {
                    col_sub(j, t, round_div(a[t][j], a[t][t]));
                    if (a[t][j] != 0) dirty = true;
                }
                if (!dirty) {
                    // Enforce divisibility of the remaining block by the pivot.
                    std::size_t bad = rows;
                    for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
                        for (std::size_t j = t + 1; j < cols; ++j)
                            if (a[i][j] % a[t][t] != 0) {
                                bad = i;
                                break;
                            }
                    if (bad == rows) break;
                    row_sub(t, bad, -1);
                    continue;
                }
                // Move the smallest nonzero entry of row t / column t to the pivot.
                Int best = a[t][t] < 0 ? -a[t][t] : a[t][t];
                std::size_t bi = t, bj = t;
                for (std::size_t i = t + 1; i < rows; ++i) {
                    Int x = a[i][t] < 0 ? -a[i][t] : a[i][t];
                    if (x != 0 && x < best) best = x, bi = i, bj = t;
                }
                for (std::size_t j = t + 1; j < cols; ++j) {
                    Int x = a[t][j] < 0 ? -a[t][j] : a[t][j];
                    if (x != 0 && x < best) best = x, bi = t, bj = j;
                }
                row_swap(t, bi);
                col_swap(t, bj);
            }
            if (a[t][t] < 0) row_neg(t);
        }
    }
};

}  // namespace

SnfResult smith_normal_form(const Matrix& m, std::size_t cols) {
    Reducer r;
    r.rows = m.size();
    r.cols = cols_of(m, cols);
    for (const auto& row : m)
        if (row.size() != r.cols) throw std::invalid_argument("ragged matrix");
    r.a = m;
    r.u = identity(r.rows);
    r.ui = identity(r.rows);
    r.v = identity(r.cols);
    r.vi = identity(r.cols);
    r.run();
    return SnfResult{r.u, r.a, r.v, r.ui, r.vi};
}

}  // namespace zp2
