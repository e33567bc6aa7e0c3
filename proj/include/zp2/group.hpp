#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace zp2 {

using Int = std::int64_t;
using Matrix = std::vector<std::vector<Int>>;

struct GroupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an extension cannot be settled from the supplied certificates.
struct ExtensionUnresolved : GroupError {
    using GroupError::GroupError;
};

// Checked int64 arithmetic; throws std::overflow_error.
Int add(Int a, Int b);
Int mul(Int a, Int b);
Int pow2(int k);
int v2(Int n);              // 2-adic valuation, n != 0
bool is_pow2(Int n);
Int mod(Int a, Int m);      // representative in [0, m), m > 0; m == 0 returns a

Matrix identity(std::size_t n);
Matrix zeros(std::size_t rows, std::size_t cols);
Matrix multiply(const Matrix& a, const Matrix& b, std::size_t a_cols = 0);
std::size_t cols_of(const Matrix& m, std::size_t fallback = 0);

struct SnfResult {
    Matrix u, d, v;         // u * m * v == d
    Matrix u_inv, v_inv;
};

SnfResult smith_normal_form(const Matrix& m, std::size_t cols = 0);

// sign(n) * 2^{v2(n)}; 0 for 0.
Int strip_odd(Int n);

class TwoLocalGroup {
public:
    TwoLocalGroup() = default;
    // Orders: 0 for Z(2), otherwise a power of two >= 2. Order 1 summands are dropped.
    explicit TwoLocalGroup(std::vector<Int> orders, std::vector<std::string> labels = {});

    const std::vector<Int>& orders() const { return orders_; }
    const std::vector<std::string>& labels() const { return labels_; }
    bool has_labels() const { return !labels_.empty(); }
    std::size_t rank() const { return orders_.size(); }
    std::size_t free_rank() const;
    bool is_trivial() const { return orders_.empty(); }
    bool is_finite() const { return free_rank() == 0; }
    // Product of finite orders (torsion order).
    Int torsion_order() const;
    // Largest finite order, 0 if any free summand; 1 for the trivial group.
    Int exponent() const;
    std::string render() const;
    std::string render_labeled() const;

    static TwoLocalGroup parse(const std::string& text);

    // Canonical permutation applied by the constructor: perm[i] is the input index
    // of the i-th canonical summand.
    static std::vector<std::size_t> canonical_order(const std::vector<Int>& orders);

private:
    std::vector<Int> orders_;
    std::vector<std::string> labels_;
};

bool group_equal(const TwoLocalGroup& a, const TwoLocalGroup& b);

struct GroupHom {
    TwoLocalGroup source;
    TwoLocalGroup target;
    Matrix matrix;          // rows: target generators, columns: source generators
};

// Throws GroupError naming the first column that breaks the order congruences.
void validate_hom(const GroupHom& h);
GroupHom compose(const GroupHom& g, const GroupHom& f);   // g after f

struct Quotient {
    TwoLocalGroup group;
    GroupHom projection;
    Matrix lift;            // columns: a preimage in the target for each quotient generator
};

struct Subgroup {
    TwoLocalGroup group;
    GroupHom inclusion;
};

Quotient cokernel(const GroupHom& h);
Subgroup kernel(const GroupHom& h);

// Scales away the odd part of the content of a relation vector.
std::vector<Int> strip_odd_content(const std::vector<Int>& v);
TwoLocalGroup quotient_by_elements(const TwoLocalGroup& g, const std::vector<std::vector<Int>>& rels);
Quotient quotient_presentation(const TwoLocalGroup& g, const std::vector<std::vector<Int>>& rels);

struct Certificate {
    std::size_t quot_index;
    Int lift_order;
};

struct ExtensionProblem {
    TwoLocalGroup sub;
    TwoLocalGroup quot;
    std::vector<Certificate> certificates;
};

TwoLocalGroup solve_extension(const ExtensionProblem& p);

}  // namespace zp2
