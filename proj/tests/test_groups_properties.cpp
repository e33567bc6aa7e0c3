#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "zp2/group.hpp"

using namespace zp2;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    Matrix m = zeros(r, c);
    for (auto& row : m)
        for (auto& x : row) x = d(rng);
    return m;
}

TwoLocalGroup random_group(std::mt19937_64& rng, std::size_t max_rank, bool finite) {
    std::uniform_int_distribution<int> rk(0, static_cast<int>(max_rank));
    std::uniform_int_distribution<int> e(finite ? 1 : 0, 4);
    std::vector<Int> o;
    for (int i = rk(rng); i > 0; --i) {
        int k = e(rng);
        o.push_back(k == 0 ? 0 : pow2(k));
    }
    return TwoLocalGroup(o);
}

// Random compatible hom: entries for finite source columns are scaled so the congruences hold.
GroupHom random_hom(std::mt19937_64& rng, const TwoLocalGroup& s, const TwoLocalGroup& t) {
    std::uniform_int_distribution<int> d(-5, 5);
    Matrix m = zeros(t.rank(), s.rank());
    for (std::size_t i = 0; i < t.rank(); ++i)
        for (std::size_t j = 0; j < s.rank(); ++j) {
            Int x = d(rng);
            Int so = s.orders()[j], to = t.orders()[i];
            if (so != 0) {
                if (to == 0) {
                    x = 0;
                } else if (so < to) {
                    x *= to / so;
                }
            }
            m[i][j] = to == 0 ? x : mod(x, to);
        }
    return GroupHom{s, t, m};
}

Int det_small(const Matrix& m) {
    oracle::M a;
    for (const auto& r : m) a.emplace_back(r.begin(), r.end());
    return oracle::det(a);
}

}  // namespace

TEST_CASE("snf agrees with the determinantal-divisor oracle on 1000 random matrices") {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> dim(1, 5);
    int agreed = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t r = dim(rng), c = dim(rng);
        Matrix m = random_matrix(rng, r, c, -20, 20);
        auto s = smith_normal_form(m);
        oracle::M umv;
        REQUIRE(oracle::wide_triple_product(s.u, m, s.v, c, umv));
        REQUIRE(umv == s.d);
        Int du = det_small(s.u), dv = det_small(s.v);
        REQUIRE((du == 1 || du == -1));
        REQUIRE((dv == 1 || dv == -1));
        oracle::M uu, vv;
        REQUIRE(oracle::wide_triple_product(s.u, s.u_inv, identity(r), r, uu));
        REQUIRE(uu == identity(r));
        REQUIRE(oracle::wide_triple_product(s.v, s.v_inv, identity(c), c, vv));
        REQUIRE(vv == identity(c));
        std::vector<Int> diag;
        for (std::size_t i = 0; i < std::min(r, c); ++i) {
            for (std::size_t j = 0; j < c; ++j)
                if (j != i) REQUIRE(s.d[i][j] == 0);
            diag.push_back(s.d[i][i]);
        }
        for (std::size_t i = 0; i + 1 < diag.size(); ++i) {
            REQUIRE(diag[i] >= 0);
            if (diag[i + 1] != 0) REQUIRE(diag[i] != 0);
            if (diag[i] != 0) REQUIRE(diag[i + 1] % diag[i] == 0);
        }
        oracle::M om;
        for (const auto& row : m) om.emplace_back(row.begin(), row.end());
        REQUIRE(diag == oracle::invariant_factors(om, c));
        ++agreed;
    }
    CHECK(agreed == 1000);
}

TEST_CASE("composition of random compatible homs is associative") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = random_group(rng, 3, false), b = random_group(rng, 3, false);
        auto c = random_group(rng, 3, false), d = random_group(rng, 3, false);
        auto f = random_hom(rng, a, b), g = random_hom(rng, b, c), h = random_hom(rng, c, d);
        validate_hom(f);
        validate_hom(g);
        validate_hom(h);
        CHECK(compose(h, compose(g, f)).matrix == compose(compose(h, g), f).matrix);
    }
}

TEST_CASE("cokernel of a surjection is trivial") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto t = random_group(rng, 4, false);
        auto s = TwoLocalGroup(t.orders());
        GroupHom id{s, t, identity(t.rank())};
        // identity columns plus arbitrary extra columns
        auto extra = random_hom(rng, random_group(rng, 2, false), t);
        Matrix m = id.matrix;
        std::vector<Int> so = t.orders();
        so.insert(so.end(), extra.source.orders().begin(), extra.source.orders().end());
        for (std::size_t i = 0; i < t.rank(); ++i) m[i].insert(m[i].end(), extra.matrix[i].begin(), extra.matrix[i].end());
        GroupHom h{TwoLocalGroup(std::vector<Int>(so.size(), 0)), t, m};
        CHECK(cokernel(h).group.is_trivial());
    }
}

TEST_CASE("quotient order divides the group order and matches a brute-force count") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> nrel(0, 3), ent(-9, 9);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = random_group(rng, 3, true);
        std::vector<std::vector<Int>> rels;
        for (int k = nrel(rng); k > 0; --k) {
            std::vector<Int> v(g.rank());
            for (auto& x : v) x = ent(rng);
            rels.push_back(v);
        }
        auto q = quotient_by_elements(g, rels);
        CHECK(g.torsion_order() % q.torsion_order() == 0);
        CHECK(q.is_finite());
        // Oracle: quotient of Z^n by group relations plus stripped relations.
        oracle::M rel(g.rank());
        Int box = 1;
        for (auto o : g.orders()) box = std::max(box, o);
        for (std::size_t i = 0; i < g.rank(); ++i) {
            for (std::size_t j = 0; j < g.rank(); ++j) rel[i].push_back(i == j ? g.orders()[i] : 0);
            for (const auto& r : rels) rel[i].push_back(strip_odd_content(r)[i]);
        }
        Int brute = oracle::brute_quotient_order(rel, g.rank(), box);
        // the brute count includes odd torsion, which 2-localization discards
        CHECK(q.torsion_order() == (Int{1} << __builtin_ctzll(static_cast<unsigned long long>(brute))));
    }
}

TEST_CASE("kernel and image free ranks add up to the source free rank") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        auto s = random_group(rng, 4, false), t = random_group(rng, 4, false);
        auto h = random_hom(rng, s, t);
        auto k = kernel(h);
        auto c = cokernel(h);
        std::size_t image_free = t.free_rank() - c.group.free_rank();
        CHECK(s.free_rank() == k.group.free_rank() + image_free);
        auto comp = compose(h, k.inclusion);
        for (const auto& row : comp.matrix)
            for (auto x : row) CHECK(x == 0);
        if (s.is_finite() && t.is_finite()) {
            // |source| = |kernel| * |image| and |image| = |target| / |coker|
            CHECK(s.torsion_order() * c.group.torsion_order() == k.group.torsion_order() * t.torsion_order());
        }
    }
}

TEST_CASE("complete certificates give an extension of order |A|*|B|") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 300; ++trial) {
        auto a = random_group(rng, 4, true), b = random_group(rng, 3, true);
        std::vector<Certificate> certs;
        for (std::size_t i = 0; i < b.rank(); ++i) certs.push_back({i, b.orders()[i]});
        auto e = solve_extension({a, b, certs});
        CHECK(e.torsion_order() == a.torsion_order() * b.torsion_order());
    }
}
