#include <random>

#include "algebra_fixture.hpp"
#include "doctest.h"

using namespace halg;

namespace {
const Context& ctx() {
    static const Context c = fixture::mini_context();
    return c;
}
Element T(const std::string& s, const Env& env = {}) { return parse_term(ctx(), s, env); }
std::string R(const Element& e) { return render(e); }
}  // namespace

TEST_CASE("integer expressions and interpolation") {
    CHECK(eval_int("2^(r+1)", {{"r", 3}}) == 16);
    CHECK(eval_int("3*2^r - 1", {{"r", 2}}) == 11);
    CHECK(interpolate("L4(${r+1})", {{"r", 4}}) == "L4(5)");
    CHECK(interpolate("Z/2{a} + Z/${2^r}{b}", {{"r", 2}}) == "Z/2{a} + Z/4{b}");
    CHECK_THROWS_AS(interpolate("${r", {{"r", 1}}), AlgebraError);
    CHECK_THROWS_AS(eval_int("q+1", {}), AlgebraError);
}

TEST_CASE("space expressions parse and render") {
    for (std::string s : {"S^3", "S^2 v S^5", "P^3(2^4)", "S^2 u e^4 u e^6", "CP2", "L4(3)"})
        CHECK(SpaceId::parse(s).str() == s);
    CHECK(SpaceId::parse("P^3(8)").str() == "P^3(2^3)");
    CHECK(SpaceId::parse("S^2").is_suspension());
    CHECK_FALSE(SpaceId::parse("S^1").is_suspension());
    CHECK_FALSE(SpaceId::parse("CP2").is_suspension());
    CHECK(SpaceId::parse("S^2 v S^5").suspend().str() == "S^3 v S^6");
    CHECK_THROWS_AS(SpaceId::parse("P^2(2)"), AlgebraError);
    CHECK_THROWS_AS(SpaceId::parse("P^3(6)"), AlgebraError);
}

TEST_CASE("gamma_2 = [iota_2, 2^r iota_2] normalizes to 2^(r+1) eta_2") {
    for (int r = 1; r <= 8; ++r) {
        Element g = whitehead(ctx(), T("iota_2"), T("2^r*iota_2", {{"r", r}}));
        CHECK(R(g) == std::to_string(zp2::pow2(r + 1)) + "*eta_2");
        CHECK(R(g) == R(T("2^(r+1)*eta_2", {{"r", r}})));
    }
}

TEST_CASE("whitehead base rules and zero slots") {
    CHECK(whitehead(ctx(), T("iota_2"), T("eta_2")).is_zero());
    CHECK(whitehead(ctx(), T("eta_2"), zero(SpaceId::sphere(3), SpaceId::sphere(2))).is_zero());
    // [j, j.eta_2^3] factors through [iota_2, eta_2] = 0
    CHECK(whitehead(ctx(), T("j_1^2"), T("j_1^2.eta_2^3")).is_zero());
    CHECK_FALSE(whitehead(ctx(), T("j_1^2"), T("j_2^5")).is_zero());
}

TEST_CASE("whitehead refuses non-suspension sources") {
    Context c = fixture::mini_context();
    c.declare(fixture::sym("a", "S^1", "S^2", 0, true, false));
    try {
        whitehead(c, generator(c, "a"), generator(c, "iota_2"));
        FAIL("expected refusal");
    } catch (const AlgebraError& e) {
        CHECK(std::string(e.what()).find("non-suspension source") != std::string::npos);
    }
}

TEST_CASE("composition examples") {
    CHECK(R(T("iota_2.eta_2")) == "eta_2");
    CHECK(R(T("eta_3.iota_4")) == "eta_3");
    CHECK(R(T("(2*eta_2).eta_3")) == "0");
    CHECK(R(T("eta_2.eta_3")) == "eta_2^2");
    for (int m = 1; m <= 8; ++m) CHECK(T("(2^m*eta_2).eta_3", {{"m", m}}).is_zero());
    CHECK(R(T("j_p(1).(2^0*iota_2).eta_2^3")) == "j_p(1).eta_2^3");
    for (int r = 2; r <= 8; ++r)
        CHECK(T("j_p(r).(2^(r-1)*iota_2).eta_2^3", {{"r", r}}).is_zero());
    CHECK_THROWS_AS(T("eta_2.eta_2"), AlgebraError);
}

TEST_CASE("coefficients reduce modulo known orders") {
    CHECK(R(T("5*nu'")) == "nu'");
    CHECK(R(T("6*eta_2.nu'")) == "2*eta_2.nu'");
    CHECK(R(T("-nu'")) == "3*nu'");
    CHECK(R(T("3*j_1^2.eta_2^3 + 4*j_2^5")) == "j_1^2.eta_2^3 + 4*j_2^5");
    CHECK(R(T("7*eta_2")) == "7*eta_2");
}

TEST_CASE("unknown compositions stay opaque rather than vanishing") {
    Context c = fixture::mini_context();
    c.declare(fixture::sym("h", "X", "S^2", 0, false, false));
    c.declare(fixture::sym("u", "Y", "X", 0, false, false));
    c.declare(fixture::sym("v", "Y", "X", 0, false, false));
    Element e = compose(c, generator(c, "h"), add(c, generator(c, "u"), generator(c, "v")));
    CHECK(R(e) == "h.(u + v)");
    CHECK(R(parse_term(c, R(e))) == R(e));
}

TEST_CASE("suspension") {
    CHECK(suspend(ctx(), T("[j_1^2, j_2^5]")).is_zero());
    CHECK(suspend(ctx(), zero(SpaceId::sphere(3), SpaceId::sphere(2))).is_zero());
    CHECK(R(suspend(ctx(), T("eta_2^2"))) == "eta_3^2");
    CHECK(R(suspend(ctx(), T("j_L(3).eta_2^3"))) == "2*j_1^3.nu'");
    Element s = suspend(ctx(), T("nu'"));
    CHECK(R(s) == "Sigma nu'");
    CHECK(is_suspension(ctx(), s));
    CHECK(s.target().str() == "S^4");
}

TEST_CASE("naturality push and scalar extraction") {
    Element b = T("[j_L(2), 2*j_L(2), 2*j_L(2)]{gamma_3}");
    Element pushed = naturality_push(ctx(), T("chibar(2)"), b);
    CHECK(R(pushed) == "[j_L(0), 2*j_L(0), 2*j_L(0)]{gamma_3}");
    auto [k, base] = extract_scalars(ctx(), pushed);
    CHECK(k == 4);
    CHECK(R(base) == "[j_L(0), j_L(0), j_L(0)]{gamma_3}");
    Element same = naturality_push(ctx(), T("iota_2"), T("[iota_2, iota_2, eta_2]{t}"));
    CHECK(R(same) == "[iota_2, iota_2, eta_2]{t}");
    CHECK_THROWS_AS(naturality_push(ctx(), T("eta_3"), b), AlgebraError);
}

TEST_CASE("triple indeterminacy") {
    Element j = T("j_L(0)");
    using G = std::optional<zp2::TwoLocalGroup>;
    CHECK(triple_indeterminacy(j, j, j, {G{zp2::TwoLocalGroup{}}, G{zp2::TwoLocalGroup{}}, G{zp2::TwoLocalGroup{}}}).is_trivial());
    CHECK_THROWS_AS(triple_indeterminacy(j, j, j, {G{}, G{zp2::TwoLocalGroup{}}, G{zp2::TwoLocalGroup{}}}), MissingFact);
    CHECK_THROWS_AS(triple_indeterminacy(j, j, j, {G{zp2::TwoLocalGroup({2})}, G{zp2::TwoLocalGroup{}}, G{zp2::TwoLocalGroup{}}}),
                    AlgebraError);
}

TEST_CASE("parse and render round trip") {
    std::vector<std::string> corpus = {"2^(r+1)*eta_2", "2^r iota_2", "[iota_2, 2^r*iota_2]", "j_L(m) . eta_2^3",
                                       "j_1^2.eta_2^3 + j_2^5", "[j_1^2, j_2^5]", "Sigma nu'", "-eta_2 + 3*eta_2",
                                       "[j_L(2), j_L(2), 2*j_L(2)]{g}", "+-2*nu'", "eta_2.nu'", "nu_4 - 2*nu_4"};
    Env env{{"r", 3}, {"m", 3}};
    for (const auto& s : corpus) {
        Element e = T(s, env);
        CHECK(R(T(R(e))) == R(e));
    }
    CHECK_THROWS_AS(T("3"), AlgebraError);
    CHECK_THROWS_AS(T("unknown_gen"), MissingFact);
    CHECK_THROWS_AS(T("[iota_2"), AlgebraError);
}

TEST_CASE("coordinates in a labeled home group") {
    auto g = zp2::TwoLocalGroup({2, 0}, {"j_1^2.eta_2^3", "j_2^5"});
    CHECK(coordinates(ctx(), T("3*j_2^5 + j_1^2.eta_2^3"), g) == std::vector<Int>{1, 3});
    CHECK_THROWS_AS(coordinates(ctx(), T("[j_1^2, j_2^5]"), g), MissingFact);
    Element back = from_coordinates(ctx(), {1, 3}, g, SpaceId::sphere(5), SpaceId::parse("S^2 v S^5"));
    CHECK(R(back) == "j_1^2.eta_2^3 + 3*j_2^5");
}

// ---- properties ----

namespace {

// Generators with suspension sources into S^2 and S^3, with their degrees.
std::vector<std::string> pool_into(int n) {
    if (n == 2) return {"iota_2", "eta_2", "eta_2^2", "eta_2^3", "eta_2.nu'"};
    return {"iota_3", "eta_3", "eta_3^2", "nu'", "eta_3^3"};
}

Element random_term(std::mt19937& rng, int target) {
    auto pool = pool_into(target);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> coef(-5, 5);
    return scale(ctx(), T(pool[pick(rng)]), coef(rng));
}

}  // namespace

TEST_CASE("property: suspension kills every Whitehead product (200 random brackets)") {
    std::mt19937 rng(7);
    int nonzero_brackets = 0;
    for (int i = 0; i < 200; ++i) {
        int tgt = (i % 2) ? 2 : 3;
        Element a = random_term(rng, tgt), b = random_term(rng, tgt);
        Element w = whitehead(ctx(), a, b);
        if (!w.is_zero()) ++nonzero_brackets;
        CHECK(suspend(ctx(), w).is_zero());
    }
    CHECK(nonzero_brackets > 20);
}

TEST_CASE("property: whitehead is bilinear in integer scalars") {
    std::mt19937 rng(11);
    for (int i = 0; i < 60; ++i) {
        int tgt = (i % 2) ? 2 : 3;
        Element a = random_term(rng, tgt), b = random_term(rng, tgt);
        for (int k = -3; k <= 3; ++k) {
            std::string lhs = R(whitehead(ctx(), scale(ctx(), a, k), b));
            CHECK(lhs == R(scale(ctx(), whitehead(ctx(), a, b), k)));
            CHECK(lhs == R(whitehead(ctx(), a, scale(ctx(), b, k))));
        }
    }
}

TEST_CASE("property: composition is associative on random chains") {
    // maps between spheres: (name, source dim, target dim)
    struct Map {
        std::string name;
        int s, t;
    };
    std::vector<Map> maps;
    for (int n = 2; n <= 12; ++n) maps.push_back({"eta_" + std::to_string(n), n + 1, n});
    for (int n = 2; n <= 14; ++n) maps.push_back({"iota_" + std::to_string(n), n, n});
    maps.push_back({"nu'", 6, 3});
    maps.push_back({"Sigma nu'", 7, 4});
    maps.push_back({"nu_4", 7, 4});
    std::mt19937 rng(5);
    int checked = 0;
    for (int trial = 0; trial < 2000 && checked < 300; ++trial) {
        const Map& f = maps[rng() % maps.size()];
        std::vector<const Map*> gs, hs;
        for (const auto& m : maps)
            if (m.t == f.s) gs.push_back(&m);
        if (gs.empty()) continue;
        const Map& g = *gs[rng() % gs.size()];
        for (const auto& m : maps)
            if (m.t == g.s) hs.push_back(&m);
        if (hs.empty()) continue;
        const Map& h = *hs[rng() % hs.size()];
        Int a = static_cast<Int>(rng() % 5) + 1;
        Element F = scale(ctx(), T(f.name), a), G = T(g.name), H = T(h.name);
        CHECK(R(compose(ctx(), compose(ctx(), F, G), H)) == R(compose(ctx(), F, compose(ctx(), G, H))));
        ++checked;
    }
    CHECK(checked >= 300);
}

TEST_CASE("property: adding order times a term does not change the normal form") {
    std::vector<std::pair<std::string, Int>> known = {{"nu'", 4}, {"eta_3", 2}, {"eta_2.nu'", 4}, {"eta_2^2", 2},
                                                      {"j_1^2.eta_2^3", 2}};
    for (const auto& [w, ord] : known)
        for (Int k = -4; k <= 4; ++k) {
            Element e = scale(ctx(), T(w), k);
            CHECK(R(add(ctx(), e, scale(ctx(), T(w), ord))) == R(e));
        }
}

TEST_CASE("property: rule application order does not change the normal form") {
    std::vector<std::string> words = {"chibar(2).j_L(2).eta_2", "chibar(2).[j_L(2), j_L(2)]"};
    for (const auto& s : words) {
        Element raw = T(s);
        (void)raw;
    }
    // Build a word with two rule sites by hand: [iota_2, iota_2] inside a bracket
    // composed after chibar(2).j_L(2).
    Context c = fixture::mini_context();
    Element e = parse_term(c, "chibar(2).j_L(2)");
    CHECK(R(e) == "j_L(0)");
    std::string expected = R(e);
    Factor a, b;
    a.atom = "chibar(2)";
    b.atom = "j_L(2)";
    Element raw(SpaceId::sphere(2), SpaceId::parse("CP2"));
    raw.mutable_terms().push_back(Term{1, Word{a, b}});
    auto sites = rule_sites(c, raw);
    REQUIRE(!sites.empty());
    for (const auto& [pos, len] : sites) CHECK(R(apply_rule_at(c, raw, pos, len)) == expected);
}
