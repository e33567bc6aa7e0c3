#include "doctest.h"
#include "les/script.hpp"

#include <algorithm>
#include <functional>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

using namespace les;

namespace {

const kb::Catalog& catalog() {
    static const kb::Catalog c = kb::Catalog::load(HOMOTOPY_DEFAULT_KB);
    return c;
}

const halg::Context& ctx() {
    static const halg::Context c = catalog().build_context();
    return c;
}

const ScriptLibrary& library() {
    static const ScriptLibrary l(HOMOTOPY_SCRIPT_DIR);
    return l;
}

RunResult run(const std::string& script, const std::string& param, long long value,
              const kb::Catalog& kb = catalog(), const halg::Context& c = ctx()) {
    return run_script(library().get(script), {{param, value}}, RunOptions{&kb, &c, &library()});
}

std::string group_of(const RunResult& r, const std::string& name) {
    return std::get<LabeledGroup>(r.bindings.at(name)).group.render();
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ScriptError& e) {
        return e.kind;
    }
    FAIL("no ScriptError raised");
    return ErrorKind::Internal;
}

std::string pow2s(int e) { return "Z/" + std::to_string(zp2::pow2(e)); }

}  // namespace

TEST_CASE("script parsing reports the offending line") {
    CHECK_THROWS_WITH_AS(Script::parse("param r 1..3\n\nx = frobnicate a\n", "s"), "s:3: unknown operation 'frobnicate'",
                         ScriptError);
    CHECK_THROWS_WITH_AS(Script::parse("x = kernel\n", "s"), "s:1: wrong number of arguments for 'kernel'", ScriptError);
    CHECK_THROWS_WITH_AS(Script::parse("param r 1\n", "s"), "s:1: expected a range LO..HI", ScriptError);
    CHECK_THROWS_AS(Script::parse("x = term \"eta_2\n", "s"), ScriptError);
    CHECK_THROWS_AS(Script::parse("[r == 1\n", "s"), ScriptError);
    auto s = Script::parse("# c\nparam r 1..3\n[r >= 2] x = term \"eta_2\"  # trailing\nrequire r*2 >= 2\n");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps[0].guard == "r >= 2");
    CHECK(s.steps[0].args == std::vector<std::string>{"eta_2"});
    CHECK(s.steps[0].quoted == std::vector<bool>{true});
    CHECK(s.steps[1].args == std::vector<std::string>{"r*2 >= 2"});
    CHECK(s.params.at("r") == std::pair<long long, long long>{1, 3});
}

TEST_CASE("a script without a terminal group is rejected") {
    auto s = Script::parse("", "empty");
    RunOptions o{&catalog(), &ctx(), &library()};
    CHECK_THROWS_WITH_AS(run_script(s, {}, o), "empty: no terminal group (bind a group to 'result')", ScriptError);
    auto t = Script::parse("result = term \"eta_2\"\n", "elem");
    CHECK_THROWS_WITH_AS(run_script(t, {}, o), "elem: no terminal group (bind a group to 'result')", ScriptError);
}

TEST_CASE("parameters are range checked before any step runs") {
    auto e = kind_of([] { run("pi5_P3", "r", 0); });
    CHECK(e == ErrorKind::Validation);
    CHECK(kind_of([] { run("pi5_P3", "r", 62); }) == ErrorKind::Validation);
    CHECK(kind_of([] { run("pi5_P3", "m", 2); }) == ErrorKind::Validation);
    try {
        run("pi5_P3", "r", 0);
    } catch (const ScriptError& err) {
        CHECK(err.step == 0);
        CHECK(std::string(err.what()).find("outside 1..61") != std::string::npos);
    }
}

TEST_CASE("failed requirements name the step and the bindings") {
    auto s = Script::parse("param r 1..9\nx = int \"r+1\"\nrequire x == 7\nresult = lookup_group \"S^3\" 6\n", "req");
    RunOptions o{&catalog(), &ctx(), &library()};
    try {
        run_script(s, {{"r", 2}}, o);
        FAIL("expected an assertion failure");
    } catch (const ScriptError& e) {
        CHECK(e.kind == ErrorKind::Assertion);
        CHECK(e.step == 2);
        std::string w = e.what();
        CHECK(w.find("req:3:") == 0);
        CHECK(w.find("x = 3") != std::string::npos);
    }
}

TEST_CASE("every shipped script runs over its whole tested range and each guarded step fires somewhere") {
    struct Case {
        std::string script, param;
        int lo, hi;
    };
    const Case cases[] = {{"pi5_L4m", "m", 0, 8}, {"pi6_L4m", "m", 1, 8}, {"gamma3", "r", 1, 8},
                          {"pi5_P3", "r", 1, 8},  {"pi6_J3", "r", 1, 8},  {"pi6_P3", "r", 1, 8}};
    for (const auto& c : cases) {
        const Script& s = library().get(c.script);
        std::set<int> fired;
        for (int v = c.lo; v <= c.hi; ++v) {
            RunResult r;
            REQUIRE_NOTHROW(r = run(c.script, c.param, v));
            for (const auto& st : r.steps)
                if (st.script == c.script) fired.insert(st.index);
        }
        for (std::size_t i = 1; i <= s.steps.size(); ++i) CHECK_MESSAGE(fired.count(static_cast<int>(i)), c.script, " step ", i);
    }
}

TEST_CASE("every consumed fact is in the knowledge base and carries its provenance") {
    for (int r = 1; r <= 3; ++r) {
        auto res = run("pi6_P3", "r", r);
        CHECK(!res.facts.empty());
        std::set<std::string> ids;
        for (const auto& f : res.facts) {
            const kb::Fact* fact = catalog().by_id(f.id);
            REQUIRE_MESSAGE(fact != nullptr, f.id);
            CHECK(f.quote == fact->quote());
            CHECK(!f.locator.empty());
            CHECK(ids.insert(f.id).second);
        }
        CHECK(ids.count("lift_eta3_sq") == 1);
        CHECK(ids.count("lift_eta4_sq") == 1);
        CHECK(ids.count("triple_product_cp2") == 1);
        CHECK(ids.count("pi6_p3_2") == (r == 1 ? 1 : 0));
        CHECK(ids.count("lift_nu_prime") == (r == 1 ? 0 : 1));
    }
}

TEST_CASE("pi_5 of L4(m)") {
    CHECK(run("pi5_L4m", "m", 0).group.render_labeled() == "Z(2){beta(0)}");
    CHECK(run("pi5_L4m", "m", 1).group.render() == "Z/4 + Z(2)");
    CHECK(run("pi5_L4m", "m", 3).group.render_labeled() == "Z/2{j_L(3).eta_2^3} + Z/2{eta~_4(3)} + Z(2){beta(3)}");
}

TEST_CASE("pi_6 of L4(m) and the boundary coefficient on nu_4") {
    auto r1 = run("pi6_L4m", "m", 1);
    CHECK(r1.group.render() == "Z/2 + Z/2 + Z/4");
    CHECK(std::get<long long>(r1.bindings.at("c")) == 2);
    auto r2 = run("pi6_L4m", "m", 2);
    CHECK(r2.group.render() == "Z/2 + Z/2 + Z/2 + Z/8");
    for (int m = 3; m <= 8; ++m) {
        auto r = run("pi6_L4m", "m", m);
        CHECK(std::get<long long>(r.bindings.at("c")) == zp2::pow2(m));
        CHECK(r.group.render() == "Z/2 + Z/2 + Z/4 + " + pow2s(m));
        CHECK(r.group.render_labeled().find(pow2s(m) + "{[j_L(" + std::to_string(m) + "), beta(" + std::to_string(m) +
                                            ")]}") != std::string::npos);
    }
}

TEST_CASE("the third attaching class is 3 * 2^r beta with no torsion part") {
    for (int r = 1; r <= 8; ++r) {
        auto res = run("gamma3", "r", r);
        CHECK(std::get<long long>(res.bindings.at("b")) == 3 * zp2::pow2(r));
        CHECK(std::get<long long>(res.bindings.at("v_a")) == 0);
        CHECK(std::get<long long>(res.bindings.at("v_c")) == 0);
        CHECK(std::get<long long>(res.bindings.at("s")) == zp2::pow2(2 * r));
        CHECK(group_of(res, "indet") == "0");
    }
}

TEST_CASE("pi_5 and pi_6 of the mod 2^r Moore space") {
    CHECK(run("pi5_P3", "r", 1).group.render() == "Z/2 + Z/2 + Z/2");
    CHECK(run("pi6_P3", "r", 1).group.render() == "Z/2 + Z/2 + Z/2 + Z/2 + Z/2");
    auto p = run("pi5_P3", "r", 3);
    CHECK(p.group.render() == "Z/2 + Z/2 + Z/2 + Z/8");
    CHECK(p.group.render_labeled().find("Z/2{xi_1(3)}") != std::string::npos);
    for (int r = 2; r <= 8; ++r) {
        CHECK(run("pi5_P3", "r", r).group.render() == "Z/2 + Z/2 + Z/2 + " + pow2s(r));
        auto q = run("pi6_P3", "r", r);
        CHECK(q.group.render_labeled().find("Z/4{nu~'(" + std::to_string(r) + ")}") != std::string::npos);
    }
}

TEST_CASE("the boundary on a suspension is the attaching map composed on the left") {
    for (int m = 0; m <= 1; ++m) {
        BoundaryRule rule{halg::parse_term(ctx(), "2^m iota_3", {{"m", m}}),
                          halg::parse_term(ctx(), "j_P4(m)", {{"m", m}})};
        auto d = boundary_on_suspension(ctx(), rule, halg::parse_term(ctx(), "Sigma nu'"));
        CHECK(halg::render(d) == (m == 0 ? "j_P4(0).nu'" : "2*j_P4(1).nu'"));
    }
    BoundaryRule rule{halg::parse_term(ctx(), "4*eta_2"), halg::parse_term(ctx(), "j_1^2")};
    CHECK(halg::render(boundary_on_suspension(ctx(), rule, halg::parse_term(ctx(), "Sigma nu'"))) == "0");
    CHECK_THROWS_WITH_AS(boundary_on_suspension(ctx(), rule, halg::parse_term(ctx(), "nu_4")),
                         doctest::Contains("KB fact required: boundary of nu_4"), halg::MissingFact);
}

TEST_CASE("replaying a derivation gives the same transcript digest") {
    auto a = run("pi6_P3", "r", 3);
    auto b = run("pi6_P3", "r", 3);
    CHECK(a.transcript_digest() == b.transcript_digest());
    CHECK(a.transcript_text() == b.transcript_text());
    CHECK(a.transcript_digest().size() == 64);
    CHECK(a.transcript_digest() != run("pi6_P3", "r", 4).transcript_digest());
    CHECK(std::regex_search(a.transcript_text(), std::regex("\\[pi6_P3 \\d+\\] ")));
}

TEST_CASE("the machine transcript is one JSON object per line ending with the result") {
    auto a = run("pi5_P3", "r", 2);
    std::istringstream in(a.transcript_machine());
    std::string line, last;
    int steps = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        if (j["type"] == "step") ++steps;
        last = line;
    }
    CHECK(steps == static_cast<int>(a.steps.size()));
    CHECK(nlohmann::json::parse(last)["group"] == "Z/2 + Z/2 + Z/2 + Z/4");
}

TEST_CASE("computed sequences are exact at the middle term") {
    auto audit = [](const RunResult& r, const char* up, const char* fiber, const char* base, const char* down,
                    const char* d_up, const char* d_down) {
        LesSegment s;
        auto g = [&](const char* n) -> std::optional<TwoLocalGroup> {
            if (std::string(n) == "_") return TwoLocalGroup{};
            return std::get<LabeledGroup>(r.bindings.at(n)).group;
        };
        s.base_up = g(up);
        s.fiber = g(fiber);
        s.cofiber = r.group;
        s.base = g(base);
        s.fiber_down = g(down);
        s.d_up = std::get<zp2::GroupHom>(r.bindings.at(d_up));
        s.d_down = std::get<zp2::GroupHom>(r.bindings.at(d_down));
        return audit_exactness(s);
    };
    for (int r = 1; r <= 6; ++r) CHECK(audit(run("pi5_P3", "r", r), "base6", "fib5", "base5", "_", "d6", "d5") == true);
    for (int r = 2; r <= 6; ++r)
        CHECK(audit(run("pi6_P3", "r", r), "base7", "fib6", "base6", "p5.fib5", "d6", "d5") == true);
    // a free summand is outside what the order count can decide
    CHECK(!audit(run("pi5_L4m", "m", 3), "base6", "fib5", "base5", "fib4", "d5", "d4").has_value());
    CHECK(!audit(run("pi6_L4m", "m", 3), "base7", "fib6", "base6", "fib5", "d6", "d5").has_value());
}

TEST_CASE("segments fill what the knowledge base knows and list the rest") {
    auto f = jf::make_map_spec(ctx(), "2^m eta_2", {{"m", 2}});
    auto s = assemble_segment(catalog(), ctx(), f, 5);
    CHECK(s.fiber->render() == "Z/2 + Z(2)");
    CHECK(s.base_up->render_labeled() == "Z/2{eta_4^2}");
    CHECK(s.fiber_down->render() == "Z/2");
    CHECK(!s.cofiber.has_value());
    REQUIRE(s.d_up.has_value());
    CHECK(s.d_up->matrix == zp2::Matrix{{0}, {0}});
    CHECK(s.missing == std::vector<std::string>{"KB fact required: pi_5(L4(2))"});

    auto six = assemble_segment(catalog(), ctx(), f, 6);
    CHECK(!six.d_up.has_value());
    CHECK(std::find_if(six.missing.begin(), six.missing.end(), [](const std::string& m) {
              return m.find("boundary of nu_4") != std::string::npos;
          }) != six.missing.end());

    auto g = jf::make_map_spec(ctx(), "2^r iota_2", {{"r", 2}});
    auto low = assemble_segment(catalog(), ctx(), g, 1);
    CHECK(low.filled());
    CHECK(audit_exactness(low) == true);
    auto k5 = assemble_segment(catalog(), ctx(), g, 5);
    CHECK(k5.base_up->render_labeled() == "Z/4{nu'}");
    CHECK(k5.base->render_labeled() == "Z/2{eta_3^2}");
    CHECK(!k5.filled());
    CHECK_THROWS_AS(scenario_for(jf::make_map_spec(ctx(), "eta_3")), jf::FiltrationError);
}

TEST_CASE("removing the order-4 lift of nu' leaves the pi_6 extension unresolved") {
    auto kb = catalog().without({"lift_nu_prime"});
    auto c = kb.build_context();
    for (int r = 2; r <= 8; ++r) {
        try {
            run("pi6_P3", "r", r, kb, c);
            FAIL("expected an unresolved extension");
        } catch (const ScriptError& e) {
            CHECK(e.kind == ErrorKind::Extension);
            CHECK(std::string(e.what()).find("extension unresolved") != std::string::npos);
        }
    }
    // r = 1 reads the recorded group and does not need the lift
    CHECK(run("pi6_P3", "r", 1, kb, c).group.render() == "Z/2 + Z/2 + Z/2 + Z/2 + Z/2");
}

TEST_CASE("a missing group fact surfaces as a missing fact error") {
    auto kb = catalog().without({"wedge_pi6_s2s5"});
    auto c = kb.build_context();
    CHECK(kind_of([&] { run("pi6_L4m", "m", 2, kb, c); }) == ErrorKind::MissingFact);
}

TEST_CASE("the order check catches an inconsistent recorded group") {
    std::string text = catalog().serialize();
    const std::string wu = "value: Z/2{w_1} + Z/2{w_2} + Z/2{w_3} + Z/2{w_4} + Z/2{w_5}";
    auto at = text.find(wu);
    REQUIRE(at != std::string::npos);
    text.replace(at, wu.size(), "value: Z/2{w_1} + Z/2{w_2} + Z/2{w_3} + Z/2{w_4}");
    auto kb = kb::Catalog::parse(text);
    auto c = kb.build_context();
    CHECK(kind_of([&] { run("pi6_P3", "r", 1, kb, c); }) == ErrorKind::Assertion);
}
