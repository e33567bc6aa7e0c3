#include "commands.hpp"

#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "jf/filtration.hpp"
#include "json.hpp"

namespace cli {

using les::ErrorKind;
using les::ScriptError;
using zp2::TwoLocalGroup;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Validation: return Validation;
        case ErrorKind::MissingFact: return MissingFact;
        // an unresolved extension is a missing lift certificate
        case ErrorKind::Extension: return MissingFact;
        case ErrorKind::Assertion: return Mismatch;
        case ErrorKind::Internal: return Internal;
    }
    return Internal;
}

namespace {

[[noreturn]] void invalid(const std::string& why) { throw ScriptError(ErrorKind::Validation, 0, why); }

std::string cyclic_sum(std::vector<zp2::Int> orders) { return TwoLocalGroup(std::move(orders)).render(); }

std::vector<zp2::Int> repeat(zp2::Int order, int times) { return std::vector<zp2::Int>(times, order); }

std::vector<zp2::Int> with(std::vector<zp2::Int> v, std::initializer_list<zp2::Int> more) {
    v.insert(v.end(), more);
    return v;
}

struct Loaded {
    kb::Catalog kb;
    halg::Context ctx;
};

Loaded load(const RunConfig& cfg) {
    Loaded l;
    try {
        l.kb = kb::Catalog::load(cfg.kb);
        l.ctx = l.kb.build_context({{"eps", cfg.eps}, {"eps_chi", cfg.eps_chi}});
    } catch (const kb::KbError& e) {
        invalid(e.what());
    } catch (const halg::AlgebraError& e) {
        invalid(std::string("knowledge base does not load: ") + e.what());
    }
    return l;
}

Outcome failure(int code, const std::string& what) { return Outcome{code, "", "error: " + std::string(what) + "\n"}; }

template <class F>
Outcome guarded(F&& body) {
    try {
        return body();
    } catch (const ScriptError& e) {
        return failure(exit_code(e.kind), e.what());
    } catch (const halg::MissingFact& e) {
        return failure(MissingFact, e.what());
    } catch (const jf::FiltrationError& e) {
        return failure(Validation, e.what());
    } catch (const halg::AlgebraError& e) {
        return failure(Validation, e.what());
    } catch (const kb::KbError& e) {
        return failure(Validation, e.what());
    } catch (const std::exception& e) {
        return failure(Internal, e.what());
    }
}

std::string json_line(const nlohmann::ordered_json& j) { return j.dump() + "\n"; }

}  // namespace

ScriptChoice choose_script(const RunConfig& cfg) {
    if (!cfg.k) invalid("--k is required");
    if (*cfg.k < 2) invalid("k must be at least 2");
    auto need = [&](const std::optional<long long>& v, const char* name, long long lo) {
        if (!v) invalid(std::string("--") + name + " is required for --space " + cfg.space);
        if (*v < lo || *v > 62) invalid(std::string(name) + " must lie in " + std::to_string(lo) + "..62");
        return *v;
    };
    static const std::map<std::pair<std::string, long long>, std::string> table = {
        {{"P3", 5}, "pi5_P3"}, {{"P3", 6}, "pi6_P3"}, {{"L4", 5}, "pi5_L4m"},
        {{"L4", 6}, "pi6_L4m"}, {{"F", 5}, "gamma3"}, {{"F", 6}, "pi6_J3"}};
    if (cfg.space != "P3" && cfg.space != "L4" && cfg.space != "F")
        invalid("unknown space '" + cfg.space + "' (choose P3, L4 or F)");
    auto it = table.find({cfg.space, *cfg.k});
    if (it == table.end())
        invalid("no shipped derivation for pi_" + std::to_string(*cfg.k) + " of " + cfg.space + " (degrees 5 and 6 are shipped)");
    if (cfg.space == "L4") return {it->second, "m", need(cfg.m, "m", 0)};
    return {it->second, "r", need(cfg.r, "r", 1)};
}

std::vector<Row> expected_rows() {
    std::vector<Row> rows;
    auto add = [&](const std::string& lemma, const std::string& p, long long v, const std::string& g) {
        rows.push_back(Row{lemma, p, v, g, "", "", false});
    };
    for (int r = 1; r <= 8; ++r) {
        const zp2::Int t = zp2::pow2(r);
        add("pi5_P3", "r", r, cyclic_sum(r == 1 ? repeat(2, 3) : with(repeat(2, 3), {t})));
        add("pi6_P3", "r", r, cyclic_sum(r == 1 ? repeat(2, 5) : std::vector<zp2::Int>{2, 2, 4, 4, t}));
        add("pi6_J3", "r", r, cyclic_sum(r == 1 ? repeat(2, 4) : std::vector<zp2::Int>{2, 2, 4, t}));
        add("gamma3", "r", r, "b = " + std::to_string(3 * t) + ", a = 0, c = 0");
    }
    for (int m = 0; m <= 8; ++m) {
        const zp2::Int t = zp2::pow2(m);
        add("pi5_L4m", "m", m, cyclic_sum(m == 0 ? std::vector<zp2::Int>{0} : m == 1 ? std::vector<zp2::Int>{0, 4}
                                                                              : std::vector<zp2::Int>{0, 2, 2}));
        if (m == 0) continue;
        add("pi6_L4m", "m", m, cyclic_sum(m == 1 ? std::vector<zp2::Int>{2, 4, 2}
                                          : m == 2 ? std::vector<zp2::Int>{2, 2, 8, 2}
                                                   : std::vector<zp2::Int>{2, 4, t, 2}));
        add("coker_dL6", "m", m, cyclic_sum(m == 1 ? std::vector<zp2::Int>{2, 4}
                                            : m == 2 ? std::vector<zp2::Int>{2, 2, 8}
                                                     : std::vector<zp2::Int>{2, 4, t}));
    }
    return rows;
}

std::vector<Row> reproduce_rows(const kb::Catalog& kb, const halg::Context& ctx, const les::ScriptLibrary& lib) {
    std::vector<Row> rows = expected_rows();
    les::RunOptions opts{&kb, &ctx, &lib};
    std::map<std::pair<std::string, long long>, les::RunResult> cache;
    for (auto& row : rows) {
        const std::string script = row.lemma == "coker_dL6" ? "pi6_L4m" : row.lemma;
        try {
            auto key = std::make_pair(script, row.value);
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache.emplace(key, les::run_script(lib.get(script), {{row.param, row.value}}, opts)).first;
            const les::RunResult& res = it->second;
            if (row.lemma == "coker_dL6") {
                row.computed = std::get<les::LabeledGroup>(res.bindings.at("image")).group.render();
            } else if (row.lemma == "gamma3") {
                auto num = [&](const char* n) { return std::to_string(std::get<long long>(res.bindings.at(n))); };
                row.computed = "b = " + num("b") + ", a = " + num("v_a") + ", c = " + num("v_c");
            } else {
                row.computed = res.group.render();
            }
            row.pass = row.computed == row.expected;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }
    return rows;
}

Outcome cmd_compute(const RunConfig& cfg) {
    return guarded([&] {
        ScriptChoice choice = choose_script(cfg);
        Loaded l = load(cfg);
        les::ScriptLibrary lib(cfg.scripts);
        les::RunResult res =
            les::run_script(lib.get(choice.script), {{choice.param, choice.value}}, les::RunOptions{&l.kb, &l.ctx, &lib});
        Outcome o;
        if (cfg.format == Format::Machine) {
            nlohmann::ordered_json head;
            head["type"] = "header";
            head["script"] = choice.script;
            head[choice.param] = choice.value;
            head["kb_digest"] = l.kb.digest();
            o.out = json_line(head) + res.transcript_machine();
        } else {
            o.out = res.group.render() + "\n" + "generators: " + res.group.render_labeled() + "\n" +
                    "script: " + choice.script + " " + choice.param + "=" + std::to_string(choice.value) + "\n" +
                    "kb digest: " + l.kb.digest() + "\n" + "transcript digest: " + res.transcript_digest() + "\n\n" +
                    res.transcript_text();
        }
        return o;
    });
}

Outcome cmd_reproduce(const RunConfig& cfg) {
    return guarded([&] {
        Loaded l = load(cfg);
        les::ScriptLibrary lib(cfg.scripts);
        auto rows = reproduce_rows(l.kb, l.ctx, lib);
        int failed = 0;
        for (const auto& r : rows) failed += r.pass ? 0 : 1;
        std::ostringstream out;
        if (cfg.format == Format::Machine) {
            nlohmann::ordered_json head;
            head["type"] = "header";
            head["kb"] = cfg.kb;
            head["kb_digest"] = l.kb.digest();
            out << json_line(head);
            for (const auto& r : rows) {
                nlohmann::ordered_json j;
                j["type"] = "row";
                j["lemma"] = r.lemma;
                j[r.param] = r.value;
                j["expected"] = r.expected;
                j["computed"] = r.computed;
                j["pass"] = r.pass;
                if (!r.error.empty()) j["error"] = r.error;
                out << json_line(j);
            }
            nlohmann::ordered_json tail;
            tail["type"] = "summary";
            tail["rows"] = rows.size();
            tail["failed"] = failed;
            out << json_line(tail);
        } else {
            out << "kb: " << cfg.kb << "\nkb digest: " << l.kb.digest() << "\n\n";
            for (const auto& r : rows) {
                out << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(10) << r.lemma << " " << r.param << "="
                    << std::setw(2) << r.value << "  expected " << std::setw(36) << r.expected << " computed "
                    << (r.error.empty() ? r.computed : "error: " + r.error) << "\n";
            }
            out << "\n" << rows.size() - failed << "/" << rows.size() << " rows pass\n";
        }
        return Outcome{failed == 0 ? Ok : Mismatch, out.str(), ""};
    });
}

Outcome cmd_filtration(const RunConfig& cfg) {
    return guarded([&] {
        if (cfg.f.empty()) invalid("--f is required");
        if (!cfg.n) invalid("--n is required");
        if (*cfg.n < 1) invalid("n must be at least 1");
        Loaded l = load(cfg);
        halg::Env env;
        if (cfg.r) env["r"] = *cfg.r;
        if (cfg.m) env["m"] = *cfg.m;
        auto spec = jf::make_map_spec(l.ctx, cfg.f, env);
        auto model = jf::build_filtration(l.ctx, spec, static_cast<int>(*cfg.n));
        std::string body = cfg.format == Format::Machine ? jf::render_machine(model) : jf::render_text(model) + "\n";
        return Outcome{Ok, body, ""};
    });
}

Outcome cmd_validate_kb(const RunConfig& cfg) {
    return guarded([&] {
        Loaded l = load(cfg);
        std::map<std::string, int> by_trust, by_kind;
        for (const auto& f : l.kb.facts()) {
            ++by_trust[kb::trust_name(f.trust)];
            ++by_kind[kb::kind_name(f.kind)];
        }
        auto derivable = kb::derivable_facts(l.kb);
        std::ostringstream out;
        if (cfg.format == Format::Machine) {
            nlohmann::ordered_json j;
            j["type"] = "kb";
            j["path"] = cfg.kb;
            j["digest"] = l.kb.digest();
            j["facts"] = l.kb.facts().size();
            j["instances"] = l.kb.instances().size();
            j["by_kind"] = by_kind;
            j["by_trust"] = by_trust;
            j["derivable"] = derivable;
            out << json_line(j);
        } else {
            out << "kb: " << cfg.kb << "\ndigest: " << l.kb.digest() << "\nfacts: " << l.kb.facts().size()
                << "\ninstances: " << l.kb.instances().size() << "\n";
            for (const auto& [k, n] : by_kind) out << "  " << k << ": " << n << "\n";
            for (const auto& [t, n] : by_trust) out << "  trust " << t << ": " << n << "\n";
            for (const auto& id : derivable) out << "derivable from the rest, should not be stored: " << id << "\n";
            out << (derivable.empty() ? "ok\n" : "not ok\n");
        }
        return Outcome{derivable.empty() ? Ok : Mismatch, out.str(), ""};
    });
}

Outcome dispatch(const RunConfig& cfg) {
    if (cfg.command == "compute") return cmd_compute(cfg);
    if (cfg.command == "reproduce") return cmd_reproduce(cfg);
    if (cfg.command == "filtration") return cmd_filtration(cfg);
    if (cfg.command == "validate-kb") return cmd_validate_kb(cfg);
    return failure(Validation, "unknown command '" + cfg.command + "'");
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unstable homotopy groups of mapping cones, 2-locally"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string format = "text";
    long long r = 0, m = 0, k = 0, n = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--kb", cfg.kb, "knowledge base file");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"text", "machine"}));
        sub->add_option("--scripts", cfg.scripts, "directory of derivation scripts");
        sub->add_option("--eps", cfg.eps, "value for the undetermined constant eps")->check(CLI::IsMember({0, 1}));
        sub->add_option("--eps-chi", cfg.eps_chi, "value for the undetermined constant eps_chi")
            ->check(CLI::IsMember({0, 1}));
    };
    auto* compute = app.add_subcommand("compute", "compute pi_k of a shipped space");
    compute->add_option("--space", cfg.space, "P3 (Moore space), L4 (two-cell complex L4(m)) or F (pinch fiber)")
        ->required();
    compute->add_option("--r", r, "Moore space exponent");
    compute->add_option("--m", m, "L4 exponent");
    compute->add_option("--k", k, "homotopy degree")->required();
    common(compute);

    auto* reproduce = app.add_subcommand("reproduce", "run every shipped derivation against the expected table");
    common(reproduce);

    auto* filtration = app.add_subcommand("filtration", "list the stages of the fiber filtration");
    filtration->add_option("--f", cfg.f, "map, e.g. \"2^r iota_2\"")->required();
    filtration->add_option("--n", n, "number of stages")->required();
    filtration->add_option("--r", r, "value of r in the map");
    filtration->add_option("--m", m, "value of m in the map");
    common(filtration);

    auto* validate = app.add_subcommand("validate-kb", "load and audit a knowledge base file");
    common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return Validation;
    }
    for (auto* sub : {compute, reproduce, filtration, validate})
        if (sub->parsed()) cfg.command = sub->get_name();
    cfg.format = format == "machine" ? Format::Machine : Format::Text;
    for (auto* sub : {compute, filtration}) {
        if (!sub->parsed()) continue;
        if (sub->count("--r")) cfg.r = r;
        if (sub->count("--m")) cfg.m = m;
    }
    if (compute->parsed()) cfg.k = k;
    if (filtration->parsed()) cfg.n = n;

    Outcome o = dispatch(cfg);
    out << o.out;
    err << o.err;
    return o.code;
}

}  // namespace cli
