#include "les/script.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace les {

using halg::Env;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Token {
    std::string text;
    bool quoted = false;
};

std::vector<Token> tokenize(const std::string& s, int line, const std::string& origin) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        if (s[i] == '"') {
            std::size_t close = s.find('"', i + 1);
            if (close == std::string::npos)
                throw ScriptError(ErrorKind::Validation, 0, origin + ":" + std::to_string(line) + ": unterminated quote");
            out.push_back({s.substr(i + 1, close - i - 1), true});
            i = close + 1;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '"') ++j;
        out.push_back({s.substr(i, j - i), false});
        i = j;
    }
    return out;
}

bool valid_name(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
    return true;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

// Number of arguments each operation takes: {min, max}; max < 0 means unbounded.
const std::map<std::string, std::pair<int, int>>& arity() {
    static const std::map<std::string, std::pair<int, int>> a = {
        {"lookup_group", {2, 2}},          {"lookup_boundary", {2, 3}},     {"boundary_on_suspension", {3, 3}},
        {"boundary", {4, 5}},              {"compose_map", {2, -1}},        {"cokernel", {1, 1}},
        {"kernel", {1, 1}},                {"quotient_by_elements", {2, -1}}, {"solve_extension", {4, 4}},
        {"run", {1, -1}},                  {"relabel", {2, 2}},             {"term", {1, 1}},
        {"int", {1, 1}},                   {"whitehead", {2, 2}},           {"suspend", {1, 1}},
        {"apply", {2, 2}},                 {"add", {2, 2}},                 {"scale", {2, 2}},
        {"naturality_push", {2, 2}},       {"extract_scalars", {1, 1}},     {"triple_indeterminacy", {1, 1}},
        {"coefficient", {3, 3}},           {"solve_coefficient", {4, 4}},   {"solve_vanishing", {3, -1}},
        {"order", {1, 1}},
    };
    return a;
}

const std::set<std::string>& checks() {
    static const std::set<std::string> s = {"require", "assert_group", "check_order"};
    return s;
}

}  // namespace

// ---------------------------------------------------------------- parsing

Script Script::parse(const std::string& text, const std::string& name) {
    Script s;
    s.name = name;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    auto fail = [&](const std::string& why) {
        throw ScriptError(ErrorKind::Validation, 0, name + ":" + std::to_string(line) + ": " + why);
    };
    while (std::getline(in, raw)) {
        ++line;
        std::string body = raw;
        bool in_quote = false;
        for (std::size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '"') in_quote = !in_quote;
            if (body[i] == '#' && !in_quote) {
                body = body.substr(0, i);
                break;
            }
        }
        body = trim(body);
        if (body.empty()) continue;

        if (body.rfind("param ", 0) == 0) {
            auto toks = tokenize(body.substr(6), line, name);
            if (toks.size() != 2) fail("expected 'param NAME LO..HI'");
            auto dots = toks[1].text.find("..");
            if (dots == std::string::npos) fail("expected a range LO..HI");
            try {
                s.params[toks[0].text] = {std::stoll(toks[1].text.substr(0, dots)), std::stoll(toks[1].text.substr(dots + 2))};
            } catch (const std::exception&) {
                fail("bad range '" + toks[1].text + "'");
            }
            continue;
        }

        Step st;
        st.line = line;
        st.text = body;
        if (body[0] == '[') {
            auto close = body.find(']');
            if (close == std::string::npos) fail("unterminated guard");
            st.guard = trim(body.substr(1, close - 1));
            body = trim(body.substr(close + 1));
        }
        auto toks = tokenize(body, line, name);
        if (toks.empty()) fail("guard without a step");
        if (checks().count(toks[0].text)) {
            st.op = toks[0].text;
            if (st.op == "require") {
                // everything after the keyword is one integer comparison
                st.args.push_back(trim(body.substr(7)));
                st.quoted.push_back(false);
            } else {
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    st.args.push_back(toks[i].text);
                    st.quoted.push_back(toks[i].quoted);
                }
            }
            std::size_t want = st.op == "assert_group" ? 2 : st.op == "check_order" ? 3 : 1;
            if (st.args.size() != want) fail("'" + st.op + "' takes " + std::to_string(want) + " argument(s)");
            s.steps.push_back(std::move(st));
            continue;
        }
        if (toks.size() < 3 || toks[1].text != "=" || toks[1].quoted) fail("expected 'NAME = op args'");
        st.name = toks[0].text;
        if (!valid_name(st.name)) fail("bad binding name '" + st.name + "'");
        st.op = toks[2].text;
        auto it = arity().find(st.op);
        if (it == arity().end()) fail("unknown operation '" + st.op + "'");
        for (std::size_t i = 3; i < toks.size(); ++i) {
            st.args.push_back(toks[i].text);
            st.quoted.push_back(toks[i].quoted);
        }
        int n = static_cast<int>(st.args.size());
        if (n < it->second.first || (it->second.second >= 0 && n > it->second.second))
            fail("wrong number of arguments for '" + st.op + "'");
        s.steps.push_back(std::move(st));
    }
    return s;
}

Script Script::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError(ErrorKind::Validation, 0, "cannot open script " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string name = path;
    auto slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    auto dot = name.rfind(".deriv");
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse(ss.str(), name);
}

ScriptLibrary::ScriptLibrary(std::string dir) : dir_(std::move(dir)) {}

const Script& ScriptLibrary::get(const std::string& name) const {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    if (!valid_name(name) || name.find('.') != std::string::npos)
        throw ScriptError(ErrorKind::Validation, 0, "bad script name '" + name + "'");
    return cache_.emplace(name, Script::load(dir_ + "/" + name + ".deriv")).first->second;
}

// ---------------------------------------------------------------- transcript

std::string RunResult::transcript_text() const {
    std::ostringstream out;
    for (const auto& s : steps) out << "[" << s.script << " " << s.index << "] " << s.text << "  =>  " << s.result << "\n";
    if (!facts.empty()) out << "facts consumed:\n";
    for (const auto& f : facts)
        out << "  " << f.id << " (" << f.kind << ", " << f.trust << "; " << f.locator << "): \"" << f.quote << "\"\n";
    out << "result: " << group.render() << "\n";
    return out.str();
}

std::string RunResult::transcript_machine() const {
    std::string out;
    for (const auto& s : steps) {
        nlohmann::ordered_json j;
        j["type"] = "step";
        j["script"] = s.script;
        j["index"] = s.index;
        j["text"] = s.text;
        j["result"] = s.result;
        out += j.dump() + "\n";
    }
    for (const auto& f : facts) {
        nlohmann::ordered_json j;
        j["type"] = "fact";
        j["id"] = f.id;
        j["kind"] = f.kind;
        j["trust"] = f.trust;
        j["locator"] = f.locator;
        j["quote"] = f.quote;
        out += j.dump() + "\n";
    }
    nlohmann::ordered_json j;
    j["type"] = "result";
    j["group"] = group.render();
    j["labeled"] = group.render_labeled();
    out += j.dump() + "\n";
    return out;
}

std::string RunResult::transcript_digest() const { return sha256_hex(transcript_machine()); }

// ---------------------------------------------------------------- execution

namespace {

std::string describe(const Value& v) {
    if (auto p = std::get_if<long long>(&v)) return std::to_string(*p);
    if (auto p = std::get_if<Element>(&v)) return halg::render(*p);
    if (auto p = std::get_if<LabeledGroup>(&v)) return p->group.render_labeled();
    const auto& h = std::get<zp2::GroupHom>(v);
    std::string m = "[";
    for (std::size_t i = 0; i < h.matrix.size(); ++i) {
        if (i) m += "; ";
        for (std::size_t j = 0; j < h.matrix[i].size(); ++j) m += (j ? " " : "") + std::to_string(h.matrix[i][j]);
    }
    return h.source.render() + " -> " + h.target.render() + " " + m + "]";
}

class Runner {
public:
    Runner(const RunOptions& o, RunResult& res, std::set<std::string>& seen, int depth)
        : o_(o), c_(*o.context), kb_(*o.kb), res_(res), seen_(seen), depth_(depth) {}

    void run(const Script& s, const std::map<std::string, long long>& params) {
        script_ = s.name;
        for (const auto& [k, v] : params) {
            auto it = s.params.find(k);
            if (it == s.params.end())
                throw ScriptError(ErrorKind::Validation, 0, s.name + ": unknown parameter '" + k + "'");
            if (v < it->second.first || v > it->second.second)
                throw ScriptError(ErrorKind::Validation, 0,
                                  s.name + ": parameter " + k + " = " + std::to_string(v) + " is outside " +
                                      std::to_string(it->second.first) + ".." + std::to_string(it->second.second));
            env_[k] = v;
            vars_[k] = v;
        }
        for (const auto& [k, range] : s.params)
            if (!params.count(k)) throw ScriptError(ErrorKind::Validation, 0, s.name + ": parameter " + k + " is required");

        int index = 0;
        for (const auto& st : s.steps) {
            ++index;
            try {
                if (!st.guard.empty() && !condition(st.guard)) continue;
                std::string shown = exec(st);
                res_.steps.push_back(TranscriptStep{index, s.name, st.text, shown});
            } catch (const ScriptError& e) {
                if (e.step != 0) throw;
                throw ScriptError(e.kind, index, where(st) + e.what());
            } catch (const zp2::ExtensionUnresolved& e) {
                throw ScriptError(ErrorKind::Extension, index, where(st) + e.what());
            } catch (const halg::MissingFact& e) {
                throw ScriptError(ErrorKind::MissingFact, index, where(st) + e.what());
            } catch (const kb::KbError& e) {
                throw ScriptError(ErrorKind::Validation, index, where(st) + e.what());
            } catch (const std::exception& e) {
                throw ScriptError(ErrorKind::Internal, index, where(st) + e.what());
            }
        }
        auto it = vars_.find("result");
        if (it == vars_.end() || !std::holds_alternative<LabeledGroup>(it->second))
            throw ScriptError(ErrorKind::Validation, 0, s.name + ": no terminal group (bind a group to 'result')");
    }

    const std::map<std::string, Value>& vars() const { return vars_; }

private:
    std::string where(const Step& st) const { return script_ + ":" + std::to_string(st.line) + ": "; }

    [[noreturn]] void fail(ErrorKind k, const std::string& why) const { throw ScriptError(k, 0, why); }

    void note(const std::string& id) {
        if (id.empty() || !seen_.insert(id).second) return;
        const kb::Fact* f = kb_.by_id(id);
        if (!f) return;
        res_.facts.push_back(ConsumedFact{id, kb::kind_name(f->kind), kb::trust_name(f->trust), f->field("locator"),
                                          f->quote()});
    }

    std::string text(const std::string& raw) const { return halg::interpolate(raw, env_); }

    long long integer(const std::string& expr) const { return halg::eval_int(text(expr), env_); }

    bool condition(const std::string& cond) const {
        std::size_t amp = cond.find("&&");
        if (amp != std::string::npos) return condition(cond.substr(0, amp)) && condition(cond.substr(amp + 2));
        static const char* ops[] = {"==", "!=", ">=", "<=", ">", "<"};
        for (const char* op : ops) {
            std::size_t p = cond.find(op);
            if (p == std::string::npos) continue;
            long long a = integer(trim(cond.substr(0, p)));
            long long b = integer(trim(cond.substr(p + std::char_traits<char>::length(op))));
            std::string o = op;
            if (o == "==") return a == b;
            if (o == "!=") return a != b;
            if (o == ">=") return a >= b;
            if (o == "<=") return a <= b;
            if (o == ">") return a > b;
            return a < b;
        }
        fail(ErrorKind::Validation, "condition '" + cond + "' has no comparison");
    }

    const Value& binding(const std::string& name) const {
        auto it = vars_.find(name);
        if (it == vars_.end()) fail(ErrorKind::Validation, "unbound name '" + name + "'");
        return it->second;
    }

    Element element(const Step& st, std::size_t i) const {
        if (st.quoted[i]) return halg::normalize(c_, halg::parse_term(c_, text(st.args[i]), env_));
        const Value& v = binding(st.args[i]);
        if (auto e = std::get_if<Element>(&v)) return *e;
        fail(ErrorKind::Validation, "'" + st.args[i] + "' is not an element");
    }

    const LabeledGroup& group(const std::string& name) const {
        const Value& v = binding(name);
        if (auto g = std::get_if<LabeledGroup>(&v)) return *g;
        fail(ErrorKind::Validation, "'" + name + "' is not a group");
    }

    const zp2::GroupHom& hom(const std::string& name) const {
        const Value& v = binding(name);
        if (auto h = std::get_if<zp2::GroupHom>(&v)) return *h;
        fail(ErrorKind::Validation, "'" + name + "' is not a homomorphism");
    }

    void bind(const std::string& name, Value v) {
        if (auto p = std::get_if<long long>(&v)) env_[name] = *p;
        vars_[name] = std::move(v);
    }

    // frame -> group and group -> frame maps composed with a quotient of `group`.
    LabeledGroup quotient_of(const LabeledGroup& g, const zp2::Quotient& q) const {
        LabeledGroup out;
        out.group = q.group;
        out.frame = g.frame;
        out.space = g.space;
        out.degree = g.degree;
        out.proj = zp2::zeros(q.group.rank(), g.frame.rank());
        for (std::size_t i = 0; i < q.group.rank(); ++i) {
            for (std::size_t j = 0; j < g.frame.rank(); ++j) {
                Int acc = 0;
                for (std::size_t t = 0; t < g.group.rank(); ++t)
                    acc = zp2::add(acc, zp2::mul(q.projection.matrix[i][t], g.proj[t][j]));
                out.proj[i][j] = zp2::mod(acc, q.group.orders()[i]);
            }
        }
        out.lift = zp2::zeros(g.frame.rank(), q.group.rank());
        for (std::size_t j = 0; j < g.frame.rank(); ++j)
            for (std::size_t k = 0; k < q.group.rank(); ++k) {
                Int acc = 0;
                for (std::size_t t = 0; t < g.group.rank(); ++t) acc = zp2::add(acc, zp2::mul(g.lift[j][t], q.lift[t][k]));
                out.lift[j][k] = zp2::mod(acc, g.frame.orders()[j]);
            }
        out.refresh_labels(c_);
        return out;
    }

    std::string exec(const Step& st);
    std::string exec_group_op(const Step& st);
    std::string exec_element_op(const Step& st);

    const RunOptions& o_;
    const Context& c_;
    const kb::Catalog& kb_;
    RunResult& res_;
    std::set<std::string>& seen_;
    int depth_;
    std::string script_;
    Env env_;
    std::map<std::string, Value> vars_;
};

std::string Runner::exec(const Step& st) {
    const auto& a = st.args;
    if (st.op == "require") {
        if (!condition(a[0])) fail(ErrorKind::Assertion, "requirement failed: " + a[0] + " " + [&] {
            std::string vals;
            for (const auto& [k, v] : env_) vals += (vals.empty() ? "(" : ", ") + k + " = " + std::to_string(v);
            return vals.empty() ? std::string() : vals + ")";
        }());
        return "ok";
    }
    if (st.op == "assert_group") {
        const auto& g = group(a[0]);
        auto want = TwoLocalGroup::parse(text(a[1]));
        if (!zp2::group_equal(g.group, want))
            fail(ErrorKind::Assertion, "assert_group " + a[0] + ": expected " + want.render() + ", computed " + g.group.render());
        return "ok " + g.group.render();
    }
    if (st.op == "check_order") {
        const auto& x = group(a[0]).group;
        const auto& y = group(a[1]).group;
        const auto& z = group(a[2]).group;
        if (!x.is_finite() || !y.is_finite() || !z.is_finite())
            fail(ErrorKind::Assertion, "check_order needs finite groups");
        Int lhs = x.torsion_order(), rhs = zp2::mul(y.torsion_order(), z.torsion_order());
        if (lhs != rhs)
            fail(ErrorKind::Assertion, "order mismatch: |" + a[0] + "| = " + std::to_string(lhs) + " but |" + a[1] +
                                           "| * |" + a[2] + "| = " + std::to_string(rhs));
        return "ok " + std::to_string(lhs) + " = " + std::to_string(y.torsion_order()) + " * " +
               std::to_string(z.torsion_order());
    }
    static const std::set<std::string> group_ops = {"lookup_group", "compose_map", "cokernel", "kernel",
                                                    "quotient_by_elements", "solve_extension", "run", "relabel",
                                                    "triple_indeterminacy", "order"};
    if (group_ops.count(st.op)) return exec_group_op(st);
    return exec_element_op(st);
}

std::string Runner::exec_group_op(const Step& st) {
    const auto& a = st.args;
    if (st.op == "lookup_group") {
        SpaceId space = SpaceId::parse(text(a[0]));
        int k = static_cast<int>(integer(a[1]));
        std::string id;
        auto g = kb_.lookup_group(c_, space, k, &id);
        note(id);
        bind(st.name, LabeledGroup::plain(g, c_.canonical(space), k));
    } else if (st.op == "compose_map") {
        // compose_map NAME SRC TGT LABEL IMAGE LABEL IMAGE ...; TGT "_" is the trivial group.
        const LabeledGroup& src = group(a[0]);
        LabeledGroup tgt = a[1] == "_" ? LabeledGroup::plain(TwoLocalGroup{}, SpaceId{}, 0) : group(a[1]);
        if ((a.size() - 2) % 2 != 0) fail(ErrorKind::Validation, "compose_map needs LABEL IMAGE pairs");
        std::map<std::string, Element> images;
        for (std::size_t i = 2; i + 1 < a.size(); i += 2) {
            std::string label = halg::render(halg::parse_term(c_, text(a[i]), env_));
            images[label] = element(st, i + 1);
        }
        zp2::Matrix m = zp2::zeros(tgt.group.rank(), src.group.rank());
        for (std::size_t j = 0; j < src.group.rank(); ++j) {
            const std::string& label = src.group.labels().at(j);
            auto it = images.find(label);
            if (it == images.end()) fail(ErrorKind::Validation, "compose_map: no image given for generator " + label);
            if (a[1] == "_") {
                if (!it->second.is_zero())
                    fail(ErrorKind::Assertion, "compose_map: image of " + label + " is " + halg::render(it->second) +
                                                   ", not 0, but the target is trivial");
                continue;
            }
            auto col = tgt.coords(c_, it->second);
            for (std::size_t i = 0; i < col.size(); ++i) m[i][j] = col[i];
            images.erase(it);
        }
        if (a[1] != "_" && !images.empty())
            fail(ErrorKind::Validation, "compose_map: " + images.begin()->first + " is not a generator of " + a[0]);
        zp2::GroupHom h{src.group, tgt.group, m};
        zp2::validate_hom(h);
        bind(st.name, h);
    } else if (st.op == "cokernel") {
        const zp2::GroupHom& h = hom(a[0]);
        // the target binding is needed for labels: find the group whose group equals h.target
        const LabeledGroup* tgt = nullptr;
        for (const auto& [k, v] : vars_)
            if (auto g = std::get_if<LabeledGroup>(&v); g && g->group.orders() == h.target.orders() &&
                                                         g->group.labels() == h.target.labels())
                tgt = g;
        if (!tgt) fail(ErrorKind::Internal, "cokernel: target group of " + a[0] + " is not bound");
        bind(st.name, quotient_of(*tgt, zp2::cokernel(h)));
    } else if (st.op == "kernel") {
        const zp2::GroupHom& h = hom(a[0]);
        auto sub = zp2::kernel(h);
        const LabeledGroup* src = nullptr;
        for (const auto& [k, v] : vars_)
            if (auto g = std::get_if<LabeledGroup>(&v); g && g->group.orders() == h.source.orders() &&
                                                         g->group.labels() == h.source.labels())
                src = g;
        if (!src) fail(ErrorKind::Internal, "kernel: source group of " + a[0] + " is not bound");
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < sub.group.rank(); ++k) {
            std::vector<Int> col(src->group.rank());
            for (std::size_t j = 0; j < col.size(); ++j) col[j] = sub.inclusion.matrix[j][k];
            labels.push_back(halg::render(src->element(c_, col)));
        }
        bind(st.name, LabeledGroup::plain(TwoLocalGroup(sub.group.orders(), labels), src->space, src->degree));
    } else if (st.op == "quotient_by_elements") {
        const LabeledGroup& g = group(a[0]);
        std::vector<std::vector<Int>> rels;
        for (std::size_t i = 1; i < a.size(); ++i) rels.push_back(g.coords(c_, element(st, i)));
        bind(st.name, quotient_of(g, zp2::quotient_presentation(g.group, rels)));
    } else if (st.op == "solve_extension") {
        // solve_extension NAME SUB QUOT SPACE DEGREE
        const LabeledGroup& sub = group(a[0]);
        const LabeledGroup& quot = group(a[1]);
        SpaceId space = SpaceId::parse(text(a[2]));
        int degree = static_cast<int>(integer(a[3]));
        std::vector<zp2::Certificate> certs;
        std::vector<std::string> lift_names;
        for (std::size_t i = 0; i < quot.group.rank(); ++i) {
            const std::string& label = quot.group.labels().at(i);
            auto cert = kb_.lift_certificate(c_, space, degree, label);
            if (cert) {
                note(cert->fact_id);
                certs.push_back({i, cert->order});
                lift_names.push_back(cert->lift);
            } else {
                lift_names.push_back(label);
            }
        }
        TwoLocalGroup solved = zp2::solve_extension({sub.group, quot.group, certs});
        // the extension splits; rebuild the frame as sub.frame + lifts
        std::vector<Int> orders = sub.group.orders();
        orders.insert(orders.end(), quot.group.orders().begin(), quot.group.orders().end());
        std::vector<Int> forders = sub.frame.orders();
        std::vector<std::string> flabels = sub.frame.labels();
        for (std::size_t i = 0; i < quot.group.rank(); ++i) {
            forders.push_back(quot.group.orders()[i]);
            flabels.push_back(halg::render(halg::parse_term(c_, lift_names[i])));
        }
        std::size_t n = orders.size(), fn = forders.size(), sf = sub.frame.rank(), sg = sub.group.rank();
        zp2::Matrix proj = zp2::zeros(n, fn), lift = zp2::zeros(fn, n);
        for (std::size_t i = 0; i < sg; ++i)
            for (std::size_t j = 0; j < sf; ++j) proj[i][j] = sub.proj[i][j], lift[j][i] = sub.lift[j][i];
        for (std::size_t i = 0; i < quot.group.rank(); ++i) proj[sg + i][sf + i] = 1, lift[sf + i][sg + i] = 1;
        auto perm = TwoLocalGroup::canonical_order(orders);
        LabeledGroup out;
        std::vector<Int> sorted;
        zp2::Matrix sproj, slift = zp2::zeros(fn, n);
        for (std::size_t k = 0; k < n; ++k) {
            sorted.push_back(orders[perm[k]]);
            sproj.push_back(proj[perm[k]]);
            for (std::size_t j = 0; j < fn; ++j) slift[j][k] = lift[j][perm[k]];
        }
        // frames in canonical order keep TwoLocalGroup's invariant
        auto fperm = TwoLocalGroup::canonical_order(forders);
        std::vector<Int> fsorted;
        std::vector<std::string> fl;
        zp2::Matrix pproj = zp2::zeros(n, fn), plift = zp2::zeros(fn, n);
        for (std::size_t j = 0; j < fn; ++j) {
            fsorted.push_back(forders[fperm[j]]);
            fl.push_back(flabels[fperm[j]]);
            for (std::size_t k = 0; k < n; ++k) {
                pproj[k][j] = sproj[k][fperm[j]];
                plift[j][k] = slift[fperm[j]][k];
            }
        }
        out.group = TwoLocalGroup(sorted);
        out.frame = TwoLocalGroup(fsorted, fl);
        out.proj = pproj;
        out.lift = plift;
        out.space = space;
        out.degree = degree;
        out.refresh_labels(c_);
        if (!zp2::group_equal(out.group, solved))
            fail(ErrorKind::Internal, "extension bookkeeping disagrees with the solver");
        bind(st.name, out);
    } else if (st.op == "run") {
        // run NAME SCRIPT key=expr ...
        if (!o_.library) fail(ErrorKind::Validation, "run needs a script library");
        if (depth_ > 8) fail(ErrorKind::Validation, "scripts nest too deeply");
        const Script& sub = o_.library->get(a[0]);
        std::map<std::string, long long> params;
        for (std::size_t i = 1; i < a.size(); ++i) {
            auto eq = a[i].find('=');
            if (eq == std::string::npos) fail(ErrorKind::Validation, "run arguments look like key=expr");
            params[a[i].substr(0, eq)] = integer(a[i].substr(eq + 1));
        }
        Runner inner(o_, res_, seen_, depth_ + 1);
        inner.run(sub, params);
        for (const auto& [k, v] : inner.vars()) {
            if (std::holds_alternative<long long>(v))
                bind(st.name + "_" + k, v);
            else
                vars_[st.name + "." + k] = v;
        }
        vars_[st.name] = inner.vars().at("result");
    } else if (st.op == "relabel") {
        // relabel NAME GROUP "PREFIX": push every frame label forward along PREFIX
        const LabeledGroup& g = group(a[0]);
        Element prefix = element(st, 1);
        std::vector<std::string> labels;
        for (const auto& l : g.frame.labels())
            labels.push_back(halg::render(halg::compose(c_, prefix, halg::parse_term(c_, l))));
        LabeledGroup out = g;
        out.frame = TwoLocalGroup(g.frame.orders(), labels);
        out.space = c_.canonical(prefix.target());
        out.refresh_labels(c_);
        bind(st.name, out);
    } else if (st.op == "triple_indeterminacy") {
        Element b = element(st, 0);
        if (b.terms().size() != 1 || b.terms()[0].word.size() != 1 || !b.terms()[0].word[0].is_bracket() ||
            b.terms()[0].word[0].slots->size() != 3)
            fail(ErrorKind::Validation, "triple_indeterminacy needs a single three-slot bracket");
        const auto& slots = *b.terms()[0].word[0].slots;
        std::vector<std::optional<TwoLocalGroup>> ambient;
        const std::pair<int, int> pairs[] = {{1, 2}, {0, 2}, {0, 1}};
        for (auto [i, j] : pairs) {
            int d = halg::degree(slots[i]) + halg::degree(slots[j]);
            std::string id;
            ambient.push_back(kb_.lookup_group(c_, slots[0].target(), d, &id));
            note(id);
        }
        auto g = halg::triple_indeterminacy(slots[0], slots[1], slots[2], ambient);
        bind(st.name, LabeledGroup::plain(g, slots[0].target(), 0));
    } else if (st.op == "order") {
        const auto& g = group(a[0]).group;
        if (!g.is_finite()) fail(ErrorKind::Validation, "order of an infinite group");
        bind(st.name, static_cast<long long>(g.torsion_order()));
    }
    return describe(vars_.at(st.name));
}

std::string Runner::exec_element_op(const Step& st) {
    const auto& a = st.args;
    if (st.op == "term") {
        bind(st.name, element(st, 0));
    } else if (st.op == "int") {
        bind(st.name, integer(a[0]));
    } else if (st.op == "lookup_boundary") {
        std::string id;
        Element v = kb_.lookup_boundary(c_, text(a[0]), element(st, 1), a.size() > 2 ? text(a[2]) : "", &id);
        note(id);
        bind(st.name, v);
    } else if (st.op == "boundary_on_suspension") {
        BoundaryRule rule{element(st, 0), element(st, 1)};
        bind(st.name, boundary_on_suspension(c_, rule, element(st, 2)));
    } else if (st.op == "boundary") {
        // boundary NAME MAP "F" "JP" "ELEM" ["COMPONENT"]: the rule on suspension terms, KB facts on the rest
        BoundaryRule rule{element(st, 1), element(st, 2)};
        Element e = element(st, 3);
        std::string component = a.size() > 4 ? text(a[4]) : "";
        std::optional<Element> sum;
        for (const auto& t : e.terms()) {
            Element single(e.source(), e.target());
            single.mutable_terms().push_back(halg::Term{1, t.word});
            single = halg::normalize(c_, single);
            Element part;
            if (halg::desuspend(c_, single)) {
                part = boundary_on_suspension(c_, rule, single);
            } else {
                std::string id;
                part = kb_.lookup_boundary(c_, text(a[0]), single, component, &id);
                note(id);
            }
            part = halg::scale(c_, part, t.coef);
            sum = sum ? halg::add(c_, *sum, part) : part;
        }
        if (!sum) fail(ErrorKind::Validation, "boundary of 0 has no type; use a nonzero element");
        bind(st.name, *sum);
    } else if (st.op == "whitehead") {
        bind(st.name, halg::whitehead(c_, element(st, 0), element(st, 1)));
    } else if (st.op == "suspend") {
        bind(st.name, halg::suspend(c_, element(st, 0)));
    } else if (st.op == "apply") {
        bind(st.name, halg::compose(c_, element(st, 0), element(st, 1)));
    } else if (st.op == "add") {
        bind(st.name, halg::add(c_, element(st, 0), element(st, 1)));
    } else if (st.op == "scale") {
        bind(st.name, halg::scale(c_, element(st, 0), integer(a[1])));
    } else if (st.op == "naturality_push") {
        bind(st.name, halg::naturality_push(c_, element(st, 0), element(st, 1)));
    } else if (st.op == "extract_scalars") {
        auto [k, b] = halg::extract_scalars(c_, element(st, 0));
        bind(st.name + "_bracket", b);
        bind(st.name, static_cast<long long>(k));
    } else if (st.op == "coefficient") {
        // coefficient NAME ELEM GROUP "LABEL": the frame coordinate at LABEL
        const LabeledGroup& g = group(a[1]);
        std::string label = halg::render(halg::parse_term(c_, text(a[2]), env_));
        const auto& labels = g.frame.labels();
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) fail(ErrorKind::Validation, "coefficient: " + label + " is not a label of " + a[1]);
        auto coords = halg::coordinates(c_, element(st, 0), g.frame);
        bind(st.name, static_cast<long long>(coords[it - labels.begin()]));
    } else if (st.op == "solve_coefficient") {
        // solve_coefficient NAME GROUP "LABEL" "TERM in x" RHS: the x with coefficient(TERM) = RHS
        const LabeledGroup& g = group(a[0]);
        std::string label = halg::render(halg::parse_term(c_, text(a[1]), env_));
        const auto& labels = g.frame.labels();
        auto it = std::find(labels.begin(), labels.end(), label);
        if (it == labels.end()) fail(ErrorKind::Validation, "solve_coefficient: " + label + " is not a label of " + a[0]);
        std::size_t idx = it - labels.begin();
        if (g.frame.orders()[idx] != 0)
            fail(ErrorKind::Validation, "solve_coefficient needs a free summand, " + label + " has finite order");
        auto at = [&](long long x) {
            Env env = env_;
            env["x"] = x;
            Element e = halg::normalize(c_, halg::parse_term(c_, halg::interpolate(a[2], env), env));
            return static_cast<Int>(halg::coordinates(c_, e, g.frame)[idx]);
        };
        // sampled at x = 1 and x = 2 since a literal zero coefficient does not parse
        Int c1 = at(1), c2 = at(2), rhs = integer(a[3]);
        Int slope = c2 - c1;
        Int c0 = c1 - slope;
        if (slope == 0) fail(ErrorKind::Assertion, "solve_coefficient: the term does not depend on x");
        if ((rhs - c0) % slope != 0)
            fail(ErrorKind::Assertion, "solve_coefficient: " + std::to_string(slope) + " x + " + std::to_string(c0) +
                                           " = " + std::to_string(rhs) + " has no integer solution");
        Int x = (rhs - c0) / slope;
        if (at(x) != rhs) fail(ErrorKind::Internal, "solve_coefficient: the term is not linear in x");
        bind(st.name, static_cast<long long>(x));
    } else if (st.op == "solve_vanishing") {
        // solve_vanishing NAME MODE "TERM" VAR...: the unique 0/1 assignment making MODE(TERM) vanish;
        // MODE is "suspend" or "id". Binds NAME_VAR for every variable.
        const std::string& mode = a[0];
        if (mode != "suspend" && mode != "id") fail(ErrorKind::Validation, "solve_vanishing mode is suspend or id");
        std::vector<std::string> vars(a.begin() + 2, a.end());
        if (vars.size() > 16) fail(ErrorKind::Validation, "too many variables");
        std::vector<std::vector<long long>> zeros;
        for (unsigned mask = 0; mask < (1u << vars.size()); ++mask) {
            Env env = env_;
            std::vector<long long> assign;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                assign.push_back((mask >> i) & 1u);
                env[vars[i]] = assign.back();
            }
            Element e = halg::normalize(c_, halg::parse_term(c_, halg::interpolate(a[1], env), env));
            if (mode == "suspend") e = halg::suspend(c_, e);
            if (e.is_zero()) zeros.push_back(assign);
        }
        if (zeros.size() != 1)
            fail(ErrorKind::Assertion, "solve_vanishing: " + std::to_string(zeros.size()) +
                                           " assignments vanish, expected exactly one");
        for (std::size_t i = 0; i < vars.size(); ++i) bind(st.name + "_" + vars[i], zeros[0][i]);
        bind(st.name, static_cast<long long>(zeros[0].size()));
        std::string shown;
        for (std::size_t i = 0; i < vars.size(); ++i)
            shown += (i ? ", " : "") + vars[i] + " = " + std::to_string(zeros[0][i]);
        return shown;
    }
    return describe(vars_.at(st.name));
}

}  // namespace

RunResult run_script(const Script& s, const std::map<std::string, long long>& params, const RunOptions& opts) {
    if (!opts.kb || !opts.context) throw ScriptError(ErrorKind::Validation, 0, "run_script needs a catalog and a context");
    RunResult res;
    std::set<std::string> seen;
    Runner r(opts, res, seen, 0);
    opts.context->set_observer([&](const std::string& id) {
        if (!seen.insert(id).second) return;
        if (const kb::Fact* f = opts.kb->by_id(id))
            res.facts.push_back(ConsumedFact{id, kb::kind_name(f->kind), kb::trust_name(f->trust), f->field("locator"),
                                             f->quote()});
    });
    try {
        r.run(s, params);
    } catch (...) {
        opts.context->set_observer(nullptr);
        throw;
    }
    opts.context->set_observer(nullptr);
    res.bindings = r.vars();
    res.group = std::get<LabeledGroup>(res.bindings.at("result")).group;
    return res;
}

}  // namespace les
