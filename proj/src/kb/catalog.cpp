#include "kb/catalog.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace kb {

using halg::Element;
using halg::Env;
using halg::SpaceId;

namespace {

const std::vector<std::string> kFieldOrder = {"subject", "map",   "space",       "degree",     "component", "form",
                                              "value",   "order", "suspensions", "suspension", "params",    "trust",
                                              "locator", "quote"};

const std::map<Kind, std::pair<std::vector<std::string>, std::vector<std::string>>> kSchema = {
    // kind -> (required, optional) beyond trust/locator/quote/params
    {Kind::Group, {{"subject", "value"}, {"suspensions"}}},
    {Kind::Relation, {{"subject"}, {"value", "order"}}},
    {Kind::BoundaryValue, {{"map", "subject", "value"}, {"component"}}},
    {Kind::LiftCertificate, {{"space", "degree", "subject", "value", "order"}, {}}},
    {Kind::SuspensionValue, {{"subject", "value"}, {}}},
    {Kind::MapIdentity, {{"subject", "form", "value"}, {"order", "suspension"}}},
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

Kind parse_kind(const std::string& s, const std::string& where) {
    static const std::map<std::string, Kind> m = {{"group", Kind::Group},
                                                  {"relation", Kind::Relation},
                                                  {"boundary_value", Kind::BoundaryValue},
                                                  {"lift_certificate", Kind::LiftCertificate},
                                                  {"suspension_value", Kind::SuspensionValue},
                                                  {"map_identity", Kind::MapIdentity}};
    auto it = m.find(s);
    if (it == m.end()) throw KbError(where + ": unknown fact kind '" + s + "'");
    return it->second;
}

Trust parse_trust(const std::string& s, const std::string& where) {
    if (s == "paper") return Trust::Paper;
    if (s == "classical_table") return Trust::ClassicalTable;
    if (s == "derived") return Trust::Derived;
    throw KbError(where + ": unknown trust level '" + s + "'");
}

std::string sha256_hex(const std::string& data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, out, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw KbError("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[out[i] >> 4];
        s += hex[out[i] & 15];
    }
    return s;
}

// Is the label a single generator name (possibly "Sigma x")?
bool atomic_label(const std::string& label) {
    std::string s = label.rfind("Sigma ", 0) == 0 ? label.substr(6) : label;
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'' || ch == '~' || ch == '^' ||
              ch == '(' || ch == ')'))
            return false;
    // eta powers are composites
    if (s.rfind("eta_", 0) == 0 && s.find('^') != std::string::npos) return false;
    return true;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '[' || ch == '(') ++depth;
        if (ch == ']' || ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

// Undetermined constants that facts may mention; build_context can override them.
Env default_globals() { return Env{{"eps", 0}, {"eps_chi", 0}}; }

halg::Symbol make_symbol(const std::string& name, const SpaceId& src, const SpaceId& tgt, zp2::Int order, bool susp) {
    return halg::Symbol{name, src, tgt, order, true, susp};
}

}  // namespace

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::Group: return "group";
        case Kind::Relation: return "relation";
        case Kind::BoundaryValue: return "boundary_value";
        case Kind::LiftCertificate: return "lift_certificate";
        case Kind::SuspensionValue: return "suspension_value";
        case Kind::MapIdentity: return "map_identity";
    }
    return "?";
}

std::string trust_name(Trust t) {
    switch (t) {
        case Trust::Paper: return "paper";
        case Trust::ClassicalTable: return "classical_table";
        case Trust::Derived: return "derived";
    }
    return "?";
}

bool Fact::undetermined_sign() const {
    return field("value").find("+-") != std::string::npos;
}

std::pair<int, std::string> split_homotopy_subject(const std::string& subject) {
    std::string s = trim(subject);
    if (s.rfind("pi_", 0) != 0) throw KbError("expected pi_k(space), got '" + s + "'");
    std::size_t lp = s.find('(');
    if (lp == std::string::npos || s.back() != ')') throw KbError("expected pi_k(space), got '" + s + "'");
    int k = std::stoi(s.substr(3, lp - 3));
    return {k, s.substr(lp + 1, s.size() - lp - 2)};
}

Catalog::Catalog(const Catalog& o)
    : facts_(o.facts_), instances_(o.instances_), index_(o.index_), version_(o.version_), digest_(o.digest_) {
    for (auto& inst : instances_) inst.fact = &facts_[static_cast<std::size_t>(inst.fact - o.facts_.data())];
}

Catalog& Catalog::operator=(const Catalog& o) {
    if (this != &o) *this = Catalog(o);
    return *this;
}

Catalog Catalog::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KbError("cannot open knowledge base '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

Catalog Catalog::parse(const std::string& text, const std::string& origin) {
    Catalog c;
    c.digest_ = sha256_hex(text);
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    Fact* cur = nullptr;
    auto where = [&](int l) { return origin + ":" + std::to_string(l); };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty()) {
            cur = nullptr;
            continue;
        }
        if (line[0] == '#') continue;
        if (line[0] == '@') {
            std::istringstream hs(line.substr(1));
            std::string kind, id, extra;
            hs >> kind >> id >> extra;
            if (id.empty() || !extra.empty()) throw KbError(where(lineno) + ": fact header must be '@kind id'");
            for (const auto& f : c.facts_)
                if (f.id == id)
                    throw KbError(where(lineno) + ": duplicate fact id '" + id + "' (first at line " +
                                  std::to_string(f.line) + ")");
            Fact f;
            f.kind = parse_kind(kind, where(lineno));
            f.id = id;
            f.line = lineno;
            c.facts_.push_back(f);
            cur = &c.facts_.back();
            continue;
        }
        std::size_t colon = line.find(':');
        if (colon == std::string::npos) throw KbError(where(lineno) + ": expected 'key: value'");
        std::string key = trim(line.substr(0, colon)), value = trim(line.substr(colon + 1));
        if (!cur) {
            if (key == "version") {
                c.version_ = value;
                continue;
            }
            throw KbError(where(lineno) + ": field '" + key + "' outside a fact");
        }
        if (std::find(kFieldOrder.begin(), kFieldOrder.end(), key) == kFieldOrder.end())
            throw KbError(where(lineno) + ": unknown field '" + key + "'");
        if (cur->fields.count(key)) throw KbError(where(lineno) + ": field '" + key + "' given twice");
        cur->fields[key] = value;
    }
    for (auto& f : c.facts_) {
        std::string w = where(f.line) + ": fact '" + f.id + "'";
        if (f.field("quote").empty()) throw KbError(w + ": missing provenance quote");
        if (f.field("quote").size() > 200) throw KbError(w + ": provenance quote longer than 200 characters");
        if (f.field("locator").empty()) throw KbError(w + ": missing locator");
        if (f.field("trust").empty()) throw KbError(w + ": missing trust level");
        f.trust = parse_trust(f.field("trust"), w);
        const auto& schema = kSchema.at(f.kind);
        for (const auto& req : schema.first)
            if (f.field(req).empty()) throw KbError(w + ": missing field '" + req + "'");
        for (const auto& [key, val] : f.fields) {
            (void)val;
            if (key == "trust" || key == "locator" || key == "quote" || key == "params") continue;
            bool ok = std::find(schema.first.begin(), schema.first.end(), key) != schema.first.end() ||
                      std::find(schema.second.begin(), schema.second.end(), key) != schema.second.end();
            if (!ok) throw KbError(w + ": field '" + key + "' does not apply to " + kind_name(f.kind) + " facts");
        }
        if (f.kind == Kind::Relation && f.field("value").empty() == f.field("order").empty())
            throw KbError(w + ": a relation needs exactly one of 'value' or 'order'");
        if (!f.field("params").empty()) {
            // "m in 2..62"
            std::istringstream ps(f.field("params"));
            std::string name, in_kw, range;
            ps >> name >> in_kw >> range;
            std::size_t dots = range.find("..");
            if (in_kw != "in" || dots == std::string::npos) throw KbError(w + ": params must read 'name in lo..hi'");
            f.param = name;
            f.lo = std::stoll(range.substr(0, dots));
            f.hi = std::stoll(range.substr(dots + 2));
            if (f.lo > f.hi || f.hi - f.lo > 200) throw KbError(w + ": bad parameter range");
        }
    }
    c.instantiate(origin);
    return c;
}

void Catalog::instantiate(const std::string& origin) {
    instances_.clear();
    index_.clear();
    std::map<std::string, int> first_line;
    for (const auto& f : facts_) {
        std::vector<long long> values;
        if (f.param.empty())
            values.push_back(0);
        else
            for (long long v = f.lo; v <= f.hi; ++v) values.push_back(v);
        for (long long v : values) {
            Env env = default_globals();
            if (!f.param.empty()) env[f.param] = v;
            Instance inst;
            inst.fact = &f;
            inst.value = v;
            try {
                for (const auto& [k, val] : f.fields)
                    inst.fields[k] = (k == "quote" || k == "locator") ? val : halg::interpolate(val, env);
            } catch (const std::overflow_error&) {
                continue;  // parameter value out of native range
            } catch (const halg::AlgebraError& e) {
                throw KbError(origin + ":" + std::to_string(f.line) + ": fact '" + f.id + "': " + e.what());
            }
            std::string key;
            try {
                switch (f.kind) {
                    case Kind::Group: {
                        auto [k, space] = split_homotopy_subject(inst.fields["subject"]);
                        key = "pi_" + std::to_string(k) + "(" + SpaceId::parse(space).str() + ")";
                        auto g = zp2::TwoLocalGroup::parse(inst.fields["value"]);
                        if (!g.is_trivial() && g.labels().size() != g.rank())
                            throw KbError("group facts need one label per summand");
                        break;
                    }
                    case Kind::BoundaryValue:
                        key = inst.fields["map"] + " | " + inst.fields["subject"] + " | " + inst.fields["component"];
                        break;
                    case Kind::LiftCertificate:
                        key = SpaceId::parse(inst.fields["space"]).str() + " | " + inst.fields["degree"] + " | " +
                              inst.fields["subject"];
                        break;
                    default:
                        key = inst.fields["subject"];
                }
            } catch (const std::exception& e) {
                throw KbError(origin + ":" + std::to_string(f.line) + ": fact '" + f.id + "': " + e.what());
            }
            inst.key = key;
            std::string ikey = kind_name(f.kind) + "|" + key;
            auto it = first_line.find(ikey);
            if (it != first_line.end())
                throw KbError(origin + ": duplicate subject '" + key + "' at line " + std::to_string(it->second) +
                              " and line " + std::to_string(f.line));
            first_line[ikey] = f.line;
            index_[ikey] = instances_.size();
            instances_.push_back(std::move(inst));
        }
    }
}

std::string Catalog::serialize() const {
    std::ostringstream out;
    out << "version: " << version_ << "\n";
    for (const auto& f : facts_) {
        out << "\n@" << kind_name(f.kind) << " " << f.id << "\n";
        for (const auto& key : kFieldOrder) {
            auto it = f.fields.find(key);
            if (it != f.fields.end()) out << key << ": " << it->second << "\n";
        }
    }
    return out.str();
}

const Fact* Catalog::by_id(const std::string& id) const {
    for (const auto& f : facts_)
        if (f.id == id) return &f;
    return nullptr;
}

Catalog Catalog::without(const std::vector<std::string>& ids) const {
    Catalog c;
    c.version_ = version_;
    for (const auto& f : facts_)
        if (std::find(ids.begin(), ids.end(), f.id) == ids.end()) c.facts_.push_back(f);
    c.digest_ = sha256_hex(c.serialize());
    c.instantiate("<filtered>");
    return c;
}

const Instance* Catalog::find_instance(Kind kind, const std::string& key) const {
    auto it = index_.find(kind_name(kind) + "|" + key);
    return it == index_.end() ? nullptr : &instances_[it->second];
}

halg::Context Catalog::build_context(const Env& globals) const {
    halg::Context c;
    // Re-interpolate fields that mention global parameters.
    auto fields_of = [&](const Instance& inst) {
        if (globals.empty()) return inst.fields;
        Env env = default_globals();
        for (const auto& [k, v] : globals) env[k] = v;
        if (!inst.fact->param.empty()) env[inst.fact->param] = inst.value;
        std::map<std::string, std::string> out;
        for (const auto& [k, v] : inst.fact->fields) out[k] = (k == "quote" || k == "locator") ? v : halg::interpolate(v, env);
        return out;
    };
    auto fail = [&](const Instance& inst, const std::exception& e) {
        return KbError("fact '" + inst.fact->id + "' (line " + std::to_string(inst.fact->line) + "): " + e.what());
    };

    // 1. space identifications, then declarations (which canonicalize their types)
    for (const auto& inst : instances_) {
        if (inst.fact->kind != Kind::MapIdentity || inst.fields.at("form") != "space") continue;
        auto f = fields_of(inst);
        try {
            c.add_space_alias(SpaceId::parse(f["subject"]).str(), SpaceId::parse(f["value"]));
        } catch (const std::exception& e) {
            throw fail(inst, e);
        }
    }
    for (const auto& inst : instances_) {
        if (inst.fact->kind != Kind::MapIdentity) continue;
        auto f = fields_of(inst);
        try {
            if (f["form"] == "space") {
                continue;
            } else if (f["form"] == "declare") {
                std::size_t arrow = f["value"].find("->");
                if (arrow == std::string::npos) throw KbError("declaration needs 'A -> B'");
                zp2::Int order = f["order"].empty() ? 0 : std::stoll(f["order"]);
                c.declare(halg::Symbol{f["subject"], SpaceId::parse(f["value"].substr(0, arrow)),
                                       SpaceId::parse(f["value"].substr(arrow + 2)), order, !f["order"].empty(),
                                       f["suspension"] == "yes"});
            } else if (f["form"] != "equation") {
                throw KbError("form must be declare, equation or space");
            }
        } catch (const std::exception& e) {
            throw fail(inst, e);
        }
    }
    for (const auto& inst : instances_) {
        auto f = fields_of(inst);
        try {
            if (inst.fact->kind == Kind::Group) {
                auto [k, space] = split_homotopy_subject(f["subject"]);
                auto g = zp2::TwoLocalGroup::parse(f["value"]);
                auto susp = split_list(f["suspensions"]);
                for (std::size_t i = 0; i < g.labels().size(); ++i) {
                    const auto& label = g.labels()[i];
                    if (!atomic_label(label) || label.rfind("Sigma ", 0) == 0) continue;
                    bool s = std::find(susp.begin(), susp.end(), label) != susp.end();
                    c.declare(make_symbol(label, SpaceId::sphere(k), SpaceId::parse(space), g.orders()[i], s));
                }
            } else if (inst.fact->kind == Kind::LiftCertificate) {
                c.declare(make_symbol(f["value"], SpaceId::sphere(std::stoi(f["degree"])), SpaceId::parse(f["space"]),
                                      std::stoll(f["order"]), false));
            }
        } catch (const std::exception& e) {
            throw fail(inst, e);
        }
    }
    // 2. everything that needs terms, parsed against the bare symbol table so rule
    //    left-hand sides are not rewritten by each other
    const halg::Context bare = c;
    for (const auto& inst : instances_) {
        auto f = fields_of(inst);
        const std::string& id = inst.fact->id;
        try {
            switch (inst.fact->kind) {
                case Kind::Group: {
                    auto [k, space] = split_homotopy_subject(f["subject"]);
                    auto g = zp2::TwoLocalGroup::parse(f["value"]);
                    zp2::TwoLocalGroup relabeled;
                    std::vector<std::string> labels;
                    for (std::size_t i = 0; i < g.labels().size(); ++i) {
                        std::string key = halg::render(halg::parse_term(bare, g.labels()[i]));
                        labels.push_back(key);
                        if (!atomic_label(g.labels()[i])) c.add_word_order(key, g.orders()[i], id);
                    }
                    c.add_home_group(SpaceId::parse(space), k, zp2::TwoLocalGroup(g.orders(), labels), id);
                    break;
                }
                case Kind::Relation: {
                    Element lhs = halg::parse_term(bare, f["subject"]);
                    if (lhs.terms().size() != 1 || lhs.terms()[0].coef != 1)
                        throw KbError("relation subject must be a single word");
                    std::string key = halg::render_word(lhs.terms()[0].word);
                    if (!f["order"].empty()) {
                        c.add_word_order(key, std::stoll(f["order"]), id);
                    } else {
                        Element rhs = trim(f["value"]) == "0" ? halg::zero(lhs.source(), lhs.target())
                                                             : halg::parse_term(bare, f["value"]);
                        if (bare.canonical(rhs.source()) != bare.canonical(lhs.source()) ||
                            bare.canonical(rhs.target()) != bare.canonical(lhs.target()))
                            throw KbError("relation sides have different types");
                        c.add_rule(halg::Rule{key, rhs, id});
                    }
                    break;
                }
                case Kind::MapIdentity: {
                    if (f["form"] != "equation") break;
                    Element lhs = halg::parse_term(bare, f["subject"]);
                    if (lhs.terms().size() != 1 || lhs.terms()[0].coef != 1)
                        throw KbError("map identity subject must be a single word");
                    Element rhs = trim(f["value"]) == "0" ? halg::zero(lhs.source(), lhs.target())
                                                         : halg::parse_term(bare, f["value"]);
                    if (bare.canonical(rhs.source()) != bare.canonical(lhs.source()) ||
                        bare.canonical(rhs.target()) != bare.canonical(lhs.target()))
                        throw KbError("map identity sides have different types");
                    c.add_rule(halg::Rule{halg::render_word(lhs.terms()[0].word), rhs, id});
                    break;
                }
                case Kind::SuspensionValue: {
                    Element lhs = halg::parse_term(bare, f["subject"]);
                    if (lhs.terms().size() != 1 || lhs.terms()[0].coef != 1)
                        throw KbError("suspension subject must be a single word");
                    SpaceId src = bare.canonical(lhs.source().suspend()), tgt = bare.canonical(lhs.target().suspend());
                    Element rhs = trim(f["value"]) == "0" ? halg::zero(src, tgt) : halg::parse_term(bare, f["value"]);
                    if (bare.canonical(rhs.source()) != src || bare.canonical(rhs.target()) != tgt)
                        throw KbError("suspension value has type " + rhs.source().str() + " -> " + rhs.target().str() +
                                      ", expected " + src.str() + " -> " + tgt.str());
                    c.add_suspension(halg::render_word(lhs.terms()[0].word), rhs, id);
                    break;
                }
                default:
                    break;
            }
        } catch (const std::exception& e) {
            throw fail(inst, e);
        }
    }
    return c;
}

zp2::TwoLocalGroup Catalog::lookup_group(const halg::Context& c, const SpaceId& space, int k,
                                         std::string* fact_id) const {
    SpaceId s = c.canonical(space);
    std::string key = "pi_" + std::to_string(k) + "(" + s.str() + ")";
    const Instance* inst = find_instance(Kind::Group, key);
    if (!inst) {
        // try the name the space was given before identification
        inst = find_instance(Kind::Group, "pi_" + std::to_string(k) + "(" + space.str() + ")");
    }
    if (inst) {
        if (fact_id) *fact_id = inst->fact->id;
        auto g = zp2::TwoLocalGroup::parse(inst->fields.at("value"));
        std::vector<std::string> labels;
        for (const auto& l : g.labels()) labels.push_back(halg::render(halg::parse_term(c, l)));
        return zp2::TwoLocalGroup(g.orders(), labels);
    }
    // connectivity and the Hurewicz degree for spheres and wedges of spheres
    std::vector<SpaceId> parts = s.kind() == SpaceId::Kind::Wedge ? s.parts() : std::vector<SpaceId>{s};
    bool spheres = true;
    int bottom = 1 << 30, count_bottom = 0;
    for (const auto& p : parts) {
        if (p.kind() != SpaceId::Kind::Sphere) {
            spheres = false;
            break;
        }
        if (p.dim() < bottom) bottom = p.dim(), count_bottom = 0;
        if (p.dim() == bottom) ++count_bottom;
    }
    if (spheres && k < bottom) {
        if (fact_id) *fact_id = "";
        return zp2::TwoLocalGroup{};
    }
    if (s.kind() == SpaceId::Kind::Sphere && k == s.dim()) {
        if (fact_id) *fact_id = "";
        return zp2::TwoLocalGroup({0}, {"iota_" + std::to_string(k)});
    }
    throw halg::MissingFact("KB fact required: pi_" + std::to_string(k) + "(" + s.str() + ")");
}

Element Catalog::lookup_boundary(const halg::Context& c, const std::string& map, const Element& element,
                                 const std::string& component, std::string* fact_id) const {
    std::string want = halg::render(element);
    for (const auto& inst : instances_) {
        if (inst.fact->kind != Kind::BoundaryValue) continue;
        auto f = inst.fields;
        if (trim(f["map"]) != trim(map) || trim(f["component"]) != trim(component)) continue;
        Element subj = halg::parse_term(c, f["subject"]);
        if (halg::render(subj) != want) continue;
        if (fact_id) *fact_id = inst.fact->id;
        c.note(inst.fact->id);
        return halg::parse_term(c, f["value"]);
    }
    throw halg::MissingFact("KB fact required: boundary " + map + " of " + want +
                            (component.empty() ? "" : " (component " + component + ")"));
}

std::optional<LiftCertificate> Catalog::lift_certificate(const halg::Context& c, const SpaceId& space, int degree,
                                                         const std::string& label) const {
    std::string sp = c.canonical(space).str();
    for (const auto& inst : instances_) {
        if (inst.fact->kind != Kind::LiftCertificate) continue;
        const auto& f = inst.fields;
        if (c.canonical(SpaceId::parse(f.at("space"))).str() != sp || std::stoi(f.at("degree")) != degree) continue;
        if (halg::render(halg::parse_term(c, f.at("subject"))) != label) continue;
        c.note(inst.fact->id);
        return LiftCertificate{f.at("value"), std::stoll(f.at("order")), inst.fact->id};
    }
    return std::nullopt;
}

std::vector<std::string> derivable_facts(const Catalog& c) {
    std::vector<std::string> out;
    const halg::Context full = c.build_context();
    for (const auto& f : c.facts()) {
        bool equation = f.kind == Kind::MapIdentity && f.field("form") == "equation";
        if (f.kind != Kind::Relation && f.kind != Kind::SuspensionValue && !equation) continue;
        const Catalog reduced_cat = c.without({f.id});
        const halg::Context reduced = reduced_cat.build_context();
        int seen = 0;
        bool derivable = false;
        for (const auto& inst : c.instances()) {
            if (inst.fact != &f || seen >= 3) continue;
            ++seen;
            Element lhs = halg::parse_term(reduced, inst.fields.at("subject"));
            if (f.kind == Kind::SuspensionValue) {
                derivable = derivable || halg::render(halg::suspend(reduced, lhs)) ==
                                             halg::render(halg::parse_term(full, inst.fields.at("value")));
            } else if (!f.field("order").empty()) {
                const auto& t = lhs.terms().at(0);
                zp2::Int bound = halg::word_order(reduced, t.word, lhs.source(), lhs.target());
                derivable = derivable || (bound != 0 && bound <= std::stoll(f.field("order")));
            } else {
                const std::string& v = inst.fields.at("value");
                Element stated = v == "0" ? halg::zero(lhs.source(), lhs.target()) : halg::parse_term(full, v);
                derivable = derivable || halg::render(lhs) == halg::render(stated);
            }
        }
        if (derivable) out.push_back(f.id);
    }
    return out;
}

}  // namespace kb
