#include "halg/algebra.hpp"

#include <map>
#include <regex>

namespace halg {

namespace {

constexpr int kMaxDepth = 200;

struct DepthGuard {
    static thread_local int depth;
    DepthGuard() {
        if (++depth > kMaxDepth) {
            --depth;
            throw AlgebraError("rewriting did not terminate (depth limit)");
        }
    }
    ~DepthGuard() { --depth; }
};
thread_local int DepthGuard::depth = 0;

SpaceId bracket_source(const std::vector<Element>& slots) {
    int total = static_cast<int>(slots.size()) - 1;
    std::string smash;
    bool spheres = true;
    for (const auto& s : slots) {
        if (s.source().kind() != SpaceId::Kind::Sphere) spheres = false;
        total += s.source().dim() - 1;
        smash += (smash.empty() ? "" : " ^ ") + s.source().str();
    }
    if (spheres) return SpaceId::sphere(total);
    return SpaceId::named("Sigma^" + std::to_string(slots.size() - 1) + "(" + smash + ")");
}

SpaceId factor_source(const Context& c, const Factor& f) {
    if (f.is_atom()) return c.symbol(f.atom).source;
    if (f.is_bracket()) return bracket_source(*f.slots);
    return f.group->source();
}

SpaceId factor_target(const Context& c, const Factor& f) {
    if (f.is_atom()) return c.symbol(f.atom).target;
    if (f.is_bracket()) return (*f.slots)[0].target();
    return f.group->target();
}

Element single(const Context& c, Word w, Int coef = 1) {
    Element e(c.canonical(factor_source(c, w.back())), c.canonical(factor_target(c, w.front())));
    if (coef != 0) e.mutable_terms().push_back(Term{coef, std::move(w)});
    return e;
}

Word slice(const Word& w, std::size_t b, std::size_t e) { return Word(w.begin() + b, w.begin() + e); }

Word concat(const Word& a, const Word& b) {
    Word w(a);
    w.insert(w.end(), b.begin(), b.end());
    return w;
}

bool is_iota(const Factor& f) { return f.is_atom() && f.atom.rfind("iota_", 0) == 0; }

bool suspension_word(const Context& c, const Word& w) {
    if (w.empty()) return false;
    for (const auto& f : w) {
        if (!f.is_atom()) return false;
        auto s = c.find(f.atom);
        if (!s || !s->is_suspension) return false;
    }
    return true;
}

// Sums like terms, reduces coefficients by known orders and sorts.
Element collect(const Context& c, const SpaceId& src, const SpaceId& tgt, const std::vector<Term>& terms,
                bool suspended = false) {
    std::map<std::string, Term> acc;
    for (const auto& t : terms) {
        if (t.coef == 0) continue;
        std::string key = render_word(t.word);
        auto it = acc.find(key);
        if (it == acc.end())
            acc.emplace(key, t);
        else
            it->second.coef = zp2::add(it->second.coef, t.coef);
    }
    Element out(c.canonical(src), c.canonical(tgt));
    for (auto& [key, t] : acc) {
        Int ord = word_order(c, t.word, out.source(), out.target());
        if (ord > 0) t.coef = zp2::mod(t.coef, ord);
        if (t.coef != 0) out.mutable_terms().push_back(std::move(t));
    }
    out.set_suspended(suspended);
    return out;
}

void append_scaled(std::vector<Term>& out, const Element& e, Int k) {
    for (const auto& t : e.terms()) out.push_back(Term{zp2::mul(t.coef, k), t.word});
}

void check_chain(const Context& c, const Element& f, const Element& g) {
    if (c.canonical(g.target()) != c.canonical(f.source()))
        throw AlgebraError("space mismatch: cannot compose " + render(f) + " (from " + f.source().str() + ") after " +
                           render(g) + " (into " + g.target().str() + ")");
}

Element rewrite_word(const Context& c, Word w);
Element compose_norm(const Context& c, const Element& f, const Element& g);
Element bracket_norm(const Context& c, const std::vector<Element>& slots, const std::string& tag);

Element norm_factor(const Context& c, const Factor& f) {
    if (f.is_atom()) {
        c.symbol(f.atom);
        return rewrite_word(c, Word{f});
    }
    if (f.is_bracket()) {
        std::vector<Element> slots;
        for (const auto& s : *f.slots) slots.push_back(normalize(c, s));
        return bracket_norm(c, slots, f.tag);
    }
    return normalize(c, *f.group);
}

Element norm_word(const Context& c, const Word& w) {
    if (w.empty()) throw AlgebraError("empty word");
    Element acc = norm_factor(c, w.back());
    for (std::size_t i = w.size() - 1; i-- > 0;) acc = compose_norm(c, norm_factor(c, w[i]), acc);
    return acc;
}

Element compose_norm(const Context& c, const Element& f, const Element& g) {
    DepthGuard guard;
    check_chain(c, f, g);
    if (f.is_zero() || g.is_zero()) return zero(c.canonical(g.source()), c.canonical(f.target()));
    bool g_unit = g.terms().size() == 1 && g.terms()[0].coef == 1;
    bool g_susp = is_suspension(c, g);
    if (c.strict() && !g_susp && (f.terms().size() > 1 || f.terms()[0].coef != 1))
        throw AlgebraError("ungated expansion: " + render(f) + " after non-suspension " + render(g));
    std::vector<Term> out;
    for (const auto& tf : f.terms()) {
        if (g_unit) {
            append_scaled(out, rewrite_word(c, concat(tf.word, g.terms()[0].word)), tf.coef);
            continue;
        }
        // Post-composition is additive whenever the source of g is a co-H-space,
        // and for suspension maps in general.
        bool right = g.source().is_suspension() || suspension_word(c, tf.word);
        if (right) {
            for (const auto& tg : g.terms())
                append_scaled(out, rewrite_word(c, concat(tf.word, tg.word)), zp2::mul(tf.coef, tg.coef));
        } else {
            Factor opaque;
            opaque.group = std::make_shared<const Element>(g);
            Word w = tf.word;
            w.push_back(opaque);
            out.push_back(Term{tf.coef, w});
        }
    }
    return collect(c, g.source(), f.target(), out, f.suspended() && g_susp);
}

Element identity_of(const SpaceId& s) {
    if (s.kind() != SpaceId::Kind::Sphere) throw AlgebraError("no identity generator for " + s.str());
    Factor f;
    f.atom = "iota_" + std::to_string(s.dim());
    Element e(s, s);
    e.mutable_terms().push_back(Term{1, Word{f}});
    return e;
}

std::string bracket_key(const std::vector<Element>& slots, const std::string& tag) {
    Factor f;
    f.slots = std::make_shared<const std::vector<Element>>(slots);
    f.tag = tag;
    return render_word(Word{f});
}

bool vanishes(const Context& c, const Element& a, const Element& b, int depth);

// Suffix words that are suspensions can be pulled out of a slot, and a common
// outer map can be pulled out of both; if what remains is a vanishing bracket,
// so is the original.
bool vanishes(const Context& c, const Element& a, const Element& b, int depth) {
    if (depth > 8) return false;
    if (const Rule* r = c.rule_for(bracket_key({a, b}, ""))) return r->rhs.is_zero();
    const Word& wa = a.terms()[0].word;
    const Word& wb = b.terms()[0].word;
    auto as_elem = [&](const Word& w, const SpaceId& src) {
        if (w.empty()) return identity_of(src);
        return single(c, w);
    };
    if (wa[0].is_atom() && wb[0].is_atom() && wa[0].atom == wb[0].atom && (wa.size() > 1 || wb.size() > 1)) {
        SpaceId inner = c.canonical(factor_source(c, wa[0]));
        if (inner.kind() == SpaceId::Kind::Sphere) {
            Element a2 = as_elem(slice(wa, 1, wa.size()), inner);
            Element b2 = as_elem(slice(wb, 1, wb.size()), inner);
            if (vanishes(c, a2, b2, depth + 1)) return true;
        }
    }
    for (int side = 0; side < 2; ++side) {
        const Word& w = side == 0 ? wb : wa;
        for (std::size_t k = 1; k < w.size(); ++k) {
            if (!suspension_word(c, slice(w, k, w.size()))) continue;
            Element head = single(c, slice(w, 0, k));
            if (head.source().kind() != SpaceId::Kind::Sphere) continue;
            bool z = side == 0 ? vanishes(c, a, head, depth + 1) : vanishes(c, head, b, depth + 1);
            if (z) return true;
        }
    }
    return false;
}

Element bracket_norm(const Context& c, const std::vector<Element>& slots, const std::string& tag) {
    DepthGuard guard;
    if (slots.size() < 2) throw AlgebraError("a bracket needs at least two slots");
    SpaceId tgt = c.canonical(slots[0].target());
    for (const auto& s : slots) {
        if (c.canonical(s.target()) != tgt)
            throw AlgebraError("bracket slots must share a target: " + s.target().str() + " vs " + tgt.str());
        if (!s.source().is_suspension()) throw AlgebraError("non-suspension source: " + s.source().str());
    }
    SpaceId src = c.canonical(bracket_source(slots));
    for (const auto& s : slots)
        if (s.is_zero()) return zero(src, tgt);
    if (slots.size() > 2) {
        Factor f;
        f.slots = std::make_shared<const std::vector<Element>>(slots);
        f.tag = tag;
        if (const Rule* r = c.rule_for(render_word(Word{f}))) return r->rhs;
        return single(c, Word{f});
    }
    std::vector<Term> out;
    for (const auto& t1 : slots[0].terms())
        for (const auto& t2 : slots[1].terms()) {
            Element a = single(c, t1.word), b = single(c, t2.word);
            Int k = zp2::mul(t1.coef, t2.coef);
            if (const Rule* r = c.rule_for(bracket_key({a, b}, ""))) {
                append_scaled(out, r->rhs, k);
                continue;
            }
            if (vanishes(c, a, b, 0)) continue;
            Factor f;
            f.slots = std::make_shared<const std::vector<Element>>(std::vector<Element>{a, b});
            out.push_back(Term{k, Word{f}});
        }
    return collect(c, src, tgt, out);
}

Element rewrite_word(const Context& c, Word w) {
    DepthGuard guard;
    if (w.size() > 1) {
        Word kept;
        for (auto& f : w)
            if (!is_iota(f)) kept.push_back(f);
        if (kept.empty()) kept.push_back(w.back());
        w = std::move(kept);
    }
    // naturality: g.[a, b] = [g.a, g.b]
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (!w[i].is_bracket() || w[i].slots->size() != 2) continue;
        Element pre = rewrite_word(c, slice(w, 0, i));
        Element br = bracket_norm(
            c, {compose_norm(c, pre, (*w[i].slots)[0]), compose_norm(c, pre, (*w[i].slots)[1])}, "");
        if (i + 1 < w.size()) return compose_norm(c, br, rewrite_word(c, slice(w, i + 1, w.size())));
        return br;
    }
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t len = w.size() - i; len >= 1; --len) {
            const Rule* r = c.rule_for(render_word(slice(w, i, i + len)));
            if (!r) continue;
            Element res = r->rhs;
            if (i > 0) res = compose_norm(c, rewrite_word(c, slice(w, 0, i)), res);
            if (i + len < w.size()) res = compose_norm(c, res, rewrite_word(c, slice(w, i + len, w.size())));
            return res;
        }
    Element e = single(c, w);
    return collect(c, e.source(), e.target(), e.terms());
}

}  // namespace

Element zero(const SpaceId& source, const SpaceId& target) { return Element(source, target); }

Element generator(const Context& c, const std::string& name) {
    Factor f;
    f.atom = name;
    return norm_factor(c, f);
}

Element scale(const Context& c, const Element& e, Int k) {
    std::vector<Term> out;
    append_scaled(out, e, k);
    return collect(c, e.source(), e.target(), out, e.suspended());
}

Element add(const Context& c, const Element& a, const Element& b) {
    if (c.canonical(a.source()) != c.canonical(b.source()) || c.canonical(a.target()) != c.canonical(b.target()))
        throw AlgebraError("space mismatch: cannot add " + render(a) + " and " + render(b));
    std::vector<Term> out(a.terms());
    out.insert(out.end(), b.terms().begin(), b.terms().end());
    return collect(c, a.source(), a.target(), out, a.suspended() && b.suspended());
}

Element negate(const Context& c, const Element& e) { return scale(c, e, -1); }

Element normalize(const Context& c, Element e) {
    std::vector<Term> out;
    for (const auto& t : e.terms()) append_scaled(out, norm_word(c, t.word), t.coef);
    return collect(c, e.source(), e.target(), out, e.suspended());
}

Element compose(const Context& c, const Element& f, const Element& g) { return compose_norm(c, f, g); }

Element suspend(const Context& c, const Element& e) {
    SpaceId src = c.canonical(e.source().suspend()), tgt = c.canonical(e.target().suspend());
    std::vector<Term> out;
    for (const auto& t : e.terms()) {
        bool has_bracket = false;
        for (const auto& f : t.word) has_bracket = has_bracket || f.is_bracket();
        if (has_bracket) continue;
        if (const Element* v = c.suspension_of(render_word(t.word))) {
            append_scaled(out, *v, t.coef);
            continue;
        }
        Element acc;
        for (std::size_t i = t.word.size(); i-- > 0;) {
            const Factor& f = t.word[i];
            Element part;
            if (f.is_group()) {
                part = suspend(c, *f.group);
            } else if (is_iota(f)) {
                part = generator(c, "iota_" + std::to_string(c.symbol(f.atom).source.dim() + 1));
            } else if (const Element* v = c.suspension_of(f.atom)) {
                part = *v;
            } else {
                part = generator(c, "Sigma " + f.atom);
            }
            acc = (i + 1 == t.word.size()) ? part : compose_norm(c, part, acc);
        }
        append_scaled(out, acc, t.coef);
    }
    for (const auto& t : out) {
        Element probe = single(c, t.word);
        if (probe.source() != src || probe.target() != tgt)
            throw AlgebraError("suspension value has type " + probe.source().str() + " -> " + probe.target().str() +
                               ", expected " + src.str() + " -> " + tgt.str());
    }
    return collect(c, src, tgt, out, true);
}

Element whitehead(const Context& c, const Element& f, const Element& g) { return bracket_norm(c, {f, g}, ""); }

Element higher_bracket(const Context& c, const std::vector<Element>& slots, const std::string& tag) {
    return bracket_norm(c, slots, slots.size() == 2 ? "" : tag);
}

namespace {
const Factor& lone_bracket(const Element& e, const char* what) {
    if (e.terms().size() != 1 || e.terms()[0].word.size() != 1 || !e.terms()[0].word[0].is_bracket())
        throw AlgebraError(std::string(what) + " needs a single bracket term, got " + render(e));
    return e.terms()[0].word[0];
}
}  // namespace

Element naturality_push(const Context& c, const Element& g, const Element& bracket) {
    const Factor& b = lone_bracket(bracket, "naturality_push");
    check_chain(c, g, bracket);
    if (g.terms().size() != 1 || g.terms()[0].coef != 1)
        throw AlgebraError("naturality_push needs a single map, got " + render(g));
    std::vector<Element> slots;
    for (const auto& s : *b.slots) slots.push_back(compose_norm(c, g, s));
    return scale(c, bracket_norm(c, slots, b.tag), bracket.terms()[0].coef);
}

std::pair<Int, Element> extract_scalars(const Context& c, const Element& bracket) {
    const Factor& b = lone_bracket(bracket, "extract_scalars");
    Int k = bracket.terms()[0].coef;
    std::vector<Element> slots;
    for (const auto& s : *b.slots) {
        if (s.terms().size() != 1) throw AlgebraError("extract_scalars needs monomial slots, got " + render(s));
        k = zp2::mul(k, s.terms()[0].coef);
        slots.push_back(single(c, s.terms()[0].word));
    }
    return {k, bracket_norm(c, slots, b.tag)};
}

zp2::TwoLocalGroup triple_indeterminacy(const Element& f1, const Element& f2, const Element& f3,
                                        const std::vector<std::optional<zp2::TwoLocalGroup>>& ambient) {
    if (f1.target() != f2.target() || f2.target() != f3.target())
        throw AlgebraError("triple product slots must share a target");
    if (ambient.size() != 3) throw AlgebraError("triple indeterminacy needs three ambient groups");
    for (std::size_t i = 0; i < 3; ++i)
        if (!ambient[i]) throw MissingFact("KB fact required: ambient mapping group for slot pair " + std::to_string(i + 1));
    for (const auto& g : ambient)
        if (!g->is_trivial())
            throw AlgebraError("indeterminacy is set-valued: ambient group " + g->render() + " is not trivial");
    return zp2::TwoLocalGroup{};
}

Element apply_rule_at(const Context& c, const Element& e, std::size_t pos, std::size_t len) {
    if (e.terms().size() != 1) throw AlgebraError("apply_rule_at needs a single term");
    const Word& w = e.terms()[0].word;
    if (pos + len > w.size() || len == 0) throw AlgebraError("rule site out of range");
    const Rule* r = c.rule_for(render_word(slice(w, pos, pos + len)));
    if (!r) throw AlgebraError("no rule at site");
    Element res = r->rhs;
    if (pos > 0) res = compose_norm(c, norm_word(c, slice(w, 0, pos)), res);
    if (pos + len < w.size()) res = compose_norm(c, res, norm_word(c, slice(w, pos + len, w.size())));
    return scale(c, res, e.terms()[0].coef);
}

std::vector<std::pair<std::size_t, std::size_t>> rule_sites(const Context& c, const Element& e) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (e.terms().size() != 1) return out;
    const Word& w = e.terms()[0].word;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t len = 1; i + len <= w.size(); ++len)
            if (c.rule_for(render_word(slice(w, i, i + len)))) out.emplace_back(i, len);
    return out;
}

bool is_suspension(const Context& c, const Element& e) {
    if (e.suspended()) return true;
    for (const auto& t : e.terms())
        if (!suspension_word(c, t.word)) return false;
    return true;
}

namespace {

// The same name one sphere lower: "eta_4^2" -> "eta_3^2", "iota_5" -> "iota_4".
std::optional<std::string> lower_index(const std::string& atom) {
    static const std::regex re(R"(^(.*_)(\d+)(\^\d+)?$)");
    std::smatch m;
    if (!std::regex_match(atom, m, re)) return std::nullopt;
    int n = std::stoi(m[2].str());
    if (n <= 1) return std::nullopt;
    return m[1].str() + std::to_string(n - 1) + m[3].str();
}

std::optional<Element> desuspend_atom(const Context& c, const std::string& atom) {
    std::vector<std::string> cands;
    if (atom.rfind("Sigma ", 0) == 0) cands.push_back(atom.substr(6));
    for (const auto& w : c.suspension_preimages(atom)) cands.push_back(w);
    if (auto l = lower_index(atom); l && c.find(*l)) cands.push_back(*l);
    for (const auto& cand : cands) {
        Element g = parse_term(c, cand);
        if (render(suspend(c, g)) == atom) return g;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Element> desuspend(const Context& c, const Element& e) {
    Element target = normalize(c, e);
    if (target.is_zero()) {
        if (target.source().kind() != SpaceId::Kind::Sphere || target.target().kind() != SpaceId::Kind::Sphere ||
            target.source().dim() < 2 || target.target().dim() < 2)
            return std::nullopt;
        return zero(SpaceId::sphere(target.source().dim() - 1), SpaceId::sphere(target.target().dim() - 1));
    }
    std::optional<Element> sum;
    for (const auto& t : target.terms()) {
        std::optional<Element> pre;
        for (const auto& w : c.suspension_preimages(render_word(t.word))) {
            Element g = parse_term(c, w);
            if (render(suspend(c, g)) == render_word(t.word)) {
                pre = g;
                break;
            }
        }
        if (!pre) {
            for (std::size_t i = t.word.size(); i-- > 0;) {
                const Factor& f = t.word[i];
                if (!f.is_atom()) return std::nullopt;
                auto part = desuspend_atom(c, f.atom);
                if (!part) return std::nullopt;
                pre = pre ? compose_norm(c, *part, *pre) : *part;
            }
        }
        Element scaled = scale(c, *pre, t.coef);
        sum = sum ? add(c, *sum, scaled) : scaled;
    }
    if (render(suspend(c, *sum)) != render(target)) return std::nullopt;
    return sum;
}

int degree(const Element& e) { return e.source().kind() == SpaceId::Kind::Sphere ? e.source().dim() : -1; }

Int word_order(const Context& c, const Word& w, const SpaceId& source, const SpaceId& target) {
    if (w.size() == 1 && w[0].is_atom()) {
        auto s = c.find(w[0].atom);
        if (s && s->order_known && s->order > 0) return s->order;
    }
    std::string key = render_word(w);
    if (auto o = c.word_order(key); o && *o > 0) return *o;
    if (w.size() == 1 && w[0].is_bracket() && w[0].slots->size() == 2) {
        // bilinear, so the order divides the order of each slot
        Int best = 0;
        for (const auto& s : *w[0].slots) {
            if (s.terms().size() != 1) continue;
            Int o = word_order(c, s.terms()[0].word, s.source(), s.target());
            if (o > 0 && (best == 0 || o < best)) best = o;
        }
        if (best > 0) return best;
    }
    if (source.kind() == SpaceId::Kind::Sphere) {
        if (const HomeGroup* h = c.home_group(target, source.dim())) {
            const auto& labels = h->group.labels();
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == key) return h->group.orders()[i];
            if (h->group.is_finite()) return h->group.exponent();
        }
    }
    Int best = 0;
    if (w.size() > 1 && source.is_suspension()) {
        Word rest = slice(w, 1, w.size());
        best = word_order(c, rest, source, c.canonical(factor_target(c, rest.front())));
    }
    if (w.size() > 1 && suspension_word(c, Word{w.back()})) {
        Word pre = slice(w, 0, w.size() - 1);
        Int o = word_order(c, pre, c.canonical(factor_source(c, pre.back())), target);
        if (o > 0 && (best == 0 || o < best)) best = o;
    }
    return best;
}

std::vector<Int> coordinates(const Context& c, const Element& e, const zp2::TwoLocalGroup& g) {
    std::vector<Int> out(g.rank(), 0);
    const bool torsion_free = g.free_rank() == g.rank();
    for (const auto& t : e.terms()) {
        std::string key = render_word(t.word);
        bool found = false;
        for (std::size_t i = 0; i < g.labels().size(); ++i)
            if (g.labels()[i] == key) {
                out[i] = zp2::mod(zp2::add(out[i], t.coef), g.orders()[i]);
                found = true;
                break;
            }
        // a term of finite order vanishes in a torsion-free group
        if (!found && torsion_free && word_order(c, t.word, e.source(), e.target()) > 0) continue;
        if (!found)
            throw MissingFact("KB fact required: " + key + " is not a generator of " + g.render_labeled());
    }
    return out;
}

Element from_coordinates(const Context& c, const std::vector<Int>& coords, const zp2::TwoLocalGroup& g,
                         const SpaceId& source, const SpaceId& target) {
    if (coords.size() != g.rank() || g.labels().size() != g.rank())
        throw AlgebraError("coordinate vector does not match the labeled group");
    Element acc = zero(c.canonical(source), c.canonical(target));
    for (std::size_t i = 0; i < coords.size(); ++i)
        if (coords[i] != 0) acc = add(c, acc, scale(c, parse_term(c, g.labels()[i]), coords[i]));
    return acc;
}

}  // namespace halg
