#include "les/segment.hpp"

namespace les {

using zp2::Matrix;

LabeledGroup LabeledGroup::plain(TwoLocalGroup g, SpaceId space, int degree) {
    LabeledGroup out;
    out.frame = g;
    out.proj = zp2::identity(g.rank());
    out.lift = zp2::identity(g.rank());
    out.group = std::move(g);
    out.space = std::move(space);
    out.degree = degree;
    return out;
}

std::vector<Int> LabeledGroup::coords(const Context& c, const Element& e) const {
    std::vector<Int> f = halg::coordinates(c, e, frame);
    std::vector<Int> out(group.rank(), 0);
    for (std::size_t i = 0; i < group.rank(); ++i) {
        for (std::size_t j = 0; j < f.size(); ++j) out[i] = zp2::add(out[i], zp2::mul(proj[i][j], f[j]));
        out[i] = zp2::mod(out[i], group.orders()[i]);
    }
    return out;
}

Element LabeledGroup::element(const Context& c, const std::vector<Int>& coords) const {
    std::vector<Int> f(frame.rank(), 0);
    for (std::size_t j = 0; j < frame.rank(); ++j) {
        for (std::size_t i = 0; i < coords.size(); ++i) f[j] = zp2::add(f[j], zp2::mul(lift[j][i], coords[i]));
        f[j] = zp2::mod(f[j], frame.orders()[j]);
    }
    return halg::from_coordinates(c, f, frame, SpaceId::sphere(degree), space);
}

void LabeledGroup::refresh_labels(const Context& c) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < group.rank(); ++k) {
        std::vector<Int> e(group.rank(), 0);
        e[k] = 1;
        labels.push_back(halg::render(element(c, e)));
    }
    group = TwoLocalGroup(group.orders(), labels);
}

Element boundary_on_suspension(const Context& c, const BoundaryRule& rule, const Element& alpha) {
    auto pre = halg::desuspend(c, alpha);
    if (!pre)
        throw halg::MissingFact("KB fact required: boundary of " + halg::render(alpha) +
                                " (not a suspension, so the j_p o f rule does not apply)");
    return halg::compose(c, rule.jp, halg::compose(c, rule.f, *pre));
}

Scenario scenario_for(const jf::MapSpec& f) {
    const auto& terms = f.cls.terms();
    if (terms.size() != 1 || terms[0].word.size() != 1 || !terms[0].word[0].is_atom() || terms[0].coef <= 0 ||
        !zp2::is_pow2(terms[0].coef))
        throw jf::FiltrationError("no shipped scenario for " + f.text);
    const std::string& atom = terms[0].word[0].atom;
    int e = zp2::v2(terms[0].coef);
    if (atom == "iota_2" && e >= 1) {
        std::string r = std::to_string(e);
        return Scenario{SpaceId::moore(3, e), "j_p(" + r + ")", SpaceId::named("F(" + r + ")")};
    }
    if (atom == "eta_2") {
        std::string m = std::to_string(e);
        return Scenario{SpaceId::named("L4(" + m + ")"), "j_1^2", SpaceId::parse("S^2 v S^5")};
    }
    throw jf::FiltrationError("no shipped scenario for " + f.text);
}

namespace {

struct Filler {
    const kb::Catalog& kb;
    const Context& c;
    LesSegment& seg;

    std::optional<TwoLocalGroup> group(const SpaceId& space, int k, bool trivial_below, int conn) {
        if (trivial_below && k < conn) return TwoLocalGroup{};
        try {
            std::string id;
            auto g = kb.lookup_group(c, space, k, &id);
            if (!id.empty()) seg.facts.push_back(id);
            return g;
        } catch (const halg::MissingFact& e) {
            seg.missing.push_back(e.what());
        }
        return std::nullopt;
    }
};

}  // namespace

LesSegment assemble_segment(const kb::Catalog& kb, const Context& c, const jf::MapSpec& f, int k) {
    LesSegment seg;
    seg.k = k;
    Scenario sc = scenario_for(f);
    Filler fill{kb, c, seg};
    const int q = f.target.dim();
    SpaceId base_space = f.source.suspend();

    seg.base_up = fill.group(base_space, k + 1, false, 0);
    seg.base = fill.group(base_space, k, false, 0);
    seg.cofiber = fill.group(sc.cofiber, k, true, q);

    auto fiber_group = [&](int deg) -> std::optional<TwoLocalGroup> {
        if (deg < q) return TwoLocalGroup{};
        auto sk = jf::skeleton_of_fiber(c, f, deg + 1);
        SpaceId space = sk.space;
        if (space.kind() != SpaceId::Kind::Sphere && space.kind() != SpaceId::Kind::Wedge) space = sc.fiber_space;
        return fill.group(space, deg, false, 0);
    };
    seg.fiber = fiber_group(k);
    seg.fiber_down = fiber_group(k - 1);

    BoundaryRule rule{f.cls, halg::parse_term(c, sc.jp)};
    auto boundary_hom = [&](const std::optional<TwoLocalGroup>& src, const std::optional<TwoLocalGroup>& tgt,
                            int deg) -> std::optional<zp2::GroupHom> {
        if (!src || !tgt) return std::nullopt;
        Matrix m = zp2::zeros(tgt->rank(), src->rank());
        LabeledGroup target = LabeledGroup::plain(*tgt, SpaceId{}, deg - 1);
        for (std::size_t j = 0; j < src->rank(); ++j) {
            try {
                Element a = halg::parse_term(c, src->labels().at(j));
                auto col = target.coords(c, boundary_on_suspension(c, rule, a));
                for (std::size_t i = 0; i < col.size(); ++i) m[i][j] = col[i];
            } catch (const halg::MissingFact& e) {
                seg.missing.push_back(e.what());
                return std::nullopt;
            }
        }
        return zp2::GroupHom{*src, *tgt, m};
    };
    seg.d_up = boundary_hom(seg.base_up, seg.fiber, k + 1);
    seg.d_down = boundary_hom(seg.base, seg.fiber_down, k);
    return seg;
}

std::optional<bool> audit_exactness(const LesSegment& s) {
    if (!s.filled()) return std::nullopt;
    if (!s.cofiber->is_finite() || !s.fiber->is_finite() || !s.base->is_finite()) return std::nullopt;
    Int coker = zp2::cokernel(*s.d_up).group.torsion_order();
    Int ker = zp2::kernel(*s.d_down).group.torsion_order();
    return s.cofiber->torsion_order() == zp2::mul(coker, ker);
}

}  // namespace les
