#include "jf/filtration.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "json.hpp"

namespace jf {

using halg::Context;
using halg::Symbol;
using zp2::Int;
using zp2::TwoLocalGroup;

namespace {

void check_end(const SpaceId& s, const char* which) {
    if (!s.is_suspension())
        throw FiltrationError(std::string("filtration needs a suspension as ") + which + ", got " + s.str() +
                              " (the third stage is not known for other inputs)");
    if (s.kind() != SpaceId::Kind::Sphere || s.dim() < 2)
        throw FiltrationError(std::string("only spheres of dimension >= 2 are supported as ") + which + ", got " +
                              s.str());
}

int cell_dim(int p, int q, int r) { return q + (r - 1) * p; }

SpaceId stage_space(int p, int q, int r, bool all_zero) {
    if (r == 1) return SpaceId::sphere(q);
    std::vector<int> cells;
    for (int s = 2; s <= r; ++s) cells.push_back(cell_dim(p, q, s));
    if (!all_zero) return SpaceId::cone_chain(q, cells);
    std::vector<SpaceId> parts{SpaceId::sphere(q)};
    for (int d : cells) parts.push_back(SpaceId::sphere(d));
    return SpaceId::wedge(parts);
}

// Coefficient of γ on the bottom cell, seen through the Hurewicz map. Only a
// multiple of the identity of Y can hit it; brackets and higher compositions do not.
Int hurewicz_on_bottom(const Stage& s, int q) {
    if (s.gamma.is_zero() || s.cell_dim - 1 != q) return 0;
    return s.gamma.coefficient("iota_" + std::to_string(q));
}

std::size_t matrix_rank(const zp2::Matrix& m, std::size_t cols) {
    if (m.empty() || cols == 0) return 0;
    auto snf = zp2::smith_normal_form(m, cols);
    std::size_t rank = 0;
    for (std::size_t i = 0; i < snf.d.size() && i < cols; ++i)
        if (snf.d[i][i] != 0) ++rank;
    return rank;
}

}  // namespace

MapSpec make_map_spec(const Element& cls, std::string text) {
    check_end(cls.source(), "source");
    check_end(cls.target(), "target");
    if (text.empty()) text = halg::render(cls);
    return MapSpec{cls.source(), cls.target(), cls, std::move(text)};
}

MapSpec make_map_spec(const Context& c, const std::string& text, const halg::Env& env) {
    return make_map_spec(halg::parse_term(c, text, env), text);
}

FiltrationModel build_filtration(const Context& c, const MapSpec& f, int n) {
    if (n < 1) throw FiltrationError("filtration needs at least one stage, got n = " + std::to_string(n));
    check_end(f.source, "source");
    check_end(f.target, "target");
    const int p = f.source.dim(), q = f.target.dim();

    FiltrationModel model{f, {}};
    model.stages.push_back(Stage{1, q, Element{}, SpaceId::sphere(q)});
    bool all_zero = true;
    for (int r = 2; r <= n; ++r) {
        Stage st;
        st.index = r;
        st.cell_dim = cell_dim(p, q, r);
        if (r == 2) {
            st.gamma = halg::whitehead(c, halg::generator(c, "iota_" + std::to_string(q)), f.cls);
        } else {
            Context local = c;
            const SpaceId& prev = model.stages.back().space;
            local.declare(Symbol{"j_Y", f.target, prev, 0, false, false});
            local.declare(Symbol{"f", f.source, f.target, 0, false, false});
            Element j = halg::generator(local, "j_Y");
            Element jf = halg::compose(local, j, halg::generator(local, "f"));
            std::vector<Element> slots{j};
            for (int s = 1; s < r; ++s) slots.push_back(jf);
            st.gamma = halg::higher_bracket(local, slots, "");
        }
        all_zero = all_zero && st.gamma.is_zero();
        st.space = stage_space(p, q, r, all_zero);
        model.stages.push_back(std::move(st));
    }
    return model;
}

FiberSkeleton skeleton_of_fiber(const Context& c, const MapSpec& f, int m) {
    check_end(f.source, "source");
    check_end(f.target, "target");
    const int p = f.source.dim(), q = f.target.dim();
    int r = 1;
    while (cell_dim(p, q, r + 1) <= m) ++r;
    auto model = build_filtration(c, f, r);
    return FiberSkeleton{r, model.stages.back().space, cell_dim(p, q, r + 1) - 1};
}

std::vector<TwoLocalGroup> suspended_homology(const FiltrationModel& model, int k, int maxdim) {
    if (k < 1 || k > static_cast<int>(model.stages.size()))
        throw FiltrationError("stage " + std::to_string(k) + " is not in the model");
    // cells of ΣJ_k grouped by dimension, remembering which stage each came from
    std::map<int, std::vector<int>> cells;
    for (int r = 1; r <= k; ++r) cells[model.stages[r - 1].cell_dim + 1].push_back(r);
    auto count = [&](int d) -> std::size_t {
        auto it = cells.find(d);
        return it == cells.end() ? 0 : it->second.size();
    };
    // boundary from degree d to degree d-1 as a count(d-1) x count(d) matrix
    auto boundary = [&](int d) {
        zp2::Matrix m(count(d - 1), std::vector<Int>(count(d), 0));
        if (m.empty() || count(d) == 0) return m;
        const auto& lower = cells[d - 1];
        const auto& upper = cells[d];
        for (std::size_t j = 0; j < upper.size(); ++j) {
            Int h = hurewicz_on_bottom(model.stages[upper[j] - 1], model.q());
            if (h == 0) continue;
            for (std::size_t i = 0; i < lower.size(); ++i)
                if (lower[i] == 1) m[i][j] = h;
        }
        return m;
    };

    std::vector<TwoLocalGroup> out;
    for (int d = 0; d <= maxdim; ++d) {
        std::size_t c = count(d);
        auto in = boundary(d + 1);
        std::size_t rank_out = matrix_rank(boundary(d), c);
        std::size_t rank_in = matrix_rank(in, count(d + 1));
        std::vector<Int> orders(c - rank_out - rank_in, 0);
        if (rank_in > 0) {
            auto snf = zp2::smith_normal_form(in, count(d + 1));
            for (std::size_t i = 0; i < snf.d.size() && i < count(d + 1); ++i) {
                Int t = std::abs(zp2::strip_odd(snf.d[i][i]));
                if (t > 1) orders.push_back(t);
            }
        }
        out.emplace_back(orders);
    }
    return out;
}

std::vector<TwoLocalGroup> wedge_homology(const MapSpec& f, int k, int maxdim) {
    std::vector<TwoLocalGroup> out(static_cast<std::size_t>(maxdim + 1));
    for (int i = 0; i < k; ++i) {
        int d = f.target.dim() + 1 + i * f.source.dim();
        if (d <= maxdim) out[d] = TwoLocalGroup({0});
    }
    return out;
}

bool suspension_splitting_check(const FiltrationModel& model, int k, int maxdim) {
    auto lhs = suspended_homology(model, k, maxdim);
    auto rhs = wedge_homology(model.f, k, maxdim);
    for (int d = 0; d <= maxdim; ++d)
        if (!zp2::group_equal(lhs[d], rhs[d])) return false;
    return true;
}

bool suspension_splitting_check(const Context& c, const MapSpec& f, int k, int maxdim) {
    return suspension_splitting_check(build_filtration(c, f, k), k, maxdim);
}

std::string render_text(const FiltrationModel& model) {
    const auto& stages = model.stages;
    if (stages.size() == 1) return "J_1 = " + stages[0].space.str();
    std::string out;
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (!out.empty()) out += "; ";
        out += "J_" + std::to_string(stages[i].index) + ": attach e^" + std::to_string(stages[i].cell_dim) + " via " +
               halg::render(stages[i].gamma);
    }
    const auto& top = stages.back();
    if (top.space.kind() == SpaceId::Kind::Wedge)
        out += "\nJ_" + std::to_string(top.index) + " = " + top.space.str();
    return out;
}

std::string render_machine(const FiltrationModel& model) {
    std::string out;
    for (const auto& s : model.stages) {
        nlohmann::ordered_json rec;
        rec["stage"] = s.index;
        rec["cell_dim"] = s.cell_dim;
        rec["gamma"] = s.index == 1 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(halg::render(s.gamma));
        rec["space"] = s.space.str();
        out += rec.dump() + "\n";
    }
    return out;
}

std::vector<MapSpec> shipped_map_specs(const Context& c) {
    std::vector<MapSpec> out;
    for (int r = 1; r <= 8; ++r) out.push_back(make_map_spec(c, "2^r iota_2", {{"r", r}}));
    for (int m = 0; m <= 8; ++m) out.push_back(make_map_spec(c, "2^m eta_2", {{"m", m}}));
    return out;
}

}  // namespace jf
