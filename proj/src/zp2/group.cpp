#include "zp2/group.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace zp2 {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string render_order(Int o) {
    return o == 0 ? "Z(2)" : "Z/" + std::to_string(o);
}

// Splits on '+' at brace depth zero.
std::vector<std::string> split_summands(const std::string& text) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : text) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (c == '+' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

}  // namespace

std::vector<std::size_t> TwoLocalGroup::canonical_order(const std::vector<Int>& orders) {
    std::vector<std::size_t> perm(orders.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        Int x = orders[a], y = orders[b];
        if ((x == 0) != (y == 0)) return y == 0;
        return x < y;
    });
    return perm;
}

TwoLocalGroup::TwoLocalGroup(std::vector<Int> orders, std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != orders.size())
        throw GroupError("label count " + std::to_string(labels.size()) + " does not match summand count " +
                         std::to_string(orders.size()));
    std::vector<Int> kept;
    std::vector<std::string> kept_labels;
    for (std::size_t i = 0; i < orders.size(); ++i) {
        Int o = orders[i];
        if (o == 1) continue;
        if (o != 0 && !is_pow2(o))
            throw GroupError("summand order " + std::to_string(o) + " is not 0 or a power of 2");
        kept.push_back(o);
        if (!labels.empty()) kept_labels.push_back(labels[i]);
    }
    for (std::size_t i : canonical_order(kept)) {
        orders_.push_back(kept[i]);
        if (!kept_labels.empty()) labels_.push_back(kept_labels[i]);
    }
}

std::size_t TwoLocalGroup::free_rank() const {
    return static_cast<std::size_t>(std::count(orders_.begin(), orders_.end(), Int{0}));
}

Int TwoLocalGroup::torsion_order() const {
    Int r = 1;
    for (Int o : orders_)
        if (o != 0) r = mul(r, o);
    return r;
}

Int TwoLocalGroup::exponent() const {
    Int e = 1;
    for (Int o : orders_) {
        if (o == 0) return 0;
        e = std::max(e, o);
    }
    return e;
}

std::string TwoLocalGroup::render() const {
    if (orders_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < orders_.size(); ++i) {
        if (i) s += " + ";
        s += render_order(orders_[i]);
    }
    return s;
}

std::string TwoLocalGroup::render_labeled() const {
    if (labels_.empty()) return render();
    std::string s;
    for (std::size_t i = 0; i < orders_.size(); ++i) {
        if (i) s += " + ";
        s += render_order(orders_[i]) + "{" + labels_[i] + "}";
    }
    return s;
}

TwoLocalGroup TwoLocalGroup::parse(const std::string& text) {
    std::string t = trim(text);
    if (t.empty() || t == "0") return TwoLocalGroup{};
    std::vector<Int> orders;
    std::vector<std::string> labels;
    bool any_label = false, all_label = true;
    for (const auto& part : split_summands(t)) {
        std::string body = part, label;
        auto brace = part.find('{');
        if (brace != std::string::npos) {
            if (part.back() != '}') throw GroupError("unterminated label in summand '" + part + "'");
            body = trim(part.substr(0, brace));
            label = trim(part.substr(brace + 1, part.size() - brace - 2));
            any_label = true;
        } else {
            all_label = false;
        }
        Int o;
        if (body == "Z(2)") {
            o = 0;
        } else if (body.rfind("Z/", 0) == 0) {
            std::string num = body.substr(2);
            if (num.rfind("2^", 0) == 0) {
                o = pow2(std::stoi(num.substr(2)));
            } else {
                std::size_t used = 0;
                o = std::stoll(num, &used);
                if (used != num.size()) throw GroupError("bad summand '" + part + "'");
            }
        } else {
            throw GroupError("bad summand '" + part + "'");
        }
        orders.push_back(o);
        labels.push_back(label);
    }
    if (any_label && !all_label) throw GroupError("either every summand or none carries a label: '" + t + "'");
    return TwoLocalGroup(orders, any_label ? labels : std::vector<std::string>{});
}

bool group_equal(const TwoLocalGroup& a, const TwoLocalGroup& b) { return a.orders() == b.orders(); }

void validate_hom(const GroupHom& h) {
    const auto& so = h.source.orders();
    const auto& to = h.target.orders();
    if (h.matrix.size() != to.size()) throw GroupError("hom matrix has wrong number of rows");
    for (const auto& row : h.matrix)
        if (row.size() != so.size()) throw GroupError("hom matrix has wrong number of columns");
    for (std::size_t j = 0; j < so.size(); ++j) {
        if (so[j] == 0) continue;
        for (std::size_t i = 0; i < to.size(); ++i) {
            Int p = mul(so[j], h.matrix[i][j]);
            bool ok = to[i] == 0 ? p == 0 : p % to[i] == 0;
            if (!ok)
                throw GroupError("incompatible hom: column " + std::to_string(j) + " (source order " +
                                 std::to_string(so[j]) + ") is not killed in target row " + std::to_string(i));
        }
    }
}

GroupHom compose(const GroupHom& g, const GroupHom& f) {
    if (!group_equal(g.source, f.target)) throw GroupError("compose: group mismatch");
    std::size_t n = g.target.rank(), s = g.source.rank(), k = f.source.rank();
    Matrix m = zeros(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < s; ++t)
            for (std::size_t j = 0; j < k; ++j) m[i][j] = add(m[i][j], mul(g.matrix[i][t], f.matrix[t][j]));
    for (std::size_t i = 0; i < n; ++i)
        for (auto& x : m[i]) x = mod(x, g.target.orders()[i]);
    return GroupHom{f.source, g.target, m};
}

namespace {

// Quotient of Z(2)-module with the given generator orders by the listed columns.
Quotient present(const TwoLocalGroup& target, const Matrix& cols_matrix, std::size_t ncols) {
    const auto& to = target.orders();
    std::size_t n = to.size();
    std::size_t finite = n - target.free_rank();
    Matrix rel = zeros(n, ncols + finite);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ncols; ++j) rel[i][j] = cols_matrix[i][j];
    std::size_t c = ncols;
    for (std::size_t i = 0; i < n; ++i)
        if (to[i] != 0) rel[i][c++] = to[i];
    SnfResult s = smith_normal_form(rel, ncols + finite);

    std::vector<Int> orders;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Int e = i < ncols + finite ? s.d[i][i] : 0;
        Int o = e == 0 ? 0 : (Int{1} << v2(e));
        if (o == 1) continue;
        orders.push_back(o);
        rows.push_back(i);
    }
    auto perm = TwoLocalGroup::canonical_order(orders);
    std::vector<Int> sorted;
    Matrix proj, lift = zeros(n, perm.size());
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        std::size_t i = rows[perm[k]];
        Int o = orders[perm[k]];
        sorted.push_back(o);
        std::vector<Int> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = mod(s.u[i][j], o);
        proj.push_back(row);
        for (std::size_t j = 0; j < n; ++j) lift[j][k] = s.u_inv[j][i];
    }
    TwoLocalGroup q(sorted);
    if (proj.empty()) proj = zeros(0, n);
    return Quotient{q, GroupHom{target, q, proj}, lift};
}

}  // namespace

Quotient cokernel(const GroupHom& h) {
    validate_hom(h);
    return present(h.target, h.matrix, h.source.rank());
}

Subgroup kernel(const GroupHom& h) {
    validate_hom(h);
    const auto& so = h.source.orders();
    const auto& to = h.target.orders();
    std::size_t m = so.size(), n = to.size();

    // Integer solutions of M x + T y = 0, projected to x.
    std::size_t tf = n - h.target.free_rank();
    Matrix a = zeros(n, m + tf);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) a[i][j] = h.matrix[i][j];
    std::size_t c = m;
    for (std::size_t i = 0; i < n; ++i)
        if (to[i] != 0) a[i][c++] = to[i];
    SnfResult s = smith_normal_form(a, m + tf);
    std::size_t rank = 0;
    for (std::size_t i = 0; i < std::min(n, m + tf); ++i)
        if (s.d[i][i] != 0) ++rank;
    std::size_t t = m + tf - rank;
    Matrix g = zeros(m, t);
    for (std::size_t k = 0; k < t; ++k)
        for (std::size_t j = 0; j < m; ++j) g[j][k] = s.v[j][rank + k];

    // Basis of the kernel lattice K.
    SnfResult sg = smith_normal_form(g, t);
    std::vector<Int> dg;
    for (std::size_t i = 0; i < std::min(m, t); ++i)
        if (sg.d[i][i] != 0) dg.push_back(sg.d[i][i]);
    std::size_t kr = dg.size();
    Matrix basis = zeros(m, kr);
    for (std::size_t i = 0; i < kr; ++i)
        for (std::size_t j = 0; j < m; ++j) basis[j][i] = mul(dg[i], sg.u_inv[j][i]);

    // Source relations expressed in that basis.
    std::size_t sf = m - h.source.free_rank();
    Matrix rel = zeros(kr, sf);
    std::size_t col = 0;
    for (std::size_t j = 0; j < m; ++j) {
        if (so[j] == 0) continue;
        for (std::size_t i = 0; i < kr; ++i) {
            Int w = mul(sg.u[i][j], so[j]);
            if (w % dg[i] != 0) throw GroupError("kernel: relation outside kernel lattice");
            rel[i][col] = w / dg[i];
        }
        ++col;
    }
    TwoLocalGroup free_k(std::vector<Int>(kr, 0));
    Quotient q = present(free_k, rel, sf);

    std::size_t qr = q.group.rank();
    Matrix inc = zeros(m, qr);
    for (std::size_t l = 0; l < qr; ++l)
        for (std::size_t i = 0; i < kr; ++i) {
            if (q.lift[i][l] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) inc[j][l] = add(inc[j][l], mul(q.lift[i][l], basis[j][i]));
        }
    for (std::size_t j = 0; j < m; ++j)
        for (auto& x : inc[j]) x = mod(x, so[j]);
    return Subgroup{q.group, GroupHom{q.group, h.source, inc}};
}

std::vector<Int> strip_odd_content(const std::vector<Int>& v) {
    Int g = 0;
    for (Int x : v) g = std::gcd(g, x < 0 ? -x : x);
    if (g == 0) return v;
    Int odd = g >> v2(g);
    std::vector<Int> out(v);
    for (auto& x : out) x /= odd;
    return out;
}

Quotient quotient_presentation(const TwoLocalGroup& g, const std::vector<std::vector<Int>>& rels) {
    Matrix cols = zeros(g.rank(), rels.size());
    for (std::size_t j = 0; j < rels.size(); ++j) {
        if (rels[j].size() != g.rank())
            throw GroupError("relation " + std::to_string(j) + " has length " + std::to_string(rels[j].size()) +
                             ", expected " + std::to_string(g.rank()));
        auto v = strip_odd_content(rels[j]);
        for (std::size_t i = 0; i < g.rank(); ++i) cols[i][j] = v[i];
    }
    return present(g, cols, rels.size());
}

TwoLocalGroup quotient_by_elements(const TwoLocalGroup& g, const std::vector<std::vector<Int>>& rels) {
    return quotient_presentation(g, rels).group;
}

TwoLocalGroup solve_extension(const ExtensionProblem& p) {
    const auto& qo = p.quot.orders();
    for (const auto& c : p.certificates) {
        if (c.quot_index >= qo.size())
            throw GroupError("certificate refers to quotient generator " + std::to_string(c.quot_index) +
                             " but the quotient has rank " + std::to_string(qo.size()));
        if (!is_pow2(c.lift_order)) throw GroupError("certificate lift order must be a power of 2");
        if (qo[c.quot_index] != 0 && c.lift_order < qo[c.quot_index])
            throw GroupError("certificate lift order " + std::to_string(c.lift_order) +
                             " is below the quotient generator order " + std::to_string(qo[c.quot_index]));
    }
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < qo.size(); ++i) {
        if (qo[i] == 0) continue;  // free summands always split
        bool ok = std::any_of(p.certificates.begin(), p.certificates.end(),
                              [&](const Certificate& c) { return c.quot_index == i && c.lift_order == qo[i]; });
        if (!ok) {
            std::string name = std::to_string(i);
            if (p.quot.has_labels()) name += " (" + p.quot.labels()[i] + ")";
            missing.push_back(name);
        }
    }
    if (!missing.empty()) {
        std::string msg = "extension unresolved: no order-matching lift certificate for quotient generator";
        msg += missing.size() > 1 ? "s " : " ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
        throw ExtensionUnresolved(msg);
    }
    std::vector<Int> orders = p.sub.orders();
    orders.insert(orders.end(), qo.begin(), qo.end());
    std::vector<std::string> labels;
    if (p.sub.has_labels() && p.quot.has_labels()) {
        labels = p.sub.labels();
        labels.insert(labels.end(), p.quot.labels().begin(), p.quot.labels().end());
    }
    return TwoLocalGroup(orders, labels);
}

}  // namespace zp2
