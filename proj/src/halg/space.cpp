#include "halg/space.hpp"

#include <cctype>

#include "zp2/group.hpp"

namespace halg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct IntParser {
    const std::string& s;
    const Env& env;
    std::size_t i = 0;

    void ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    [[noreturn]] void fail(const std::string& why) {
        throw AlgebraError("bad integer expression '" + s + "': " + why);
    }
    long long expr() {
        long long v = term();
        for (;;) {
            ws();
            if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
                char op = s[i++];
                long long t = term();
                v = zp2::add(v, op == '+' ? t : -t);
            } else {
                return v;
            }
        }
    }
    long long term() {
        long long v = unary();
        for (;;) {
            ws();
            if (i < s.size() && s[i] == '*') {
                ++i;
                v = zp2::mul(v, unary());
            } else {
                return v;
            }
        }
    }
    long long unary() {
        ws();
        if (i < s.size() && s[i] == '-') {
            ++i;
            return -unary();
        }
        return power();
    }
    long long power() {
        long long base = primary();
        ws();
        if (i < s.size() && s[i] == '^') {
            ++i;
            long long e = unary();
            if (e < 0) fail("negative exponent");
            if (base == 2) return zp2::pow2(static_cast<int>(e));
            long long r = 1;
            for (long long k = 0; k < e; ++k) r = zp2::mul(r, base);
            return r;
        }
        return base;
    }
    long long primary() {
        ws();
        if (i >= s.size()) fail("unexpected end");
        if (s[i] == '(') {
            ++i;
            long long v = expr();
            ws();
            if (i >= s.size() || s[i] != ')') fail("missing ')'");
            ++i;
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            long long v = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                v = zp2::add(zp2::mul(v, 10), s[i++] - '0');
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_') {
            std::size_t b = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            std::string name = s.substr(b, i - b);
            auto it = env.find(name);
            if (it == env.end()) fail("unbound name '" + name + "'");
            return it->second;
        }
        fail(std::string("unexpected '") + s[i] + "'");
    }
};

}  // namespace

long long eval_int(const std::string& expr, const Env& env) {
    IntParser p{expr, env};
    long long v = p.expr();
    p.ws();
    if (p.i != expr.size()) p.fail("trailing input");
    return v;
}

std::string interpolate(const std::string& text, const Env& env) {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, 2, "${") != 0) {
            out += text[i++];
            continue;
        }
        std::size_t close = text.find('}', i + 2);
        if (close == std::string::npos) throw AlgebraError("unterminated '${' in '" + text + "'");
        out += std::to_string(eval_int(text.substr(i + 2, close - i - 2), env));
        i = close + 1;
    }
    return out;
}

SpaceId SpaceId::sphere(int n) {
    if (n < 1) throw AlgebraError("sphere dimension must be >= 1");
    SpaceId s;
    s.kind_ = Kind::Sphere;
    s.n_ = n;
    return s;
}

SpaceId SpaceId::wedge(std::vector<SpaceId> parts) {
    if (parts.size() == 1) return parts[0];
    if (parts.empty()) throw AlgebraError("empty wedge");
    SpaceId s;
    s.kind_ = Kind::Wedge;
    for (auto& p : parts) {
        if (p.kind_ == Kind::Wedge)
            s.parts_.insert(s.parts_.end(), p.parts_.begin(), p.parts_.end());
        else
            s.parts_.push_back(std::move(p));
    }
    return s;
}

SpaceId SpaceId::moore(int n, int r) {
    if (n < 3 || r < 1) throw AlgebraError("Moore space needs n >= 3 and r >= 1");
    SpaceId s;
    s.kind_ = Kind::Moore;
    s.n_ = n;
    s.r_ = r;
    return s;
}

SpaceId SpaceId::cone_chain(int base, std::vector<int> cells) {
    SpaceId s;
    s.kind_ = Kind::ConeChain;
    s.n_ = base;
    s.cells_ = std::move(cells);
    if (s.cells_.empty()) return sphere(base);
    return s;
}

SpaceId SpaceId::named(std::string label) {
    SpaceId s;
    s.kind_ = Kind::Named;
    s.label_ = std::move(label);
    return s;
}

SpaceId SpaceId::parse(const std::string& text) {
    std::string t = trim(text);
    // wedge at top level
    std::vector<std::string> pieces;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == '(') ++depth;
        if (t[i] == ')') --depth;
        if (depth == 0 && t.compare(i, 3, " v ") == 0) {
            pieces.push_back(t.substr(start, i - start));
            start = i + 3;
            i += 2;
        }
    }
    if (!pieces.empty()) {
        pieces.push_back(t.substr(start));
        std::vector<SpaceId> parts;
        for (const auto& p : pieces) parts.push_back(parse(p));
        return wedge(std::move(parts));
    }
    auto all_digits = [](const std::string& s) {
        if (s.empty()) return false;
        for (char ch : s)
            if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
        return true;
    };
    if (t.find(" u ") != std::string::npos && t.rfind("S^", 0) == 0) {
        std::vector<int> cells;
        std::size_t p = t.find(" u ");
        std::string base = t.substr(2, p - 2);
        if (!all_digits(base)) return named(t);
        while (p != std::string::npos) {
            std::size_t q = t.find(" u ", p + 3);
            std::string cell = t.substr(p + 3, q == std::string::npos ? std::string::npos : q - p - 3);
            if (cell.rfind("e^", 0) != 0 || !all_digits(cell.substr(2))) return named(t);
            cells.push_back(std::stoi(cell.substr(2)));
            p = q;
        }
        return cone_chain(std::stoi(base), cells);
    }
    if (t.rfind("S^", 0) == 0 && all_digits(t.substr(2))) return sphere(std::stoi(t.substr(2)));
    if (t.rfind("P^", 0) == 0) {
        std::size_t lp = t.find('(');
        if (lp != std::string::npos && t.back() == ')' && all_digits(t.substr(2, lp - 2))) {
            std::string inner = t.substr(lp + 1, t.size() - lp - 2);
            long long k = 0;
            if (inner.rfind("2^", 0) == 0 && all_digits(inner.substr(2)))
                k = zp2::pow2(std::stoi(inner.substr(2)));
            else if (all_digits(inner))
                k = std::stoll(inner);
            if (zp2::is_pow2(k) && k >= 2) return moore(std::stoi(t.substr(2, lp - 2)), zp2::v2(k));
            throw AlgebraError("Moore space order must be a power of 2 >= 2: " + t);
        }
    }
    if (t.empty()) throw AlgebraError("empty space expression");
    return named(t);
}

std::string SpaceId::str() const {
    switch (kind_) {
        case Kind::Sphere:
            return "S^" + std::to_string(n_);
        case Kind::Wedge: {
            std::string out;
            for (std::size_t i = 0; i < parts_.size(); ++i) out += (i ? " v " : "") + parts_[i].str();
            return out;
        }
        case Kind::Moore:
            return "P^" + std::to_string(n_) + "(2^" + std::to_string(r_) + ")";
        case Kind::ConeChain: {
            std::string out = "S^" + std::to_string(n_);
            for (int c : cells_) out += " u e^" + std::to_string(c);
            return out;
        }
        case Kind::Named:
            return label_;
    }
    return label_;
}

bool SpaceId::is_suspension() const {
    switch (kind_) {
        case Kind::Sphere:
            return n_ >= 2;
        case Kind::Wedge:
            for (const auto& p : parts_)
                if (!p.is_suspension()) return false;
            return true;
        case Kind::Moore:
            return true;
        case Kind::ConeChain:
            return false;
        case Kind::Named:
            return label_.rfind("Sigma ", 0) == 0;
    }
    return false;
}

SpaceId SpaceId::suspend() const {
    switch (kind_) {
        case Kind::Sphere:
            return sphere(n_ + 1);
        case Kind::Wedge: {
            std::vector<SpaceId> ps;
            for (const auto& p : parts_) ps.push_back(p.suspend());
            return wedge(std::move(ps));
        }
        case Kind::Moore:
            return moore(n_ + 1, r_);
        case Kind::ConeChain: {
            std::vector<int> cs(cells_);
            for (int& c : cs) ++c;
            return cone_chain(n_ + 1, cs);
        }
        case Kind::Named:
            return named("Sigma " + label_);
    }
    return *this;
}

}  // namespace halg
