// Term syntax:
//   sum     := ['-' | '+-'] product (('+' | '-') product)*
//   product := scalar ('*' | ' ') word | word
//   scalar  := int ['^' (int | name | '(' expr ')')] | '(' expr ')' | name   (names bound in env)
//   word    := factor ('.' factor)*
//   factor  := symbol | '[' sum (',' sum)+ ']' ['{' tag '}'] | '(' sum ')'
//   symbol  := ['Sigma '] base ['^' digits] ['(' expr ')']
// "eta_n^k" expands to eta_n.eta_{n+1}...; any other "^k" is part of the name.
// "+-" marks an undetermined sign and is read as +.

#include <cctype>

#include "halg/algebra.hpp"

namespace halg {

namespace {

bool name_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'' || ch == '~';
}

struct TermParser {
    const Context& c;
    const std::string& s;
    const Env& env;
    std::size_t i = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw AlgebraError("cannot parse term '" + s + "' at column " + std::to_string(i + 1) + ": " + why);
    }
    void ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool peek(const char* tok) {
        ws();
        return s.compare(i, std::char_traits<char>::length(tok), tok) == 0;
    }
    void expect(char ch) {
        ws();
        if (i >= s.size() || s[i] != ch) fail(std::string("expected '") + ch + "'");
        ++i;
    }
    std::size_t matching(std::size_t open) const {
        int depth = 0;
        for (std::size_t k = open; k < s.size(); ++k) {
            if (s[k] == '(') ++depth;
            if (s[k] == ')' && --depth == 0) return k;
        }
        return std::string::npos;
    }

    Element sum() {
        ws();
        Int sign = 1;
        if (peek("+-")) {
            i += 2;
        } else if (peek("\xC2\xB1")) {  // U+00B1
            i += 2;
        } else if (peek("-")) {
            ++i;
            sign = -1;
        }
        Element acc = scale(c, product(), sign);
        for (;;) {
            ws();
            if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
                char op = s[i++];
                Element t = product();
                acc = add(c, acc, op == '+' ? t : negate(c, t));
            } else {
                return acc;
            }
        }
    }

    std::optional<Int> exponent_of(Int base) {
        if (i >= s.size() || s[i] != '^') return base;
        ++i;
        Int e = 0;
        if (i < s.size() && s[i] == '(') {
            std::size_t close = matching(i);
            if (close == std::string::npos) fail("missing ')'");
            e = eval_int(s.substr(i + 1, close - i - 1), env);
            i = close + 1;
        } else if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) e = e * 10 + (s[i++] - '0');
        } else {
            std::size_t b = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            e = eval_int(s.substr(b, i - b), env);
        }
        return eval_int(std::to_string(base) + "^" + std::to_string(e), {});
    }

    std::optional<Int> scalar() {
        ws();
        std::size_t save = i;
        if (i >= s.size()) return std::nullopt;
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            Int v = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) v = zp2::add(zp2::mul(v, 10), s[i++] - '0');
            return exponent_of(v);
        }
        if (s[i] == '(') {
            std::size_t close = matching(i);
            if (close == std::string::npos) fail("missing ')'");
            try {
                Int v = eval_int(s.substr(i + 1, close - i - 1), env);
                i = close + 1;
                return exponent_of(v);
            } catch (const AlgebraError&) {
                i = save;
                return std::nullopt;
            }
        }
        if (std::isalpha(static_cast<unsigned char>(s[i]))) {
            std::size_t b = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            std::string name = s.substr(b, i - b);
            bool continues = i < s.size() && (name_char(s[i]) || s[i] == '(' || s[i] == '^');
            auto it = env.find(name);
            if (it != env.end() && !continues && !c.find(name)) return it->second;
            i = save;
        }
        return std::nullopt;
    }

    bool word_start() {
        ws();
        return i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '[' || s[i] == '(');
    }

    Element product() {
        Int k = 1;
        bool any = false;
        for (;;) {
            auto v = scalar();
            if (!v) break;
            k = zp2::mul(k, *v);
            any = true;
            if (peek("*")) {
                ++i;
                continue;
            }
            break;
        }
        if (any && !word_start()) fail("a bare scalar is not a term");
        return scale(c, word(), k);
    }

    Element word() {
        std::vector<Element> parts{factor()};
        while (peek(".")) {
            ++i;
            parts.push_back(factor());
        }
        Element acc = parts.back();
        for (std::size_t k = parts.size() - 1; k-- > 0;) acc = compose(c, parts[k], acc);
        return acc;
    }

    Element factor() {
        ws();
        if (i >= s.size()) fail("unexpected end");
        if (s[i] == '[') {
            ++i;
            std::vector<Element> slots{sum()};
            while (peek(",")) {
                ++i;
                slots.push_back(sum());
            }
            expect(']');
            std::string tag;
            if (i < s.size() && s[i] == '{') {
                std::size_t close = s.find('}', i);
                if (close == std::string::npos) fail("missing '}'");
                tag = s.substr(i + 1, close - i - 1);
                i = close + 1;
            }
            return higher_bracket(c, slots, tag);
        }
        if (s[i] == '(') {
            ++i;
            Element e = sum();
            expect(')');
            return e;
        }
        return symbol();
    }

    Element symbol() {
        std::string prefix;
        if (s.compare(i, 6, "Sigma ") == 0) {
            prefix = "Sigma ";
            i += 6;
        }
        std::size_t b = i;
        while (i < s.size() && name_char(s[i])) ++i;
        if (b == i) fail("expected a generator name");
        std::string base = s.substr(b, i - b);
        int power = 1;
        if (i + 1 < s.size() && s[i] == '^' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            std::size_t e = ++i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            int k = std::stoi(s.substr(e, i - e));
            bool eta = base.rfind("eta_", 0) == 0 && base.size() > 4 && prefix.empty();
            for (std::size_t q = 4; eta && q < base.size(); ++q) eta = std::isdigit(static_cast<unsigned char>(base[q]));
            if (eta)
                power = k;
            else
                base += "^" + std::to_string(k);
        }
        if (i < s.size() && s[i] == '(') {
            std::size_t close = matching(i);
            if (close == std::string::npos) fail("missing ')'");
            base += "(" + std::to_string(eval_int(s.substr(i + 1, close - i - 1), env)) + ")";
            i = close + 1;
        }
        if (power == 1) return generator(c, prefix + base);
        if (power < 1) fail("eta power must be positive");
        int n = std::stoi(base.substr(4));
        Element acc = generator(c, "eta_" + std::to_string(n + power - 1));
        for (int k = power - 2; k >= 0; --k) acc = compose(c, generator(c, "eta_" + std::to_string(n + k)), acc);
        return acc;
    }
};

}  // namespace

Element parse_term(const Context& c, const std::string& text, const Env& env) {
    TermParser p{c, text, env};
    Element e = p.sum();
    p.ws();
    if (p.i != text.size()) p.fail("trailing input");
    return e;
}

}  // namespace halg
