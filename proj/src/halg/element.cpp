#include <cctype>

#include "halg/algebra.hpp"

namespace halg {

namespace {

bool eta_index(const Factor& f, int& n) {
    if (!f.is_atom() || f.atom.rfind("eta_", 0) != 0 || f.atom.size() <= 4) return false;
    for (std::size_t i = 4; i < f.atom.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(f.atom[i]))) return false;
    n = std::stoi(f.atom.substr(4));
    return true;
}

std::string render_coef_term(Int coef, const std::string& word, bool first) {
    std::string out;
    Int a = coef < 0 ? -coef : coef;
    if (first)
        out = coef < 0 ? "-" : "";
    else
        out = coef < 0 ? " - " : " + ";
    if (a != 1) out += std::to_string(a) + "*";
    return out + word;
}

}  // namespace

std::string render_word(const Word& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ".";
        const Factor& f = w[i];
        int n = 0;
        if (eta_index(f, n)) {
            // collapse eta_n.eta_{n+1}...eta_{n+k-1} to eta_n^k
            std::size_t k = 1;
            int m = 0;
            while (i + k < w.size() && eta_index(w[i + k], m) && m == n + static_cast<int>(k)) ++k;
            out += f.atom;
            if (k > 1) out += "^" + std::to_string(k);
            i += k - 1;
        } else if (f.is_atom()) {
            out += f.atom;
        } else if (f.is_bracket()) {
            out += "[";
            for (std::size_t s = 0; s < f.slots->size(); ++s) out += (s ? ", " : "") + render((*f.slots)[s]);
            out += "]";
            if (!f.tag.empty()) out += "{" + f.tag + "}";
        } else {
            out += "(" + render(*f.group) + ")";
        }
    }
    return out;
}

std::string render(const Element& e) {
    if (e.is_zero()) return "0";
    std::string out;
    for (std::size_t i = 0; i < e.terms().size(); ++i)
        out += render_coef_term(e.terms()[i].coef, render_word(e.terms()[i].word), i == 0);
    return out;
}

Int Element::coefficient(const std::string& word) const {
    for (const auto& t : terms_)
        if (render_word(t.word) == word) return t.coef;
    return 0;
}

Context::Context() = default;

void Context::declare(Symbol s) {
    s.source = canonical(s.source);
    s.target = canonical(s.target);
    auto it = symbols_.find(s.name);
    if (it != symbols_.end()) {
        if (it->second.source != s.source || it->second.target != s.target)
            throw AlgebraError("symbol '" + s.name + "' declared with two different types");
        if (s.order_known && !it->second.order_known) it->second = s;
        return;
    }
    symbols_.emplace(s.name, std::move(s));
}

void Context::add_rule(Rule r) {
    auto it = rule_index_.find(r.lhs);
    if (it != rule_index_.end()) {
        if (render(rules_[it->second].rhs) != render(r.rhs))
            throw AlgebraError("conflicting rules for '" + r.lhs + "'");
        return;
    }
    rule_index_[r.lhs] = rules_.size();
    rules_.push_back(std::move(r));
}

void Context::add_suspension(const std::string& word, Element value, std::string fact_id) {
    suspensions_[word] = {std::move(value), std::move(fact_id)};
}

std::vector<std::string> Context::suspension_preimages(const std::string& rendered) const {
    std::vector<std::string> out;
    for (const auto& [word, value] : suspensions_)
        if (render(value.first) == rendered) out.push_back(word);
    return out;
}

void Context::add_word_order(const std::string& word, Int order, std::string fact_id) {
    auto it = word_orders_.find(word);
    if (it != word_orders_.end() && it->second.first != 0 && (order == 0 || it->second.first <= order)) return;
    word_orders_[word] = {order, std::move(fact_id)};
}

void Context::add_home_group(const SpaceId& space, int degree, zp2::TwoLocalGroup g, std::string fact_id) {
    homes_["pi_" + std::to_string(degree) + "(" + canonical(space).str() + ")"] = {std::move(g), std::move(fact_id)};
}

void Context::add_space_alias(const std::string& from, const SpaceId& to) { aliases_[from] = to; }

SpaceId Context::canonical(const SpaceId& s) const {
    auto it = aliases_.find(s.str());
    return it == aliases_.end() ? s : it->second;
}

std::optional<Symbol> Context::find(const std::string& name) const {
    auto it = symbols_.find(name);
    if (it != symbols_.end()) return it->second;
    if (name.rfind("iota_", 0) == 0 && name.size() > 5) {
        for (std::size_t i = 5; i < name.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
        int n = std::stoi(name.substr(5));
        if (n < 1) return std::nullopt;
        Symbol s{name, SpaceId::sphere(n), SpaceId::sphere(n), 0, true, n >= 2};
        return s;
    }
    if (name.rfind("Sigma ", 0) == 0) {
        auto base = find(name.substr(6));
        if (!base) return std::nullopt;
        // The order of a suspension divides the order of the class, so the base
        // order stays a valid bound for coefficient reduction.
        Symbol s{name, canonical(base->source.suspend()), canonical(base->target.suspend()), base->order,
                 base->order_known && base->order != 0, true};
        return s;
    }
    return std::nullopt;
}

Symbol Context::symbol(const std::string& name) const {
    auto s = find(name);
    if (!s) throw MissingFact("KB fact required: unknown generator '" + name + "'");
    return *s;
}

const Rule* Context::rule_for(const std::string& lhs) const {
    auto it = rule_index_.find(lhs);
    if (it == rule_index_.end()) return nullptr;
    note(rules_[it->second].fact_id);
    return &rules_[it->second];
}

const Element* Context::suspension_of(const std::string& word) const {
    auto it = suspensions_.find(word);
    if (it == suspensions_.end()) return nullptr;
    note(it->second.second);
    return &it->second.first;
}

std::optional<Int> Context::word_order(const std::string& word) const {
    auto it = word_orders_.find(word);
    if (it == word_orders_.end()) return std::nullopt;
    note(it->second.second);
    return it->second.first;
}

const HomeGroup* Context::home_group(const SpaceId& space, int degree) const {
    auto it = homes_.find("pi_" + std::to_string(degree) + "(" + canonical(space).str() + ")");
    if (it == homes_.end()) return nullptr;
    note(it->second.fact_id);
    return &it->second;
}

}  // namespace halg
