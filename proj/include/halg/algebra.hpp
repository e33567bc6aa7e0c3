#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "halg/element.hpp"

namespace halg {

struct Rule {
    std::string lhs;            // rendered word or bracket to match
    Element rhs;
    std::string fact_id;        // provenance reference, may be empty
};

// A home group: a homotopy group whose labels are single words, used for
// coefficient reduction and coordinates.
struct HomeGroup {
    zp2::TwoLocalGroup group;
    std::string fact_id;
};

// Symbol table and rewrite rules. Filled once (normally from the knowledge base)
// and read-only afterwards. All algebra operations take a const Context.
class Context {
public:
    Context();

    void declare(Symbol s);
    void add_rule(Rule r);
    void add_suspension(const std::string& word, Element value, std::string fact_id = {});
    void add_word_order(const std::string& word, Int order, std::string fact_id = {});
    void add_home_group(const SpaceId& space, int degree, zp2::TwoLocalGroup g, std::string fact_id = {});
    void add_space_alias(const std::string& from, const SpaceId& to);

    // Built-in: iota_n for every n >= 1, and "Sigma x" for every known x.
    std::optional<Symbol> find(const std::string& name) const;
    Symbol symbol(const std::string& name) const;   // throws MissingFact
    const std::map<std::string, Symbol>& symbols() const { return symbols_; }
    const Rule* rule_for(const std::string& lhs) const;
    const std::vector<Rule>& rules() const { return rules_; }
    const Element* suspension_of(const std::string& word) const;
    // Words whose recorded suspension renders exactly as `rendered`.
    std::vector<std::string> suspension_preimages(const std::string& rendered) const;
    std::optional<Int> word_order(const std::string& word) const;
    const HomeGroup* home_group(const SpaceId& space, int degree) const;
    SpaceId canonical(const SpaceId& s) const;

    // Every rule id consulted through rule_for / suspension_of / home_group is
    // reported here, so callers can record provenance.
    void set_observer(std::function<void(const std::string&)> obs) const { observer_ = std::move(obs); }
    void note(const std::string& fact_id) const {
        if (observer_ && !fact_id.empty()) observer_(fact_id);
    }

    bool strict() const { return strict_; }
    void set_strict(bool s) { strict_ = s; }

private:
    std::map<std::string, Symbol> symbols_;
    std::vector<Rule> rules_;
    std::map<std::string, std::size_t> rule_index_;
    std::map<std::string, std::pair<Element, std::string>> suspensions_;
    std::map<std::string, std::pair<Int, std::string>> word_orders_;
    std::map<std::string, HomeGroup> homes_;
    std::map<std::string, SpaceId> aliases_;
    mutable std::function<void(const std::string&)> observer_;
    bool strict_ = false;
};

// ---- construction ----
Element zero(const SpaceId& source, const SpaceId& target);
Element generator(const Context& c, const std::string& name);
Element scale(const Context& c, const Element& e, Int k);
Element add(const Context& c, const Element& a, const Element& b);
Element negate(const Context& c, const Element& e);

// ---- the calculus ----
Element compose(const Context& c, const Element& f, const Element& g);
Element suspend(const Context& c, const Element& e);
Element whitehead(const Context& c, const Element& f, const Element& g);
Element higher_bracket(const Context& c, const std::vector<Element>& slots, const std::string& tag);
// Member of [g h1, ..., g hn] for a single bracket term g.[h1, ..., hn]; arity preserved.
Element naturality_push(const Context& c, const Element& g, const Element& bracket);
// Pulls integer scalars out of every slot of a higher bracket: [k1 h1, ..., kn hn]
// contains (k2 * ... * kn) [h1, ..., hn] when the first slot is unscaled. Returns the
// scalar and the scalar-free bracket.
std::pair<Int, Element> extract_scalars(const Context& c, const Element& bracket);

// Indeterminacy of a triple product as a subgroup of its home group. Each ambient
// group is the mapping group for one slot pair; all trivial gives the trivial group.
zp2::TwoLocalGroup triple_indeterminacy(const Element& f1, const Element& f2, const Element& f3,
                                        const std::vector<std::optional<zp2::TwoLocalGroup>>& ambient);

// Brings an element to normal form (rules, naturality, coefficient reduction).
Element normalize(const Context& c, Element e);

// Rewrites the subword [pos, pos + len) of a single-term element with the rule whose
// lhs it renders to, then normalizes. Used to check that rule order does not matter.
Element apply_rule_at(const Context& c, const Element& single, std::size_t pos, std::size_t len);
// Every (pos, len) where some rule matches the top-level word of a single-term element.
std::vector<std::pair<std::size_t, std::size_t>> rule_sites(const Context& c, const Element& single);

bool is_suspension(const Context& c, const Element& e);
// An element whose suspension is e, when one can be named and checked; nullopt otherwise.
std::optional<Element> desuspend(const Context& c, const Element& e);
// Sphere degree of the source, or -1 when the source is not a sphere.
int degree(const Element& e);

// Order of a word when it can be bounded from the context, 0 when unknown/infinite.
Int word_order(const Context& c, const Word& w, const SpaceId& source, const SpaceId& target);

// Coordinates of e with respect to the labels of a home group (one entry per
// summand). Terms of finite order are dropped when g is torsion free; any other
// term that is not a label throws MissingFact.
std::vector<Int> coordinates(const Context& c, const Element& e, const zp2::TwoLocalGroup& g);
// Element of the given labels with the given coordinates.
Element from_coordinates(const Context& c, const std::vector<Int>& coords, const zp2::TwoLocalGroup& g,
                         const SpaceId& source, const SpaceId& target);

// ---- text ----
// Parses a term. Free identifiers in scalar positions are looked up in env.
Element parse_term(const Context& c, const std::string& text, const Env& env = {});

}  // namespace halg
