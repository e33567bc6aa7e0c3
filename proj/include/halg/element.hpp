#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "halg/space.hpp"
#include "zp2/group.hpp"

namespace halg {

using zp2::Int;

class Element;

// One factor of a composite word. Exactly one of the three shapes is populated:
// a named generator, a bracket [e1, ..., en] (binary = generalized Whitehead product,
// arity >= 3 = higher-order product carrying a representative tag), or an
// unexpanded parenthesized element left over when composition could not distribute.
struct Factor {
    std::string atom;
    std::shared_ptr<const std::vector<Element>> slots;
    std::string tag;
    std::shared_ptr<const Element> group;

    bool is_atom() const { return !slots && !group; }
    bool is_bracket() const { return static_cast<bool>(slots); }
    bool is_group() const { return static_cast<bool>(group); }
};

// Factors listed outermost first: "a.b.c" means a after b after c.
using Word = std::vector<Factor>;

struct Term {
    Int coef = 0;
    Word word;
};

// A formal 2-local integer combination of composite words, all with a common
// source and target. Terms are kept sorted by rendered word with nonzero coefficients.
class Element {
public:
    Element() = default;
    Element(SpaceId source, SpaceId target) : source_(std::move(source)), target_(std::move(target)) {}

    const SpaceId& source() const { return source_; }
    const SpaceId& target() const { return target_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool suspended() const { return suspended_; }

    // Only the normalizer should use these.
    std::vector<Term>& mutable_terms() { return terms_; }
    void set_suspended(bool s) { suspended_ = s; }

    // Coefficient of the term whose word renders as `word`, 0 if absent.
    Int coefficient(const std::string& word) const;

private:
    SpaceId source_, target_;
    std::vector<Term> terms_;
    bool suspended_ = false;
};

std::string render_word(const Word& w);
std::string render(const Element& e);

struct Symbol {
    std::string name;
    SpaceId source, target;
    Int order = 0;              // 0: infinite or unknown
    bool order_known = false;
    bool is_suspension = false;
};

// Signs that the underlying computations leave undetermined are carried explicitly.
// Group-level results never depend on them; they are resolved to Plus when a
// concrete coefficient is required.
enum class Sign { Plus, Minus, Either };

}  // namespace halg
