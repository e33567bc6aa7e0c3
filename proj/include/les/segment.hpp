#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halg/algebra.hpp"
#include "jf/filtration.hpp"
#include "kb/catalog.hpp"
#include "zp2/group.hpp"

namespace les {

using halg::Context;
using halg::Element;
using halg::SpaceId;
using zp2::Int;
using zp2::TwoLocalGroup;

// A group together with a way to read elements in it. `frame` is a group whose
// labels are single words (so halg::coordinates applies); `proj` maps frame
// coordinates to coordinates of `group`, and `lift` sends each generator of
// `group` back to frame coordinates. Display labels of `group` are the rendered lifts.
struct LabeledGroup {
    TwoLocalGroup group;
    TwoLocalGroup frame;
    zp2::Matrix proj;   // group.rank() x frame.rank()
    zp2::Matrix lift;   // frame.rank() x group.rank()
    SpaceId space;      // target of the labels
    int degree = 0;     // sphere dimension of their source

    // frame = g, proj = lift = identity.
    static LabeledGroup plain(TwoLocalGroup g, SpaceId space, int degree);

    // Coordinates of e in `group`, reduced modulo the orders.
    std::vector<Int> coords(const Context& c, const Element& e) const;
    // The element with the given coordinates in `group`.
    Element element(const Context& c, const std::vector<Int>& coords) const;
    // Re-renders the display labels from the lifts.
    void refresh_labels(const Context& c);
};

// ∂ restricted to suspensions factors as j_p ∘ f: ∂(Σα') = j_p ∘ f ∘ α'.
struct BoundaryRule {
    Element f;
    Element jp;
};

// Raises halg::MissingFact("KB fact required: ...") when α is not a suspension.
Element boundary_on_suspension(const Context& c, const BoundaryRule& rule, const Element& alpha);

// π_{k+1}(ΣX) -> π_k(F) -> π_k(C_f) -> π_k(ΣX) -> π_{k-1}(F) for a map f: X -> Y.
struct LesSegment {
    int k = 0;
    std::optional<TwoLocalGroup> base_up;     // π_{k+1}(ΣX)
    std::optional<TwoLocalGroup> fiber;       // π_k(F)
    std::optional<TwoLocalGroup> cofiber;     // π_k(C_f)
    std::optional<TwoLocalGroup> base;        // π_k(ΣX)
    std::optional<TwoLocalGroup> fiber_down;  // π_{k-1}(F)
    std::optional<zp2::GroupHom> d_up;        // (∂_k)_*
    std::optional<zp2::GroupHom> d_down;      // (∂_{k-1})_*
    std::vector<std::string> missing;         // what could not be filled, one line each
    std::vector<std::string> facts;           // KB facts consulted

    bool filled() const { return base_up && fiber && cofiber && base && fiber_down && d_up && d_down; }
};

// Names the pieces the segment needs for a map spec: the cofiber, the fiber's
// bottom-cell inclusion and the fiber's stage spaces. Throws for map specs that
// no shipped scenario covers.
struct Scenario {
    SpaceId cofiber;
    std::string jp;        // term for the inclusion of Y into the fiber
    SpaceId fiber_space;   // the space whose groups stand in for the fiber's below the next cell
};
Scenario scenario_for(const jf::MapSpec& f);

LesSegment assemble_segment(const kb::Catalog& kb, const Context& c, const jf::MapSpec& f, int k);

// |π_k(C_f)| = |Coker (∂_k)_*| · |Ker (∂_{k-1})_*| for a filled, finite segment.
// nullopt when the segment is not filled or something in it is infinite.
std::optional<bool> audit_exactness(const LesSegment& s);

}  // namespace les
