#pragma once

#include <string>
#include <vector>

#include "halg/algebra.hpp"

namespace jf {

using halg::Element;
using halg::SpaceId;

struct FiltrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A map f: ΣX' -> ΣY' between suspensions. Only spheres of dimension >= 2 are
// accepted on either side in this version.
struct MapSpec {
    SpaceId source;   // X = ΣX'
    SpaceId target;   // Y = ΣY'
    Element cls;
    std::string text; // the term as the user wrote it, for display
};

// Parses a class such as "2^r iota_2" with the given integer bindings and checks
// that both ends are sphere suspensions.
MapSpec make_map_spec(const halg::Context& c, const std::string& text, const halg::Env& env = {});
MapSpec make_map_spec(const Element& cls, std::string text = {});

struct Stage {
    int index = 1;          // r
    int cell_dim = 0;       // dimension of the cone attached at this stage (stage 1: dim Y)
    Element gamma;          // attaching class; empty for stage 1
    SpaceId space;          // J_r
};

struct FiltrationModel {
    MapSpec f;
    std::vector<Stage> stages;

    int p() const { return f.source.dim(); }
    int q() const { return f.target.dim(); }
};

// Stages 1..n. Stage r >= 2 attaches a cone of dimension q + (r-1)p along γ_r; γ_2
// is the Whitehead product [ι_Y, f] in normal form and γ_r for r >= 3 is the
// r-slot product [j_Y, j_Y.f, ..., j_Y.f] with j_Y the inclusion of Y into J_{r-1}.
FiltrationModel build_filtration(const halg::Context& c, const MapSpec& f, int n);

struct FiberSkeleton {
    int stage = 1;
    SpaceId space;
    // π_k of the fiber agrees with π_k(space) for every k < iso_below.
    int iso_below = 0;
};

// Largest stage whose cells all lie in dimensions <= m (stage 1 when m < dim Y).
FiberSkeleton skeleton_of_fiber(const halg::Context& c, const MapSpec& f, int m);

// Cellular homology of ΣJ_k from the model's cells and attaching classes, per degree.
std::vector<zp2::TwoLocalGroup> suspended_homology(const FiltrationModel& model, int k, int maxdim);
// Homology of the wedge of Σ X ∧ A^{∧i}, i < k, computed from the map spec alone.
std::vector<zp2::TwoLocalGroup> wedge_homology(const MapSpec& f, int k, int maxdim);
// True when the two agree in every degree up to maxdim.
bool suspension_splitting_check(const FiltrationModel& model, int k, int maxdim);
bool suspension_splitting_check(const halg::Context& c, const MapSpec& f, int k, int maxdim);

// "J_1 = S^2" for one stage; otherwise "J_2: attach e^4 via 8*eta_2; J_3: ..." and,
// when every attaching class vanishes, the wedge it splits as ("J_2 = S^2 v S^5").
std::string render_text(const FiltrationModel& model);
// One JSON object per stage, newline separated.
std::string render_machine(const FiltrationModel& model);

// The map specs the shipped derivations use: 2^r iota_2 (r = 1..8) and 2^m eta_2 (m = 0..8).
std::vector<MapSpec> shipped_map_specs(const halg::Context& c);

}  // namespace jf
