#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "halg/algebra.hpp"
#include "zp2/group.hpp"

namespace kb {

enum class Kind { Group, Relation, BoundaryValue, LiftCertificate, SuspensionValue, MapIdentity };
enum class Trust { Paper, ClassicalTable, Derived };

std::string kind_name(Kind k);
std::string trust_name(Trust t);

struct KbError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fact as written in the file. Parameterized facts carry one integer parameter
// ranging over [lo, hi]; every field may use ${expr} to refer to it.
struct Fact {
    std::string id;
    Kind kind = Kind::Group;
    int line = 0;
    std::map<std::string, std::string> fields;
    std::string param;
    long long lo = 0, hi = 0;
    Trust trust = Trust::Paper;

    const std::string& quote() const { return fields.at("quote"); }
    std::string field(const std::string& key) const {
        auto it = fields.find(key);
        return it == fields.end() ? std::string() : it->second;
    }
    bool undetermined_sign() const;
};

// One concrete instantiation of a fact (parameter substituted).
struct Instance {
    const Fact* fact = nullptr;
    long long value = 0;                       // parameter value, if any
    std::map<std::string, std::string> fields;  // interpolated
    std::string key;                            // subject key used for uniqueness
};

struct LiftCertificate {
    std::string lift;      // generator name of the lift
    zp2::Int order = 0;
    std::string fact_id;
};

class Catalog {
public:
    Catalog() = default;
    // Instances point into facts_, so copies re-seat those pointers.
    Catalog(const Catalog& o);
    Catalog& operator=(const Catalog& o);
    Catalog(Catalog&&) noexcept = default;
    Catalog& operator=(Catalog&&) noexcept = default;

    static Catalog load(const std::string& path);
    static Catalog parse(const std::string& text, const std::string& origin = "<text>");

    std::string serialize() const;
    const std::vector<Fact>& facts() const { return facts_; }
    const std::vector<Instance>& instances() const { return instances_; }
    const std::string& version() const { return version_; }
    // SHA-256 of the source text, hex encoded.
    const std::string& digest() const { return digest_; }
    const Fact* by_id(const std::string& id) const;

    // A copy without the named facts (for negative controls and redundancy checks).
    Catalog without(const std::vector<std::string>& ids) const;

    // Symbol table, rewrite rules, suspension values and home groups. Global
    // parameters (eps) are substituted into fact text.
    halg::Context build_context(const halg::Env& globals = {}) const;

    // lookup_group: labeled group or MissingFact("KB fact required: pi_k(X)").
    zp2::TwoLocalGroup lookup_group(const halg::Context& c, const halg::SpaceId& space, int k,
                                    std::string* fact_id = nullptr) const;
    // lookup_boundary: the stored image of `element` under the named boundary map.
    // `component` selects a partial fact that only records some coordinates.
    halg::Element lookup_boundary(const halg::Context& c, const std::string& map, const halg::Element& element,
                                  const std::string& component = "", std::string* fact_id = nullptr) const;
    std::optional<LiftCertificate> lift_certificate(const halg::Context& c, const halg::SpaceId& space, int degree,
                                                    const std::string& label) const;

    const Instance* find_instance(Kind kind, const std::string& key) const;

private:
    void instantiate(const std::string& origin);

    std::vector<Fact> facts_;
    std::vector<Instance> instances_;
    std::map<std::string, std::size_t> index_;   // kind|key -> instance
    std::string version_ = "1";
    std::string digest_;
};

// Ids of stored relations, suspension values and map equations that the rest of
// the catalog already implies (checked on up to three instances per fact).
// Such facts should be derived, not stored.
std::vector<std::string> derivable_facts(const Catalog& c);

// Splits "pi_6(S^2 v S^5)" into 6 and the space text.
std::pair<int, std::string> split_homotopy_subject(const std::string& subject);

}  // namespace kb
