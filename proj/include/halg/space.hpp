#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace halg {

struct AlgebraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised whenever a computation needs an input that only the knowledge base can supply.
struct MissingFact : AlgebraError {
    using AlgebraError::AlgebraError;
};

// Integer-valued bindings used when instantiating parameterized text such as "j_L(m+1)".
using Env = std::map<std::string, long long>;

// Evaluates +, -, *, ^ and parentheses over integers and bound names.
long long eval_int(const std::string& expr, const Env& env);

// Replaces every "${expr}" in text by its evaluated value. Plain braces pass through.
std::string interpolate(const std::string& text, const Env& env);

class SpaceId {
public:
    enum class Kind { Sphere, Wedge, Moore, ConeChain, Named };

    static SpaceId sphere(int n);
    static SpaceId wedge(std::vector<SpaceId> parts);
    static SpaceId moore(int n, int r);                 // P^n(2^r)
    static SpaceId cone_chain(int base, std::vector<int> cells);
    static SpaceId named(std::string label);

    // Accepts "S^3", "S^2 v S^5", "P^3(2^4)", "S^2 u e^4 u e^6", or any other label.
    static SpaceId parse(const std::string& text);

    Kind kind() const { return kind_; }
    int dim() const { return n_; }                      // sphere dimension or Moore top dimension
    int moore_r() const { return r_; }
    const std::vector<SpaceId>& parts() const { return parts_; }
    const std::vector<int>& cells() const { return cells_; }
    const std::string& label() const { return label_; }

    std::string str() const;
    bool is_suspension() const;
    SpaceId suspend() const;

    bool operator==(const SpaceId& o) const { return str() == o.str(); }
    bool operator!=(const SpaceId& o) const { return !(*this == o); }
    bool operator<(const SpaceId& o) const { return str() < o.str(); }

private:
    Kind kind_ = Kind::Named;
    int n_ = 0;
    int r_ = 0;
    std::vector<SpaceId> parts_;
    std::vector<int> cells_;
    std::string label_;
};

}  // namespace halg
