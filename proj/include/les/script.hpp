#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "les/segment.hpp"

namespace les {

// Derivation scripts are line oriented:
//
//   # comment
//   param r 1..62                       parameter and its allowed range
//   [r >= 2 && m != 1] name = op args   optional guard, then one step
//   require EXPR CMP EXPR               integer check over the bindings
//   assert_group NAME "Z/2 + Z(2)"      compare a group binding with an expected group
//
// Arguments are separated by blanks; "..." quotes a term, space or group and may
// use ${expr}. The group bound to `result` is the script's answer.
struct Step {
    int line = 0;
    std::string text;                 // the line as written
    std::string guard;                // empty: always
    std::string name;                 // binding, empty for checks
    std::string op;
    std::vector<std::string> args;    // quotes removed
    std::vector<bool> quoted;
};

struct Script {
    std::string name;
    std::map<std::string, std::pair<long long, long long>> params;
    std::vector<Step> steps;

    static Script parse(const std::string& text, const std::string& name = "<script>");
    static Script load(const std::string& path);
};

enum class ErrorKind { Validation, MissingFact, Assertion, Extension, Internal };

struct ScriptError : std::runtime_error {
    ScriptError(ErrorKind k, int step, const std::string& what)
        : std::runtime_error(what), kind(k), step(step) {}
    ErrorKind kind;
    int step;   // 1-based step index, 0 before any step ran
};

using Value = std::variant<long long, Element, LabeledGroup, zp2::GroupHom>;

struct ConsumedFact {
    std::string id;        // instance id as recorded in the context, e.g. "lift_eta4[m=3]"
    std::string kind;
    std::string trust;
    std::string locator;
    std::string quote;
};

struct TranscriptStep {
    int index = 0;
    std::string script;
    std::string text;
    std::string result;
};

struct RunResult {
    TwoLocalGroup group;
    std::map<std::string, Value> bindings;
    std::vector<TranscriptStep> steps;
    std::vector<ConsumedFact> facts;   // first use order

    std::string transcript_text() const;
    std::string transcript_machine() const;
    // SHA-256 of transcript_machine().
    std::string transcript_digest() const;
};

// Finds "<name>.deriv" in the script directory.
class ScriptLibrary {
public:
    explicit ScriptLibrary(std::string dir);
    const Script& get(const std::string& name) const;
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    mutable std::map<std::string, Script> cache_;
};

struct RunOptions {
    const kb::Catalog* kb = nullptr;
    const Context* context = nullptr;
    const ScriptLibrary* library = nullptr;   // needed only for `run`
};

RunResult run_script(const Script& s, const std::map<std::string, long long>& params, const RunOptions& opts);

}  // namespace les
