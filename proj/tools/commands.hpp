#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kb/catalog.hpp"
#include "les/script.hpp"

namespace cli {

// Stable exit codes. Internal faults (bugs) exit with 1.
enum Exit : int { Ok = 0, Internal = 1, Validation = 2, MissingFact = 3, Mismatch = 4 };

int exit_code(les::ErrorKind k);

enum class Format { Text, Machine };

struct RunConfig {
    std::string command;                     // compute, reproduce, filtration, validate-kb
    std::optional<long long> r, m, k, n;
    std::string space;                       // P3, L4 or F
    std::string f;                           // map spec text for `filtration`
    std::string kb = HOMOTOPY_DEFAULT_KB;
    std::string scripts = HOMOTOPY_SCRIPT_DIR;
    Format format = Format::Text;
    long long eps = 0, eps_chi = 0;
};

struct Outcome {
    int code = Ok;
    std::string out;
    std::string err;
};

// Which script computes pi_k of a space selector, and its parameter.
struct ScriptChoice {
    std::string script;
    std::string param;
    long long value = 0;
};
// Throws les::ScriptError(Validation) for unknown selectors, degrees or bad parameters.
ScriptChoice choose_script(const RunConfig& cfg);

// One row of the reproduction table.
struct Row {
    std::string lemma;      // script name, or a derived row name
    std::string param;
    long long value = 0;
    std::string expected;
    std::string computed;   // empty when the run failed
    std::string error;
    bool pass = false;
};

// The expected groups, written out from the closed-form tables.
std::vector<Row> expected_rows();
std::vector<Row> reproduce_rows(const kb::Catalog& kb, const halg::Context& ctx, const les::ScriptLibrary& lib);

Outcome cmd_compute(const RunConfig& cfg);
Outcome cmd_reproduce(const RunConfig& cfg);
Outcome cmd_filtration(const RunConfig& cfg);
Outcome cmd_validate_kb(const RunConfig& cfg);
Outcome dispatch(const RunConfig& cfg);

// Parses argv with CLI11 and dispatches; returns the exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cli
