#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/ring.hpp"

namespace ltforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitGuard = 2;
inline constexpr int kExitInvariant = 3;

struct Guards {
    /// Largest number of candidates an enumeration may visit.
    exact::Integer enumeration = exact::Integer(1) << 20;
    unsigned max_degree = 4096;
    unsigned max_height = 3;
};

struct RunConfig {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t seed = 20240611;
    Guards guards;
    unsigned threads = 1;
    /// Adds the sorted list of module operations the command invoked.
    bool trace = false;
    /// Prints text charts instead of JSON where a command has them.
    bool text = false;

    /// {command, parameters, seed, guards}; unknown fields are a DomainError, non-positive guards GuardExceeded.
    static RunConfig from_json(const nlohmann::json& j);
};

struct RunResult {
    int exit_code = kExitOk;
    std::string output;
    std::string error;
    std::set<std::string> operations;
};

const std::vector<std::string>& commands();
RunResult run(const RunConfig& config);

/// Parses argv and runs; returns the exit status.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

namespace detail {
/// Records a module operation for the trace.
void note(const std::string& op);
nlohmann::ordered_json selftest(const RunConfig& config, bool& passed);
} // namespace detail

} // namespace ltforge::cli
