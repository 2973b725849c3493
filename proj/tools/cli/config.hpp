#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace canard::cli {

using json = nlohmann::json;

inline constexpr const char* kToolName = "canard";
inline constexpr const char* kToolVersion = "0.1.0";

/// Bad user input; maps to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class KeyType { number, integer, string, boolean, list };

struct KeySpec {
    std::string name;
    KeyType type;
    json fallback;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<KeySpec> keys;

    [[nodiscard]] const KeySpec* find(const std::string& key) const;
};

[[nodiscard]] const std::vector<CommandSpec>& command_specs();
[[nodiscard]] const CommandSpec& command_spec(const std::string& name);

/// Flat, typed key -> value map for one command.
class ResolvedConfig {
public:
    ResolvedConfig(std::string command, json values) : command_(std::move(command)), values_(std::move(values)) {}

    [[nodiscard]] const std::string& command() const { return command_; }
    [[nodiscard]] const json& values() const { return values_; }

    [[nodiscard]] double number(const std::string& key) const;
    [[nodiscard]] int integer(const std::string& key) const;
    [[nodiscard]] std::string string(const std::string& key) const;
    [[nodiscard]] bool boolean(const std::string& key) const;
    [[nodiscard]] std::vector<double> list(const std::string& key) const;

    /// sha256 over the canonical JSON dump (sorted keys) including the command.
    [[nodiscard]] std::string digest() const;

private:
    std::string command_;
    json values_;
};

/// Defaults, then the config file object, then flat overrides.
/// A file holding a run manifest contributes its "config" member.
/// @throws ConfigError on unknown keys, type mismatches or a command mismatch
[[nodiscard]] ResolvedConfig resolve(const CommandSpec& spec, const json& file,
                                     const std::vector<std::pair<std::string, std::string>>& overrides);

/// "a,b,c" or "lo:hi:n" (n evenly spaced points including both ends).
[[nodiscard]] std::vector<double> parse_list(const std::string& text);

}  // namespace canard::cli
