#pragma once

#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace canard::cli {

struct RunContext {
    int workers = 1;
};

struct RunResult {
    std::vector<std::pair<std::string, ResultTable>> tables;  ///< file stem -> table
    json summary;                                             ///< written as <command>.json when not null
    int failed_points = 0;
    std::string failure;  ///< non-empty for a numerical failure with partial output
};

/// @throws ConfigError or std::invalid_argument on bad input,
///         std::runtime_error on a numerical failure without usable output
[[nodiscard]] RunResult run_command(const ResolvedConfig& cfg, const RunContext& ctx);

}  // namespace canard::cli
