#include "app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace canard::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& tok = extras[i];
        if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw ConfigError("unexpected argument '" + tok + "'");
        const auto eq = tok.find('=');
        if (eq != std::string::npos) {
            out.emplace_back(tok.substr(2, eq - 2), tok.substr(eq + 1));
        } else {
            if (i + 1 >= extras.size()) throw ConfigError("missing value for '" + tok + "'");
            out.emplace_back(tok.substr(2), extras[++i]);
        }
    }
    return out;
}

json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::string list_keys(const CommandSpec& spec) {
    std::ostringstream os;
    for (const auto& k : spec.keys) os << "  --" << k.name << " (default " << k.fallback.dump() << ")  " << k.help << '\n';
    return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Canard and mixed-mode oscillation toolkit", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

    std::string config_path, out_dir;
    int workers = 1;
    bool show_keys = false;
    std::vector<CLI::App*> subs;
    for (const auto& spec : command_specs()) {
        auto* sub = app.add_subcommand(spec.name, spec.help);
        sub->allow_extras();
        sub->add_option("--config", config_path, "JSON config or a previous run manifest");
        sub->add_option("--out", out_dir, std::string("output directory (default $") + kOutDirEnv + " or ./canard-out)");
        sub->add_option("--workers", workers, "parallel workers for sweeps");
        sub->add_flag("--keys", show_keys, "list config keys and defaults");
        subs.push_back(sub);
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* sub = nullptr;
    for (auto* s : subs)
        if (s->parsed()) sub = s;
    const auto& spec = command_spec(sub->get_name());
    if (show_keys) {
        out << list_keys(spec);
        return kOk;
    }

    std::optional<ResolvedConfig> cfg;
    try {
        if (workers < 1) throw ConfigError("workers must be >= 1");
        const json file = config_path.empty() ? json(nullptr) : read_json(config_path);
        cfg = resolve(spec, file, parse_overrides(sub->remaining()));
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    if (out_dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        out_dir = env && *env ? env : "canard-out";
    }
    fs::create_directories(out_dir);

    json manifest = {{"tool", kToolName},
                     {"version", kToolVersion},
                     {"command", cfg->command()},
                     {"config", cfg->values()},
                     {"config_digest", cfg->digest()},
                     {"seed", cfg->values().at("seed")},
                     {"workers", workers},
                     {"created", utc_now()}};
    int code = kOk;
    json outputs = json::array();
    try {
        RunResult res = run_command(*cfg, RunContext{workers});
        for (const auto& [stem, table] : res.tables) {
            const std::string file = stem + ".csv";
            table.write_csv(fs::path(out_dir) / file);
            outputs.push_back({{"file", file}, {"rows", table.rows()}, {"columns", table.columns()}});
        }
        if (!res.summary.is_null()) {
            const std::string file = cfg->command() + ".json";
            write_text(fs::path(out_dir) / file, res.summary.dump(2) + "\n");
            outputs.push_back({{"file", file}});
        }
        manifest["failed_points"] = res.failed_points;
        if (!res.failure.empty() || res.failed_points > 0) {
            manifest["status"] = "partial";
            manifest["error"] = res.failure.empty() ? std::to_string(res.failed_points) + " point(s) failed" : res.failure;
            code = kNumerical;
        } else {
            manifest["status"] = "ok";
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        manifest["status"] = "numerical_failure";
        manifest["error"] = e.what();
        code = kNumerical;
    }
    manifest["outputs"] = outputs;
    write_text(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
    if (code != kOk) err << "error: " << manifest["error"].get<std::string>() << '\n';
    out << (fs::path(out_dir) / "manifest.json").string() << '\n';
    return code;
}

}  // namespace canard::cli
