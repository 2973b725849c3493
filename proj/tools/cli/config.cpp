#include "config.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "canard/canonical.hpp"
#include "canard/neuron.hpp"

namespace canard::cli {

namespace {

namespace ref = canonical::reference;

std::vector<KeySpec> neuron_keys(double I_app) {
    const neuron::FullParams p;
    return {
        {"Iapp", KeyType::number, I_app, "applied current (uA/cm^2)"},
        {"C", KeyType::number, p.C, "membrane capacitance"},
        {"gNa", KeyType::number, p.g_Na, "transient sodium conductance"},
        {"gK", KeyType::number, p.g_K, "delayed rectifier conductance"},
        {"gL", KeyType::number, p.g_L, "leak conductance"},
        {"gNap", KeyType::number, p.g_Nap, "persistent sodium conductance"},
        {"gKs", KeyType::number, p.g_Ks, "slow potassium conductance"},
        {"ENa", KeyType::number, p.E_Na, "sodium reversal"},
        {"EK", KeyType::number, p.E_K, "potassium reversal"},
        {"EL", KeyType::number, p.E_L, "leak reversal"},
        {"tauw", KeyType::number, p.tau_w, "slow potassium time constant"},
        {"taup", KeyType::number, p.tau_p, "persistent sodium time constant"},
    };
}

std::vector<KeySpec> canonical_keys(double mu_bar) {
    return {
        {"eps", KeyType::number, ref::eps, "singular parameter"},
        {"mu_bar", KeyType::number, mu_bar, "rescaled bifurcation parameter"},
        {"a", KeyType::number, ref::a, "canonical a"},
        {"b", KeyType::number, ref::b, "canonical b"},
        {"D1", KeyType::number, canonical::kD1, "cubic coefficient"},
    };
}

std::vector<KeySpec> tolerance_keys(double rtol, double atol) {
    return {
        {"rtol", KeyType::number, rtol, "relative tolerance"},
        {"atol", KeyType::number, atol, "absolute tolerance"},
        {"seed", KeyType::integer, 0, "recorded RNG seed (all commands are deterministic)"},
    };
}

template <class... Parts>
std::vector<KeySpec> join(Parts&&... parts) {
    std::vector<KeySpec> out;
    (out.insert(out.end(), parts.begin(), parts.end()), ...);
    return out;
}

std::vector<CommandSpec> build_specs() {
    std::vector<CommandSpec> s;
    s.push_back({"simulate", "integrate a neuron model or a canonical chart",
                 join(std::vector<KeySpec>{
                          {"model", KeyType::string, "modified3", "full|reduced3|modified3|full-noINa|full-noIK"},
                          {"chart", KeyType::string, "", "canon|slow|micro|sigma|rescc|resccr|extended (overrides model)"},
                          {"tmax", KeyType::number, 2000.0, "final time"},
                          {"v_offset", KeyType::number, -5.0, "initial voltage offset from rest (mV)"},
                          {"init", KeyType::string, "s1d", "chart start: s1d|point"},
                          {"rho", KeyType::number, canonical::kDefaultRho, "canonical distance of the S1D seed"},
                          {"x0", KeyType::number, 0.0, "chart start (init=point)"},
                          {"y0", KeyType::number, 0.0, "chart start (init=point)"},
                          {"z0", KeyType::number, 0.0, "chart start (init=point)"},
                          {"h_max", KeyType::number, 0.5, "largest step (0 for unbounded)"},
                      },
                      neuron_keys(17.1), canonical_keys(0.12), tolerance_keys(1e-8, 1e-10))});
    s.push_back({"bifurcate", "equilibrium branch, Hopf point and criticality",
                 join(std::vector<KeySpec>{
                          {"model", KeyType::string, "full", "model variant"},
                          {"Ilo", KeyType::number, 0.5, "lower drive"},
                          {"Ihi", KeyType::number, 1.5, "upper drive"},
                          {"grid", KeyType::integer, 41, "branch samples"},
                          {"criticality", KeyType::boolean, true, "run the criticality probes"},
                      },
                      neuron_keys(0.0), tolerance_keys(1e-8, 1e-10))});
    s.push_back({"reduce", "folded node and canonical parameters",
                 join(std::vector<KeySpec>{{"model", KeyType::string, "modified3", "model variant"}},
                      neuron_keys(17.1), tolerance_keys(1e-8, 1e-10))});
    s.push_back({"mmo-scan", "MMO signatures over a drive or mu_bar grid",
                 join(std::vector<KeySpec>{
                          {"model", KeyType::string, "modified3", "model variant"},
                          {"chart", KeyType::string, "", "empty for the neuron, micro for the canonical model"},
                          {"Iapp_grid", KeyType::list, "16.95,17.1,17.3,17.6,17.9,18.5", "drives (neuron)"},
                          {"mu_grid", KeyType::list, "0.1,0.12,0.13,0.135,0.14", "mu_bar values (micro)"},
                          {"tmax", KeyType::number, 3000.0, "final time"},
                          {"rho", KeyType::number, canonical::kDefaultRho, "S1D seed distance (micro)"},
                      },
                      neuron_keys(17.1), canonical_keys(0.12), tolerance_keys(1e-9, 1e-11))});
    s.push_back({"canard", "maximal canard by shooting to the xb = 0 section",
                 join(std::vector<KeySpec>{
                          {"mu_lo", KeyType::number, 0.128, "bracket"},
                          {"mu_hi", KeyType::number, 0.148, "bracket"},
                          {"tol", KeyType::number, 1e-6, "bisection width"},
                          {"z_lo", KeyType::number, 1.0, "repelling slice window"},
                          {"z_hi", KeyType::number, 3.0, "repelling slice window"},
                          {"z_points", KeyType::integer, 41, "repelling slice samples"},
                          {"sigma0", KeyType::number, 1e-2, "asymptotic seed (eps = 0)"},
                          {"rho", KeyType::number, canonical::kDefaultRho, "S1D seed distance (eps > 0)"},
                      },
                      canonical_keys(0.0), tolerance_keys(1e-10, 1e-12))});
    s.push_back({"transition-curve", "MMO to spiking threshold mu*(eps)",
                 join(std::vector<KeySpec>{
                          {"eps", KeyType::list, "0.25,0.2,0.15,0.1", "eps values"},
                          {"mu_lo", KeyType::number, 0.11, "bracket"},
                          {"mu_hi", KeyType::number, 0.16, "bracket"},
                          {"tol", KeyType::number, 1e-4, "bisection width"},
                          {"tmax", KeyType::number, 3000.0, "final time per classification"},
                          {"a", KeyType::number, ref::a, "canonical a"},
                          {"b", KeyType::number, ref::b, "canonical b"},
                          {"D1", KeyType::number, canonical::kD1, "cubic coefficient"},
                      },
                      tolerance_keys(1e-9, 1e-11))});
    s.push_back({"transversality", "singular special solution crossing yb = xb^2",
                 join(std::vector<KeySpec>{
                          {"mu_grid", KeyType::list, "0.05:0.12:15", "mu_bar values"},
                          {"a", KeyType::number, ref::a, "canonical a"},
                          {"b", KeyType::number, ref::b, "canonical b"},
                          {"sigma0", KeyType::number, 1e-2, "asymptotic seed"},
                      },
                      tolerance_keys(1e-10, 1e-12))});
    return s;
}

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

double to_number(const std::string& key, const std::string& text) {
    double x = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc{} || ptr != end) bad("'" + key + "' expects a number, got '" + text + "'");
    return x;
}

json coerce(const KeySpec& k, const json& v) {
    switch (k.type) {
        case KeyType::number:
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return to_number(k.name, v.get<std::string>());
            break;
        case KeyType::integer:
            if (v.is_number_integer()) return v.get<long long>();
            if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return v.get<long long>();
            if (v.is_string()) {
                const auto& t = v.get_ref<const std::string&>();
                long long n = 0;
                auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
                if (ec == std::errc{} && ptr == t.data() + t.size()) return n;
            }
            break;
        case KeyType::string:
            if (v.is_string()) return v;
            break;
        case KeyType::boolean:
            if (v.is_boolean()) return v;
            if (v.is_string()) {
                const auto& t = v.get_ref<const std::string&>();
                if (t == "true" || t == "1") return true;
                if (t == "false" || t == "0") return false;
            }
            break;
        case KeyType::list: {
            std::vector<double> xs;
            if (v.is_array()) {
                for (const auto& e : v) {
                    if (!e.is_number()) bad("'" + k.name + "' expects numbers");
                    xs.push_back(e.get<double>());
                }
            } else if (v.is_number()) {
                xs.push_back(v.get<double>());
            } else if (v.is_string()) {
                xs = parse_list(v.get<std::string>());
            } else {
                break;
            }
            if (xs.empty()) bad("'" + k.name + "' is empty");
            return xs;
        }
    }
    bad("'" + k.name + "' has the wrong type: " + v.dump());
}

}  // namespace

const KeySpec* CommandSpec::find(const std::string& key) const {
    for (const auto& k : keys)
        if (k.name == key) return &k;
    return nullptr;
}

const std::vector<CommandSpec>& command_specs() {
    static const std::vector<CommandSpec> specs = build_specs();
    return specs;
}

const CommandSpec& command_spec(const std::string& name) {
    for (const auto& s : command_specs())
        if (s.name == name) return s;
    bad("unknown command '" + name + "'");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) bad("range must be lo:hi:n, got '" + text + "'");
        const double lo = to_number("range", parts[0]);
        const double hi = to_number("range", parts[1]);
        const double nd = to_number("range", parts[2]);
        const int n = static_cast<int>(nd);
        if (n < 1 || n != nd) bad("range count must be a positive integer");
        if (n == 1) return {lo};
        for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
        return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        if (part.empty()) bad("empty item in list '" + text + "'");
        out.push_back(to_number("list", part));
    }
    return out;
}

ResolvedConfig resolve(const CommandSpec& spec, const json& file,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    json values = json::object();
    for (const auto& k : spec.keys) values[k.name] = coerce(k, k.fallback);

    json source = file;
    if (source.is_object() && source.contains("config") && source["config"].is_object()) {
        if (source.contains("command") && source["command"] != spec.name)
            bad("manifest is for command " + source["command"].dump());
        source = source["config"];
    }
    if (!source.is_null()) {
        if (!source.is_object()) bad("config file must hold a JSON object");
        for (const auto& [key, v] : source.items()) {
            if (key == "command") {
                if (v != spec.name) bad("config is for command " + v.dump());
                continue;
            }
            const KeySpec* k = spec.find(key);
            if (!k) bad("unknown key '" + key + "' for " + spec.name);
            values[key] = coerce(*k, v);
        }
    }
    for (const auto& [key, text] : overrides) {
        const KeySpec* k = spec.find(key);
        if (!k) bad("unknown key '" + key + "' for " + spec.name);
        values[key] = coerce(*k, json(text));
    }
    for (const auto& [key, v] : values.items())
        if (v.is_number_float() && !std::isfinite(v.get<double>())) bad("'" + key + "' must be finite");
    return ResolvedConfig(spec.name, std::move(values));
}

double ResolvedConfig::number(const std::string& key) const { return values_.at(key).get<double>(); }
int ResolvedConfig::integer(const std::string& key) const { return values_.at(key).get<int>(); }
std::string ResolvedConfig::string(const std::string& key) const { return values_.at(key).get<std::string>(); }
bool ResolvedConfig::boolean(const std::string& key) const { return values_.at(key).get<bool>(); }
std::vector<double> ResolvedConfig::list(const std::string& key) const {
    return values_.at(key).get<std::vector<double>>();
}

std::string ResolvedConfig::digest() const {
    json doc = values_;
    doc["command"] = command_;
    const std::string text = doc.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream hex;
    hex << "sha256:";
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

}  // namespace canard::cli
