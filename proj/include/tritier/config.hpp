#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tritier/error.hpp"
#include "tritier/gateway.hpp"
#include "tritier/sha256.hpp"
#include "tritier/tier1.hpp"

namespace tritier {

// ─── Plain-text config grammar ──────────────────────────────────────────────
//
//   # comment
//   dotted.key = value
//
// Values are strings; lists are comma-separated. ${VAR} environment
// interpolation is applied only to credential-bearing keys (last segment
// "credentials_ref" or ending in "api_key") so that everything else in a run
// is inspectable from the file alone.

class ConfigMap {
public:
    static ConfigMap parse(std::string_view text) {
        ConfigMap cfg;
        std::size_t line_no = 0, pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            ++line_no;
            std::string_view line = text.substr(pos, nl - pos);
            pos = nl + 1;
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') {
                if (nl == text.size()) break;
                continue;
            }
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                fail(Errc::config,
                     "config line " + std::to_string(line_no) + ": expected 'key = value'");
            std::string key = trim(trimmed.substr(0, eq));
            std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                fail(Errc::config, "config line " + std::to_string(line_no) + ": empty key");
            if (cfg.values_.count(key))
                fail(Errc::config,
                     "config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            if (is_secret_key(key)) value = interpolate_env(value, line_no);
            cfg.values_[key] = std::move(value);
            if (nl == text.size()) break;
        }
        return cfg;
    }

    static ConfigMap load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(Errc::io, "cannot open config " + path.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string get_or(const std::string& key, std::string fallback) const {
        auto v = get(key);
        return v ? *v : std::move(fallback);
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) fail(Errc::config, "config: missing required key '" + key + "'");
        return *v;
    }

    double get_double(const std::string& key, double fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const double d = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return d;
        } catch (const std::exception&) {
            fail(Errc::config, "config: key '" + key + "' is not a number: " + *v);
        }
    }

    long get_int(const std::string& key, long fallback) const {
        auto v = get(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            const long n = std::stol(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return n;
        } catch (const std::exception&) {
            fail(Errc::config, "config: key '" + key + "' is not an integer: " + *v);
        }
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto v = get(key);
        if (!v) return out;
        std::size_t pos = 0;
        while (pos <= v->size()) {
            std::size_t comma = v->find(',', pos);
            if (comma == std::string::npos) comma = v->size();
            const std::string item = trim(std::string_view(*v).substr(pos, comma - pos));
            if (!item.empty()) out.push_back(item);
            pos = comma + 1;
        }
        return out;
    }

    // Distinct <name> components among keys "prefix.<name>.*".
    std::vector<std::string> subsection_names(const std::string& prefix) const {
        std::set<std::string> names;
        const std::string p = prefix + ".";
        for (const auto& [key, _] : values_) {
            if (key.rfind(p, 0) != 0) continue;
            const std::string rest = key.substr(p.size());
            const std::size_t dot = rest.find('.');
            if (dot != std::string::npos) names.insert(rest.substr(0, dot));
        }
        return {names.begin(), names.end()};
    }

    // Canonical text: sorted "key = value" lines, comments and spacing gone.
    // Its digest changes iff some key/value changes.
    std::string canonical_text() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            out += k;
            out += " = ";
            out += v;
            out += "\n";
        }
        return out;
    }

    std::string digest() const { return sha256_hex(canonical_text()); }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(std::string_view s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        std::size_t e = s.find_last_not_of(" \t\r");
        if (b == std::string_view::npos) return "";
        return std::string(s.substr(b, e - b + 1));
    }

    static bool is_secret_key(std::string_view key) {
        const std::size_t dot = key.rfind('.');
        const std::string_view last = dot == std::string_view::npos ? key : key.substr(dot + 1);
        return last == "credentials_ref" || last.ends_with("api_key");
    }

    static std::string interpolate_env(const std::string& value, std::size_t line_no) {
        std::string out;
        std::size_t pos = 0;
        while (pos < value.size()) {
            const std::size_t open = value.find("${", pos);
            if (open == std::string::npos) {
                out += value.substr(pos);
                break;
            }
            out += value.substr(pos, open - pos);
            const std::size_t close = value.find('}', open + 2);
            if (close == std::string::npos)
                fail(Errc::config,
                     "config line " + std::to_string(line_no) + ": unterminated ${...}");
            const std::string var = value.substr(open + 2, close - open - 2);
            const char* env = std::getenv(var.c_str());
            if (!env)
                fail(Errc::config, "config line " + std::to_string(line_no) +
                                       ": environment variable '" + var + "' is not set");
            out += env;
            pos = close + 1;
        }
        return out;
    }

    std::map<std::string, std::string> values_;
};

// ─── Run configuration ──────────────────────────────────────────────────────

enum class TransportMode { live, record, replay, mock };

inline TransportMode transport_mode_from_name(std::string_view name) {
    if (name == "live") return TransportMode::live;
    if (name == "record") return TransportMode::record;
    if (name == "replay") return TransportMode::replay;
    if (name == "mock") return TransportMode::mock;
    fail(Errc::config, "unknown transport mode '" + std::string(name) + "'");
}

inline const char* transport_mode_name(TransportMode m) {
    switch (m) {
        case TransportMode::live: return "live";
        case TransportMode::record: return "record";
        case TransportMode::replay: return "replay";
        case TransportMode::mock: return "mock";
    }
    return "?";
}

struct RunConfig {
    std::filesystem::path config_dir;  // relative paths resolve against this
    ConfigMap raw;

    std::uint64_t seed = 0;
    TransportMode transport = TransportMode::mock;
    std::filesystem::path pairs_path;
    std::filesystem::path human_scores_path;  // optional until calibrate
    std::filesystem::path registry_path;
    std::filesystem::path image_root;
    std::filesystem::path out_dir;
    std::filesystem::path recording_dir;

    std::vector<std::string> model_names;            // config section names, sorted
    std::map<std::string, ModelEndpoint> models;
    std::vector<std::string> judge_names;
    std::map<std::string, ModelEndpoint> judges;
    std::string primary_judge;

    Tier1Config tier1;
    std::size_t calibration_train = 0;
    bool judge_sees_reference = true;
    int generation_max_tokens = 2048;
    int judge_max_tokens = 512;

    std::string digest() const { return raw.digest(); }
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute()) return path;
    return base / path;
}

inline ModelEndpoint endpoint_from_config(const ConfigMap& cfg, const std::string& section,
                                          const std::string& name) {
    ModelEndpoint e;
    const std::string prefix = section + "." + name + ".";
    e.provider = cfg.get_or(prefix + "provider", "openai");
    e.model_name = cfg.get_or(prefix + "model_name", name);
    e.base_url = cfg.get_or(prefix + "base_url", "");
    std::string upper_provider;
    for (char c : e.provider) upper_provider.push_back(static_cast<char>(std::toupper(c)));
    e.credentials_ref = cfg.get_or(prefix + "credentials_ref", "TRITIER_API_KEY_" + upper_provider);
    e.max_in_flight = static_cast<int>(cfg.get_int(prefix + "max_in_flight", 4));
    e.requests_per_minute = static_cast<int>(cfg.get_int(prefix + "requests_per_minute", 600));
    e.validate();
    return e;
}

}  // namespace detail

inline RunConfig load_run_config(const std::filesystem::path& path) {
    RunConfig rc;
    rc.raw = ConfigMap::load(path);
    rc.config_dir = std::filesystem::absolute(path).parent_path();
    const ConfigMap& cfg = rc.raw;

    if (!cfg.has("seed")) fail(Errc::config, "config: missing required key 'seed'");
    rc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    rc.transport = transport_mode_from_name(cfg.get_or("transport", "mock"));
    rc.pairs_path = detail::resolve(rc.config_dir, cfg.require("corpus.pairs"));
    if (cfg.has("corpus.human_scores"))
        rc.human_scores_path = detail::resolve(rc.config_dir, cfg.require("corpus.human_scores"));
    rc.registry_path = detail::resolve(rc.config_dir, cfg.require("registry"));
    rc.image_root = detail::resolve(rc.config_dir, cfg.get_or("corpus.image_root", "."));
    rc.out_dir = detail::resolve(rc.config_dir, cfg.get_or("out_dir", "runs/out"));
    rc.recording_dir = detail::resolve(rc.config_dir, cfg.get_or("recording_dir", "recordings"));

    for (const auto& name : cfg.subsection_names("models")) {
        rc.model_names.push_back(name);
        rc.models[name] = detail::endpoint_from_config(cfg, "models", name);
    }
    for (const auto& name : cfg.subsection_names("judges")) {
        rc.judge_names.push_back(name);
        rc.judges[name] = detail::endpoint_from_config(cfg, "judges", name);
    }
    rc.primary_judge = cfg.get_or("judges.primary", rc.judge_names.empty() ? "" : rc.judge_names[0]);

    rc.tier1.l_max = cfg.get_double("tier1.l_max", rc.tier1.l_max);
    rc.tier1.epsilon = cfg.get_double("tier1.epsilon", rc.tier1.epsilon);
    rc.tier1.flag_low_coverage = cfg.get_double("tier1.flags.low_coverage", rc.tier1.flag_low_coverage);
    rc.tier1.flag_weak_alignment =
        cfg.get_double("tier1.flags.weak_alignment", rc.tier1.flag_weak_alignment);
    rc.tier1.flag_template_risk =
        cfg.get_double("tier1.flags.template_risk", rc.tier1.flag_template_risk);
    rc.tier1.validate();

    rc.calibration_train = static_cast<std::size_t>(cfg.get_int("calibration.train", 0));
    rc.judge_sees_reference = cfg.get_or("judge.include_reference", "true") != "false";
    rc.generation_max_tokens = static_cast<int>(cfg.get_int("generation.max_output_tokens", 2048));
    rc.judge_max_tokens = static_cast<int>(cfg.get_int("judge.max_output_tokens", 512));
    return rc;
}

// ─── Validation report (cmd_validate) ───────────────────────────────────────

struct ValidationIssue {
    std::string location;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool clean() const { return issues.empty(); }
};

}  // namespace tritier
