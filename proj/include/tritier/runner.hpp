#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/gateway.hpp"
#include "tritier/image.hpp"
#include "tritier/prompts.hpp"

namespace tritier {

// ─── Records ────────────────────────────────────────────────────────────────

struct GeneratedCritique {
    std::string pair_id;
    std::string model_name;
    std::string text;
    double latency_s = 0;
    std::string created_at;  // ISO-8601 UTC
    int attempts = 1;
    bool ok = true;
    std::string error;
};

inline json generated_critique_to_json(const GeneratedCritique& g) {
    json j;
    j["status"] = g.ok ? "ok" : "error";
    j["pair_id"] = g.pair_id;
    j["model_name"] = g.model_name;
    j["created_at"] = g.created_at;
    if (g.ok) {
        j["text"] = g.text;
        j["latency_s"] = g.latency_s;
        j["attempts"] = g.attempts;
    } else {
        j["error"] = g.error;
    }
    return j;
}

inline GeneratedCritique generated_critique_from_json(const json& j) {
    GeneratedCritique g;
    g.ok = j.value("status", "ok") == "ok";
    g.pair_id = j.at("pair_id").get<std::string>();
    g.model_name = j.at("model_name").get<std::string>();
    g.created_at = j.value("created_at", "");
    if (g.ok) {
        g.text = j.at("text").get<std::string>();
        if (g.text.empty()) fail(Errc::validation, "success record with empty critique text");
        g.latency_s = j.value("latency_s", 0.0);
        g.attempts = j.value("attempts", 1);
    } else {
        g.error = j.value("error", "");
    }
    return g;
}

inline std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ─── Run store (append-only JSONL per model) ────────────────────────────────

inline std::string sanitize_component(std::string_view name) {
    std::string out;
    for (char c : name) out.push_back((c == '/' || c == '\\' || c == ':') ? '_' : c);
    return out;
}

class RunStore {
public:
    explicit RunStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const { return root_; }

    std::filesystem::path model_dir(std::string_view model) const {
        return root_ / sanitize_component(model);
    }

    std::filesystem::path critiques_path(std::string_view model) const {
        return model_dir(model) / "critiques.jsonl";
    }
    std::filesystem::path tier1_path(std::string_view model) const {
        return model_dir(model) / "tier1.jsonl";
    }
    std::filesystem::path judgments_path(std::string_view model) const {
        return model_dir(model) / "judgments.jsonl";
    }

    std::vector<json> read_rows(const std::filesystem::path& path) const {
        std::vector<json> rows;
        if (!std::filesystem::exists(path)) return rows;
        std::ifstream in(path, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded())
                fail(Errc::schema, path.string() + ": line " + std::to_string(line_no) +
                                       ": malformed JSON");
            rows.push_back(std::move(j));
        }
        return rows;
    }

    void append_row(const std::filesystem::path& path, const json& row) const {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::app);
        if (!out) fail(Errc::io, "cannot append to " + path.string());
        out << row.dump() << "\n";
    }

private:
    std::filesystem::path root_;
};

// ─── Generation ─────────────────────────────────────────────────────────────

struct GenerationOptions {
    std::filesystem::path image_root;  // image_ref resolved against this
    int max_output_tokens = 2048;
    std::optional<double> temperature;  // provider default unless set
    std::size_t image_byte_budget = image::kDefaultByteBudget;
};

namespace detail {

inline std::vector<std::uint8_t> read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open image " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

// Runs every (model, pair) cell that is not already present in the store.
// Failures become error records; the run always completes. Returns the full
// grid in canonical (model, pair) order.
inline std::vector<GeneratedCritique> run_generation(Gateway& gateway,
                                                     std::vector<ModelEndpoint> models,
                                                     const std::vector<CritiquePair>& pairs,
                                                     RunStore& store,
                                                     const GenerationOptions& options) {
    std::stable_sort(models.begin(), models.end(),
                     [](const auto& a, const auto& b) { return a.model_name < b.model_name; });
    std::map<std::pair<std::string, std::string>, GeneratedCritique> grid;
    for (const auto& model : models) {
        std::set<std::string> done;
        for (const auto& row : store.read_rows(store.critiques_path(model.model_name))) {
            GeneratedCritique g = generated_critique_from_json(row);
            done.insert(g.pair_id);
            grid[{model.model_name, g.pair_id}] = std::move(g);
        }
        for (const auto& pair : pairs) {
            if (done.count(pair.id)) continue;
            GeneratedCritique g;
            g.pair_id = pair.id;
            g.model_name = model.model_name;
            g.created_at = iso8601_utc_now();
            try {
                const auto raw = detail::read_binary(options.image_root / pair.image_ref);
                const auto compressed = image::compress_image(raw, options.image_byte_budget);
                auto [system_text, user_text] = prompts::render_generation_prompt(pair);
                ModelRequest request;
                request.system_text = std::move(system_text);
                request.user_text = std::move(user_text);
                request.image = ImagePayload{image::sniff_media_type(compressed), compressed};
                request.max_output_tokens = options.max_output_tokens;
                request.temperature = options.temperature;
                const ModelResponse resp = gateway.send(model, request);
                if (resp.text.empty()) fail(Errc::transport, "model returned empty critique");
                g.text = resp.text;
                g.latency_s = resp.latency_s;
                g.attempts = resp.attempts;
            } catch (const Error& e) {
                g.ok = false;
                g.error = e.what();
            }
            store.append_row(store.critiques_path(model.model_name),
                             generated_critique_to_json(g));
            grid[{model.model_name, g.pair_id}] = std::move(g);
        }
    }
    // Canonical order: model name, then input pair order.
    std::vector<GeneratedCritique> out;
    out.reserve(grid.size());
    for (const auto& model : models)
        for (const auto& pair : pairs) {
            auto it = grid.find({model.model_name, pair.id});
            if (it != grid.end()) out.push_back(it->second);
        }
    return out;
}

}  // namespace tritier
