#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/error.hpp"
#include "tritier/rng.hpp"
#include "tritier/sha256.hpp"

namespace tritier {

// ─── Wire types ─────────────────────────────────────────────────────────────

inline constexpr std::size_t kMaxImageBytes = 3932160;  // 3.75 MB

struct ModelEndpoint {
    std::string provider;          // "openai", "anthropic", "mock", ...
    std::string model_name;
    std::string base_url;
    std::string credentials_ref;   // environment variable name
    int max_in_flight = 4;
    int requests_per_minute = 600;

    void validate() const {
        if (model_name.empty()) fail(Errc::config, "endpoint without model_name");
        if (max_in_flight < 1) fail(Errc::config, "max_in_flight must be >= 1");
        if (requests_per_minute < 1) fail(Errc::config, "requests_per_minute must be >= 1");
    }

    std::string key() const { return provider + "/" + model_name; }
};

struct ImagePayload {
    std::string media_type;        // e.g. "image/jpeg"
    std::vector<std::uint8_t> bytes;
};

struct TokenUsage {
    long input = 0;
    long output = 0;
};

struct ModelRequest {
    std::string system_text;
    std::string user_text;
    std::optional<ImagePayload> image;
    int max_output_tokens = 2048;
    std::optional<double> temperature = 0.0;  // nullopt: provider default
};

struct ModelResponse {
    std::string text;
    double latency_s = 0;
    std::optional<TokenUsage> usage;
    std::string raw;               // provider payload kept for audit
    int attempts = 1;
};

// Stable digest over everything that identifies a request for record/replay.
inline std::string request_digest(const ModelEndpoint& endpoint, const ModelRequest& request) {
    Sha256 h;
    auto field = [&](std::string_view tag, std::string_view value) {
        h.update(tag);
        const std::uint64_t len = value.size();
        h.update(&len, sizeof(len));
        h.update(value);
    };
    field("provider", endpoint.provider);
    field("model", endpoint.model_name);
    field("system", request.system_text);
    field("user", request.user_text);
    if (request.image) {
        field("media", request.image->media_type);
        h.update("image");
        h.update(request.image->bytes.data(), request.image->bytes.size());
    }
    char buf[64];
    if (request.temperature)
        std::snprintf(buf, sizeof(buf), "t=%.6f;n=%d", *request.temperature,
                      request.max_output_tokens);
    else
        std::snprintf(buf, sizeof(buf), "t=default;n=%d", request.max_output_tokens);
    field("params", buf);
    return h.hex();
}

// ─── Transport interface ────────────────────────────────────────────────────

struct TransportReply {
    std::string text;
    double latency_s = -1;         // < 0: caller measures wall time
    std::optional<TokenUsage> usage;
    std::string raw;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual TransportReply perform(const ModelEndpoint& endpoint, const ModelRequest& request) = 0;
    virtual bool requires_credentials() const { return false; }
};

// ─── Mock transport ─────────────────────────────────────────────────────────

// Scripted or procedural replies with instrumentation for the concurrency
// contracts (call counts, max observed in-flight).
class MockTransport : public Transport {
public:
    using Handler = std::function<TransportReply(const ModelEndpoint&, const ModelRequest&)>;

    MockTransport() = default;
    explicit MockTransport(Handler handler) : handler_(std::move(handler)) {}

    // Scripted steps, consumed in order. A step is either a reply or an error.
    void push_reply(std::string text, double latency_s = 0.0) {
        std::lock_guard lk(mu_);
        steps_.push_back(Step{std::move(text), latency_s, false, false});
    }
    void push_failure(bool retryable, std::string message = "scripted failure") {
        std::lock_guard lk(mu_);
        steps_.push_back(Step{std::move(message), 0.0, true, retryable});
    }

    void set_delay(std::chrono::milliseconds d) { delay_ = d; }

    TransportReply perform(const ModelEndpoint& endpoint, const ModelRequest& request) override {
        {
            std::lock_guard lk(mu_);
            ++calls_;
            ++in_flight_;
            max_in_flight_ = std::max(max_in_flight_, in_flight_);
        }
        if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
        struct Leave {
            MockTransport* self;
            ~Leave() {
                std::lock_guard lk(self->mu_);
                --self->in_flight_;
            }
        } leave{this};

        std::optional<Step> step;
        {
            std::lock_guard lk(mu_);
            if (!steps_.empty()) {
                step = steps_.front();
                steps_.pop_front();
            }
        }
        if (step) {
            if (step->is_error) throw Error(Errc::transport, step->text, step->retryable);
            return TransportReply{step->text, step->latency_s, std::nullopt, "mock"};
        }
        if (handler_) return handler_(endpoint, request);
        return TransportReply{"", 0.0, std::nullopt, "mock"};
    }

    int calls() const {
        std::lock_guard lk(mu_);
        return calls_;
    }
    int max_in_flight() const {
        std::lock_guard lk(mu_);
        return max_in_flight_;
    }

private:
    struct Step {
        std::string text;
        double latency_s;
        bool is_error;
        bool retryable;
    };
    mutable std::mutex mu_;
    std::deque<Step> steps_;
    Handler handler_;
    std::chrono::milliseconds delay_{0};
    int calls_ = 0;
    int in_flight_ = 0;
    int max_in_flight_ = 0;
};

// ─── Record / replay ────────────────────────────────────────────────────────

// Directory of digest-named JSON files.
class RecordingStore {
public:
    explicit RecordingStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    bool has(const std::string& digest) const {
        return std::filesystem::exists(path_for(digest));
    }

    void put(const std::string& digest, const TransportReply& reply) const {
        nlohmann::json j;
        j["text"] = reply.text;
        j["latency_s"] = reply.latency_s;
        j["raw"] = reply.raw;
        if (reply.usage) j["usage"] = {{"input", reply.usage->input}, {"output", reply.usage->output}};
        std::ofstream out(path_for(digest), std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::io, "cannot write recording " + path_for(digest).string());
        out << j.dump(2) << "\n";
    }

    TransportReply get(const std::string& digest) const {
        std::ifstream in(path_for(digest), std::ios::binary);
        if (!in) throw Error(Errc::replay_miss, "no recording for digest " + digest);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) fail(Errc::io, "corrupt recording " + path_for(digest).string());
        TransportReply r;
        r.text = j.at("text").get<std::string>();
        r.latency_s = j.value("latency_s", 0.0);
        r.raw = j.value("raw", "");
        if (j.contains("usage"))
            r.usage = TokenUsage{j["usage"].value("input", 0L), j["usage"].value("output", 0L)};
        return r;
    }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& digest) const {
        return dir_ / (digest + ".json");
    }
    std::filesystem::path dir_;
};

class RecordTransport : public Transport {
public:
    RecordTransport(std::shared_ptr<Transport> inner, RecordingStore store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    TransportReply perform(const ModelEndpoint& endpoint, const ModelRequest& request) override {
        const std::string digest = request_digest(endpoint, request);
        if (store_.has(digest)) return store_.get(digest);
        const auto t0 = std::chrono::steady_clock::now();
        TransportReply reply = inner_->perform(endpoint, request);
        if (reply.latency_s < 0)
            reply.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        store_.put(digest, reply);
        return reply;
    }

    bool requires_credentials() const override { return inner_->requires_credentials(); }

private:
    std::shared_ptr<Transport> inner_;
    RecordingStore store_;
};

class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(RecordingStore store) : store_(std::move(store)) {}

    TransportReply perform(const ModelEndpoint& endpoint, const ModelRequest& request) override {
        return store_.get(request_digest(endpoint, request));
    }

private:
    RecordingStore store_;
};

// ─── Gateway ────────────────────────────────────────────────────────────────

struct RetryPolicy {
    int max_attempts = 5;
    double base_delay_s = 1.0;
    double factor = 2.0;
    double jitter = 0.2;           // +-20%
};

// Provider-agnostic send facade: payload precondition, credential check,
// per-endpoint rate limiting and in-flight caps, retry with exponential
// backoff on retryable transport failures.
class Gateway {
public:
    using Sleeper = std::function<void(double /*seconds*/)>;

    explicit Gateway(std::shared_ptr<Transport> transport, RetryPolicy retry = {},
                     Sleeper sleeper = nullptr, std::uint64_t jitter_seed = 0x7269746965727471ull)
        : transport_(std::move(transport)),
          retry_(retry),
          sleeper_(sleeper ? std::move(sleeper)
                           : [](double s) {
                                 std::this_thread::sleep_for(std::chrono::duration<double>(s));
                             }),
          jitter_rng_(jitter_seed) {}

    ModelResponse send(const ModelEndpoint& endpoint, const ModelRequest& request) {
        endpoint.validate();
        if (request.image && request.image->bytes.size() > kMaxImageBytes)
            fail(Errc::payload_too_large,
                 "image payload " + std::to_string(request.image->bytes.size()) +
                     " bytes exceeds the 3932160-byte limit");
        if (transport_->requires_credentials()) {
            const char* value = endpoint.credentials_ref.empty()
                                    ? nullptr
                                    : std::getenv(endpoint.credentials_ref.c_str());
            if (!value || !*value)
                fail(Errc::auth, "credentials not resolvable from environment variable '" +
                                     endpoint.credentials_ref + "'");
        }

        EndpointState& state = state_for(endpoint);
        InFlightGuard guard(state, endpoint.max_in_flight);

        int attempt = 0;
        for (;;) {
            ++attempt;
            state.wait_for_rate_slot(endpoint.requests_per_minute);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                TransportReply reply = transport_->perform(endpoint, request);
                ModelResponse resp;
                resp.text = std::move(reply.text);
                resp.usage = reply.usage;
                resp.raw = std::move(reply.raw);
                resp.latency_s =
                    reply.latency_s >= 0
                        ? reply.latency_s
                        : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
                resp.attempts = attempt;
                return resp;
            } catch (const Error& e) {
                if (!e.retryable()) throw;
                if (attempt >= retry_.max_attempts)
                    throw Error(Errc::retries_exhausted,
                                "gave up after " + std::to_string(attempt) +
                                    " attempts; last error: " + e.what());
                double delay = retry_.base_delay_s;
                for (int i = 1; i < attempt; ++i) delay *= retry_.factor;
                double j;
                {
                    std::lock_guard lk(jitter_mu_);
                    j = jitter_rng_.uniform(-retry_.jitter, retry_.jitter);
                }
                sleeper_(delay * (1.0 + j));
            }
        }
    }

private:
    struct EndpointState {
        std::mutex mu;
        std::condition_variable cv;
        int in_flight = 0;
        std::deque<std::chrono::steady_clock::time_point> window;  // recent request times

        void wait_for_rate_slot(int rpm) {
            using namespace std::chrono;
            std::unique_lock lk(mu);
            for (;;) {
                const auto now = steady_clock::now();
                while (!window.empty() && now - window.front() >= minutes(1)) window.pop_front();
                if (static_cast<int>(window.size()) < rpm) {
                    window.push_back(now);
                    return;
                }
                cv.wait_until(lk, window.front() + minutes(1));
            }
        }
    };

    struct InFlightGuard {
        EndpointState& state;
        InFlightGuard(EndpointState& s, int cap) : state(s) {
            std::unique_lock lk(state.mu);
            state.cv.wait(lk, [&] { return state.in_flight < cap; });
            ++state.in_flight;
        }
        ~InFlightGuard() {
            {
                std::lock_guard lk(state.mu);
                --state.in_flight;
            }
            state.cv.notify_all();
        }
    };

    EndpointState& state_for(const ModelEndpoint& endpoint) {
        std::lock_guard lk(states_mu_);
        auto& slot = states_[endpoint.key()];
        if (!slot) slot = std::make_unique<EndpointState>();
        return *slot;
    }

    std::shared_ptr<Transport> transport_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::mutex states_mu_;
    std::map<std::string, std::unique_ptr<EndpointState>> states_;
    std::mutex jitter_mu_;
    Rng jitter_rng_;
};

}  // namespace tritier
