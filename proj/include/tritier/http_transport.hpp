#pragma once

// Live HTTP transport, OpenAI-compatible chat-completions wire format.
// Pulled in only by targets that actually talk to providers (the CLI);
// everything else stays hermetic.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tritier/error.hpp"
#include "tritier/gateway.hpp"

namespace tritier {

namespace detail {

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    static const char* k = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(k[(v >> 18) & 63]);
        out.push_back(k[(v >> 12) & 63]);
        out.push_back(k[(v >> 6) & 63]);
        out.push_back(k[v & 63]);
        i += 3;
    }
    const std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(k[(v >> 18) & 63]);
        out.push_back(k[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(k[(v >> 18) & 63]);
        out.push_back(k[(v >> 12) & 63]);
        out.push_back(k[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

}  // namespace detail

class HttpTransport : public Transport {
public:
    bool requires_credentials() const override { return true; }

    TransportReply perform(const ModelEndpoint& endpoint, const ModelRequest& request) override {
        if (endpoint.base_url.empty())
            fail(Errc::config, "endpoint " + endpoint.key() + " has no base_url");
        nlohmann::json body;
        body["model"] = endpoint.model_name;
        nlohmann::json messages = nlohmann::json::array();
        if (!request.system_text.empty())
            messages.push_back({{"role", "system"}, {"content", request.system_text}});
        if (request.image) {
            nlohmann::json content = nlohmann::json::array();
            content.push_back({{"type", "text"}, {"text", request.user_text}});
            content.push_back(
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:" + request.image->media_type + ";base64," +
                               detail::base64_encode(request.image->bytes)}}}});
            messages.push_back({{"role", "user"}, {"content", std::move(content)}});
        } else {
            messages.push_back({{"role", "user"}, {"content", request.user_text}});
        }
        body["messages"] = std::move(messages);
        body["max_tokens"] = request.max_output_tokens;
        if (request.temperature) body["temperature"] = *request.temperature;

        httplib::Client client(endpoint.base_url);
        client.set_connection_timeout(30);
        client.set_read_timeout(300);
        httplib::Headers headers;
        if (const char* key = std::getenv(endpoint.credentials_ref.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);

        const auto result =
            client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!result)
            throw Error(Errc::transport,
                        "connection to " + endpoint.base_url + " failed: " +
                            httplib::to_string(result.error()),
                        /*retryable=*/true);
        if (result->status == 429 || result->status >= 500)
            throw Error(Errc::transport,
                        "provider returned status " + std::to_string(result->status),
                        /*retryable=*/true);
        if (result->status == 401 || result->status == 403)
            throw Error(Errc::auth, "provider rejected credentials (status " +
                                        std::to_string(result->status) + ")");
        if (result->status != 200)
            throw Error(Errc::transport,
                        "provider returned status " + std::to_string(result->status) + ": " +
                            result->body,
                        /*retryable=*/false);

        nlohmann::json payload = nlohmann::json::parse(result->body, nullptr, false);
        if (payload.is_discarded())
            throw Error(Errc::transport, "provider returned non-JSON body", false);
        TransportReply reply;
        reply.raw = result->body;
        try {
            reply.text = payload.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw Error(Errc::transport, "provider reply missing choices[0].message.content",
                        false);
        }
        if (payload.contains("usage")) {
            TokenUsage usage;
            usage.input = payload["usage"].value("prompt_tokens", 0L);
            usage.output = payload["usage"].value("completion_tokens", 0L);
            reply.usage = usage;
        }
        return reply;
    }
};

inline std::shared_ptr<Transport> make_http_transport() {
    return std::make_shared<HttpTransport>();
}

}  // namespace tritier
