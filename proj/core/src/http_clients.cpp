#include "memocr/http_clients.hpp"

#include "memocr/errors.hpp"
#include "memocr/memory_image.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

namespace memocr {

namespace {

using nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

std::string complete(const HttpClientConfig& cfg, json messages) {
    if (cfg.endpoint.empty()) {
        throw ClientError("no endpoint configured (set --endpoint or MEMOCR_ENDPOINT)");
    }
    httplib::Client client(cfg.endpoint);
    client.set_connection_timeout(cfg.timeout_seconds);
    client.set_read_timeout(cfg.timeout_seconds);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + cfg.api_key);
    }
    json body = {{"model", cfg.model}, {"messages", std::move(messages)}, {"max_tokens", cfg.max_tokens}};
    auto res = client.Post(cfg.path, headers, body.dump(), "application/json");
    if (!res) {
        throw ClientError("request to " + cfg.endpoint + cfg.path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ClientError("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
        const json reply = json::parse(res->body);
        const json& content = reply.at("choices").at(0).at("message").at("content");
        if (content.is_string()) {
            return content.get<std::string>();
        }
        // Some servers return content as an array of typed parts.
        std::string text;
        for (const auto& part : content) {
            if (part.value("type", "") == "text") {
                text += part.value("text", "");
            }
        }
        return text;
    } catch (const json::exception& e) {
        throw ClientError(std::string("malformed completion response: ") + e.what());
    }
}

}  // namespace

HttpClientConfig HttpClientConfig::with_environment() const {
    HttpClientConfig c = *this;
    c.endpoint = endpoint.empty() ? env_or("MEMOCR_ENDPOINT", "") : endpoint;
    c.model = model.empty() ? env_or("MEMOCR_MODEL", "") : model;
    c.api_key = api_key.empty() ? env_or("MEMOCR_API_KEY", "") : api_key;
    return c;
}

HttpDrafter::HttpDrafter(HttpClientConfig cfg) : cfg_(std::move(cfg)) {}

std::string HttpDrafter::draft(const DraftRequest& request) {
    json messages = json::array({{{"role", "user"}, {"content", std::string(request.prompt)}}});
    return complete(cfg_, std::move(messages));
}

HttpReader::HttpReader(HttpClientConfig cfg) : cfg_(std::move(cfg)) {}

std::string HttpReader::read(const ReadRequest& request) {
    const auto png = encode_png(request.image);
    json content = json::array({
        {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}},
        {{"type", "text"}, {"text", std::string(request.prompt)}},
    });
    json messages = json::array({{{"role", "user"}, {"content", std::move(content)}}});
    return complete(cfg_, std::move(messages));
}

}  // namespace memocr
