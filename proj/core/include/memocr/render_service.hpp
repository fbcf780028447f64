#pragma once

#include "memocr/layout_raster.hpp"
#include "memocr/memory_image.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace memocr {

struct RenderRequest {
    std::string markdown;
    std::optional<std::int64_t> budget;
    StyleSheet style = StyleSheet::defaults();
    PriorityConfig priority = PriorityConfig::defaults();
};

struct RenderOutput {
    PageLayout layout;
    MemoryImage image;
    std::int64_t visual_tokens = 0;
    double scale_factor = 1.0;
};

// Shared by the CLI and the HTTP endpoint.
RenderOutput render_request(const RenderRequest& req);

struct RenderServiceConfig {
    std::size_t max_markdown_bytes = 256 * 1024;
    int max_canvas_width = 4096;
};

// Carries the HTTP status a malformed request maps to.
class RequestError : public std::runtime_error {
public:
    RequestError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

// Parses {"markdown": ..., "budget": ..., "style": {...}, "priority": ...}.
RenderRequest parse_render_request(std::string_view body, const RenderServiceConfig& cfg = {});

struct HttpResponse {
    int status = 200;
    std::string content_type;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

// POST /render without the socket: 200 PNG, or 4xx with a JSON error body.
HttpResponse handle_render(std::string_view body, const RenderServiceConfig& cfg = {});

// Stateless HTTP front end: POST /render, GET /health, GET /schedule.
class RenderServer {
public:
    explicit RenderServer(RenderServiceConfig cfg = {});
    ~RenderServer();
    RenderServer(const RenderServer&) = delete;
    RenderServer& operator=(const RenderServer&) = delete;

    // Returns the bound port (0 picks a free one); -1 on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    bool listen_after_bind();
    void stop();
    bool is_running() const;
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace memocr
