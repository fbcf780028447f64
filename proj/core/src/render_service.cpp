#include "memocr/render_service.hpp"

#include "memocr/budget_control.hpp"
#include "memocr/errors.hpp"
#include "memocr/memory_lifecycle.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace memocr {

using nlohmann::json;

namespace {

int int_field(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        throw RequestError(400, std::string("style.") + key + " must be an integer");
    }
    return v.get<int>();
}

StyleSheet parse_style(const json& s, const RenderServiceConfig& cfg) {
    if (!s.is_object()) {
        throw RequestError(400, "style must be an object");
    }
    StyleSheet style;
    try {
        style = StyleSheet::from_name(s.value("preset", std::string("default")));
    } catch (const FormatError& e) {
        throw RequestError(400, e.what());
    }
    style.canvas_width = int_field(s, "canvas_width", style.canvas_width);
    style.margin = int_field(s, "margin", style.margin);
    style.line_gap = int_field(s, "line_gap", style.line_gap);
    style.bold_stroke = int_field(s, "bold_stroke", style.bold_stroke);
    style.bullet_indent = int_field(s, "bullet_indent", style.bullet_indent);
    if (s.contains("scales")) {
        const json& sc = s["scales"];
        if (!sc.is_object()) {
            throw RequestError(400, "style.scales must be an object");
        }
        for (const auto& [k, v] : sc.items()) {
            if (!v.is_number()) {
                throw RequestError(400, "style.scales." + k + " must be a number");
            }
            const double val = v.get<double>();
            if (k.size() == 2 && k[0] == 'h' && k[1] >= '1' && k[1] <= '6') {
                style.h_scale[k[1] - '1'] = val;
            } else if (k == "paragraph") {
                style.paragraph_scale = val;
            } else if (k == "bullet") {
                style.bullet_scale = val;
            } else {
                throw RequestError(400, "unknown scale '" + k + "'");
            }
        }
    }
    if (style.canvas_width > cfg.max_canvas_width) {
        throw RequestError(400, "canvas_width exceeds " + std::to_string(cfg.max_canvas_width));
    }
    if (style.max_scale() > 16.0) {
        throw RequestError(400, "scales above 16 are not accepted");
    }
    try {
        style.validate();
    } catch (const PreconditionError& e) {
        throw RequestError(400, e.what());
    }
    return style;
}

HttpResponse json_error(int status, const std::string& msg) {
    HttpResponse r;
    r.status = status;
    r.content_type = "application/json";
    r.body = json{{"error", msg}, {"status", status}}.dump();
    return r;
}

}  // namespace

RenderOutput render_request(const RenderRequest& req) {
    RenderedMemory rendered = render_memory(req.markdown, req.style, req.priority);
    RenderOutput out;
    out.layout = std::move(rendered.layout);
    if (req.budget) {
        FitResult fit = fit_to_budget(rendered.image, *req.budget);
        out.image = std::move(fit.image);
        out.scale_factor = fit.scale_factor;
    } else {
        out.image = std::move(rendered.image);
    }
    out.visual_tokens = visual_token_count(out.image);
    return out;
}

RenderRequest parse_render_request(std::string_view body, const RenderServiceConfig& cfg) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        throw RequestError(400, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw RequestError(400, "request body must be a JSON object");
    }
    RenderRequest req;
    if (!j.contains("markdown") || !j["markdown"].is_string()) {
        throw RequestError(400, "'markdown' must be a string");
    }
    req.markdown = j["markdown"].get<std::string>();
    if (req.markdown.size() > cfg.max_markdown_bytes) {
        throw RequestError(413, "markdown is " + std::to_string(req.markdown.size()) + " bytes; limit is " +
                                    std::to_string(cfg.max_markdown_bytes));
    }
    if (j.contains("budget") && !j["budget"].is_null()) {
        const json& b = j["budget"];
        if (!b.is_number_integer() || b.get<std::int64_t>() < 1) {
            throw RequestError(400, "'budget' must be an integer >= 1");
        }
        req.budget = b.get<std::int64_t>();
    }
    if (j.contains("style")) {
        req.style = parse_style(j["style"], cfg);
    }
    if (j.contains("priority")) {
        if (!j["priority"].is_string()) {
            throw RequestError(400, "'priority' must be a string");
        }
        try {
            req.priority = PriorityConfig::from_name(j["priority"].get<std::string>());
        } catch (const FormatError& e) {
            throw RequestError(400, e.what());
        }
    }
    return req;
}

HttpResponse handle_render(std::string_view body, const RenderServiceConfig& cfg) {
    RenderRequest req;
    try {
        req = parse_render_request(body, cfg);
    } catch (const RequestError& e) {
        return json_error(e.status(), e.what());
    }
    const RenderOutput out = render_request(req);
    const auto png = encode_png(out.image);
    HttpResponse r;
    r.status = 200;
    r.content_type = "image/png";
    r.body.assign(reinterpret_cast<const char*>(png.data()), png.size());
    r.headers.emplace_back("X-Visual-Tokens", std::to_string(out.visual_tokens));
    r.headers.emplace_back("X-Image-Size", std::to_string(out.image.width()) + "x" + std::to_string(out.image.height()));
    r.headers.emplace_back("X-Scale-Factor", std::to_string(out.scale_factor));
    return r;
}

struct RenderServer::Impl {
    RenderServiceConfig cfg;
    httplib::Server server;
};

RenderServer::RenderServer(RenderServiceConfig cfg) : impl_(std::make_unique<Impl>()) {
    impl_->cfg = cfg;
    auto& srv = impl_->server;
    // Leave room above the markdown limit so oversize bodies reach our 413 handler.
    srv.set_payload_max_length(cfg.max_markdown_bytes * 8 + 4096);
    // Small responses on keep-alive connections otherwise stall on delayed ACKs.
    srv.set_tcp_nodelay(true);
    srv.Post("/render", [this](const httplib::Request& req, httplib::Response& res) {
        HttpResponse r;
        try {
            r = handle_render(req.body, impl_->cfg);
        } catch (const std::exception& e) {
            r = json_error(500, e.what());
        }
        res.status = r.status;
        for (const auto& [k, v] : r.headers) {
            res.set_header(k, v);
        }
        res.set_content(r.body, r.content_type);
    });
    srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    srv.Get("/schedule", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(BudgetSchedule::for_budgets(kDefaultBudgets).to_json(), "application/json");
    });
}

RenderServer::~RenderServer() {
    stop();
}

int RenderServer::bind(const std::string& host, int port) {
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool RenderServer::listen_after_bind() {
    return impl_->server.listen_after_bind();
}

void RenderServer::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
}

bool RenderServer::is_running() const {
    return impl_->server.is_running();
}

void RenderServer::wait_until_ready() const {
    impl_->server.wait_until_ready();
}

}  // namespace memocr
