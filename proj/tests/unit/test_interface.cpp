#include <cli.hpp>
#include <memocr/errors.hpp>
#include <memocr/eval_harness.hpp>
#include <memocr/render_service.hpp>
#include <memocr/synthetic_suite.hpp>

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <test_support.hpp>

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

using namespace memocr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream(p, std::ios::binary) << s;
}

std::string long_memory() {
    std::string md = "# Release notes\n\n";
    for (int i = 0; i < 40; ++i) {
        md += "Entry " + std::to_string(i) + " covers routine maintenance of the archive index.\n\n";
    }
    return md;
}

std::vector<std::uint8_t> base64_decode(std::string_view s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    unsigned acc = 0;
    int bits = 0;
    for (char c : s) {
        const int v = val(c);
        if (v < 0) {
            continue;
        }
        acc = (acc << 6) | static_cast<unsigned>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

std::string header(const HttpResponse& r, const std::string& key) {
    for (const auto& [k, v] : r.headers) {
        if (k == key) {
            return v;
        }
    }
    return {};
}

// Runs a server on a background thread for the lifetime of the object.
class LiveRenderServer {
public:
    explicit LiveRenderServer(RenderServiceConfig cfg = {}) : server_(cfg) {
        port_ = server_.bind("127.0.0.1", 0);
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LiveRenderServer() {
        server_.stop();
        thread_.join();
    }
    int port() const { return port_; }

private:
    RenderServer server_;
    int port_ = -1;
    std::thread thread_;
};

// Minimal chat-completions endpoint that records request bodies.
class FakeChatServer {
public:
    explicit FakeChatServer(std::string reply, int status = 200) {
        srv_.Post("/v1/chat/completions", [this, reply, status](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lock(mu_);
                bodies_.push_back(req.body);
                auth_.push_back(req.get_header_value("Authorization"));
            }
            res.status = status;
            res.set_content(json{{"choices", json::array({{{"message", {{"content", reply}}}}})}}.dump(),
                            "application/json");
        });
        port_ = srv_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { srv_.listen_after_bind(); });
        srv_.wait_until_ready();
    }
    ~FakeChatServer() {
        srv_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
    std::vector<std::string> bodies() {
        std::lock_guard<std::mutex> lock(mu_);
        return bodies_;
    }
    std::vector<std::string> auth() {
        std::lock_guard<std::mutex> lock(mu_);
        return auth_;
    }

private:
    httplib::Server srv_;
    int port_ = -1;
    std::thread thread_;
    std::mutex mu_;
    std::vector<std::string> bodies_;
    std::vector<std::string> auth_;
};

}  // namespace

TEST_CASE("cli render") {
    const auto dir = testsupport::scratch("cli_render");
    const auto md = dir / "memory.md";
    write_text(md, long_memory());

    const auto small = run_cli({"render", md.string(), "-b", "16", "-o", (dir / "m16.png").string()});
    REQUIRE(small.code == 0);
    const auto js = json::parse(small.out);
    CHECK(js["visual_tokens"].get<int>() <= 16);
    CHECK(js["budget"] == 16);
    CHECK(js["scale_factor"].get<double>() < 1.0);
    const auto png = read_png(dir / "m16.png");
    CHECK(visual_token_count(png) <= 16);
    CHECK(png.content_hash() == js["content_hash"]);

    const auto full = run_cli({"render", md.string()});
    REQUIRE(full.code == 0);
    const auto jf = json::parse(full.out);
    CHECK(jf["scale_factor"] == 1.0);
    CHECK(jf["width"] == 768);
    CHECK_FALSE(jf.contains("budget"));
    const auto rendered = render_memory(long_memory());
    CHECK(jf["height"] == rendered.image.height());
    CHECK(jf["content_hash"] == rendered.image.content_hash());

    CHECK(run_cli({"render", (dir / "missing.md").string()}).code == 2);
    CHECK(run_cli({"render", md.string(), "-b", "0"}).code == 1);
    CHECK(run_cli({"render", md.string(), "-b", "lots"}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"--style", "uniform", "render", md.string()}).code == 0);
    CHECK(run_cli({"--style", "gothic", "render", md.string()}).code != 0);
}

TEST_CASE("cli sweep") {
    const auto dir = testsupport::scratch("cli_sweep");
    const auto in = dir / "suite.jsonl";
    std::string text;
    for (const auto& inst : make_synthetic_suite(4, 3)) {
        text += instance_to_json_line(inst) + "\n";
    }
    text += "{\"broken\": \n";
    write_text(in, text);

    const auto a = run_cli({"sweep", in.string(), "--mock", "--budgets", "16", "-o", (dir / "a").string()});
    REQUIRE(a.code == 0);
    const auto summary = json::parse(a.out);
    CHECK(summary["instances"] == 4);
    CHECK(summary["skipped_lines"] == 1);
    CHECK(a.err.find(":5:") != std::string::npos);
    std::istringstream csv(testsupport::slurp(dir / "a" / "report.csv"));
    std::vector<std::string> lines;
    for (std::string l; std::getline(csv, l);) {
        if (!l.empty()) {
            lines.push_back(l);
        }
    }
    REQUIRE(lines.size() == 2);
    CHECK(lines[1].rfind("synthetic,16,4,", 0) == 0);
    const auto report = report_from_json(testsupport::slurp(dir / "a" / "report.json"));
    CHECK(report.skipped_lines == 1);
    CHECK(report.budgets == std::vector<int>{16});

    const auto b = run_cli({"sweep", in.string(), "--mock", "--budgets", "16", "-o", (dir / "b").string()});
    REQUIRE(b.code == 0);
    CHECK(testsupport::slurp(dir / "a" / "report.json") == testsupport::slurp(dir / "b" / "report.json"));
    CHECK(testsupport::slurp(dir / "a" / "report.csv") == testsupport::slurp(dir / "b" / "report.csv"));

    CHECK(run_cli({"sweep", (dir / "nope.jsonl").string(), "--mock"}).code == 2);
    CHECK(run_cli({"sweep", in.string(), "--mock", "--budgets", "16,x"}).code != 0);
    ::unsetenv("MEMOCR_ENDPOINT");
    CHECK(run_cli({"sweep", in.string()}).code == 2);

    const auto inj = run_cli({"sweep", in.string(), "--mock", "--placement", "body", "--inject", "crucial", "--budgets",
                          "16", "-o", (dir / "c").string()});
    REQUIRE(inj.code == 0);
    CHECK(json::parse(inj.out)["accuracy"]["16"] == 1.0);
}

TEST_CASE("cli advantage") {
    const auto dir = testsupport::scratch("cli_adv");
    const auto in = dir / "rewards.json";
    write_text(in, R"({"std": [1, 0], "augM": [0, 1], "augQ": [1, 1]})");
    const auto r = run_cli({"advantage", in.string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    // std -> [1, -1], augM -> [-1, 1], augQ -> [0, 0] (no spread);
    // (1*[1,-1] + 0.7*[-1,1] + 0.3*[0,0]) / 2.0
    REQUIRE(j["aggregated"].size() == 2);
    CHECK(j["aggregated"][0].get<double>() == doctest::Approx(0.15));
    CHECK(j["aggregated"][1].get<double>() == doctest::Approx(-0.15));
    CHECK(j["per_task"]["std"][0].get<double>() == doctest::Approx(1.0));
    CHECK(j["weights"]["augQ"].get<double>() == doctest::Approx(0.3));

    write_text(in, R"({"std": [1]})");
    CHECK(run_cli({"advantage", in.string()}).code == 1);
    write_text(in, "not json");
    CHECK(run_cli({"advantage", in.string()}).code != 0);
}

TEST_CASE("cli stats, inject, schedule, synth") {
    const auto dir = testsupport::scratch("cli_misc");
    const auto md = dir / "m.md";
    write_text(md, "# Tour dates\n\nThe band played in Lisbon.");

    const auto s = run_cli({"stats", md.string(), "-e", "Avery Ashdown composed it"});
    REQUIRE(s.code == 0);
    const auto js = json::parse(s.out);
    CHECK(js["crucial"]["evidence_tokens"] == 0);
    CHECK(js["crucial"]["precision"] == 0.0);
    CHECK(js["detailed"]["precision"] == 0.0);
    CHECK(js["detailed"]["tokens"] == 5);

    const auto injected = dir / "inj.md";
    REQUIRE(run_cli({"inject", md.string(), "--region", "crucial", "-e", "Avery Ashdown composed it", "-o",
                 injected.string()})
                .code == 0);
    const auto lay = run_cli({"render", injected.string(), "--layout"});
    REQUIRE(lay.code == 0);
    const auto boxes = json::parse(lay.out)["boxes"];
    REQUIRE_FALSE(boxes.empty());
    CHECK(boxes[0]["text"] == "Avery Ashdown composed it");
    CHECK(boxes[0]["priority"] == "crucial");
    CHECK(boxes[0]["scale"] == 2.0);

    const auto s2 = run_cli({"stats", injected.string(), "-e", "Avery Ashdown composed it"});
    CHECK(json::parse(s2.out)["crucial"]["precision"].get<double>() > 0.5);
    CHECK(run_cli({"inject", md.string()}).code == 1);

    const auto sch = json::parse(run_cli({"schedule", "--budgets", "16,64"}).out);
    CHECK(sch["rows"].size() == 2);

    const auto synth = dir / "s.jsonl";
    REQUIRE(run_cli({"synth", "-o", synth.string(), "-n", "5"}).code == 0);
    CHECK(read_instances(synth).instances.size() == 5);
}

TEST_CASE("handle_render rejects bad requests") {
    CHECK(handle_render("{").status == 400);
    CHECK(handle_render("[]").status == 400);
    CHECK(handle_render(R"({"budget": 16})").status == 400);
    CHECK(handle_render(R"({"markdown": 5})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "budget": 0})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "budget": 2.5})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "budget": "16"})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "style": {"canvas_width": 100000}})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "style": {"scales": {"h1": 40}}})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "style": {"scales": {"h9": 1}}})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "style": {"preset": "gothic"}})").status == 400);
    CHECK(handle_render(R"({"markdown": "x", "priority": "random"})").status == 400);
    const auto bad = handle_render("{");
    CHECK(bad.content_type == "application/json");
    CHECK(json::parse(bad.body).contains("error"));

    RenderServiceConfig cfg;
    cfg.max_markdown_bytes = 100;
    const json big = {{"markdown", std::string(101, 'a')}};
    CHECK(handle_render(big.dump(), cfg).status == 413);
    const json fits = {{"markdown", std::string(100, 'a')}};
    CHECK(handle_render(fits.dump(), cfg).status == 200);
}

TEST_CASE("handle_render returns the fitted PNG and is replayable") {
    const json req = {{"markdown", long_memory()}, {"budget", 64}};
    const auto a = handle_render(req.dump());
    REQUIRE(a.status == 200);
    CHECK(a.content_type == "image/png");
    const auto img = decode_png(std::span(reinterpret_cast<const std::uint8_t*>(a.body.data()), a.body.size()));
    CHECK(visual_token_count(img) <= 64);
    CHECK(std::stoll(header(a, "X-Visual-Tokens")) == visual_token_count(img));
    CHECK(header(a, "X-Image-Size") == std::to_string(img.width()) + "x" + std::to_string(img.height()));
    CHECK(std::stod(header(a, "X-Scale-Factor")) < 1.0);

    RenderRequest rr;
    rr.markdown = long_memory();
    rr.budget = 64;
    CHECK(render_request(rr).image == img);

    const auto b = handle_render(req.dump());
    CHECK(a.body == b.body);
    CHECK(a.headers == b.headers);

    const auto free = handle_render(json{{"markdown", long_memory()}}.dump());
    REQUIRE(free.status == 200);
    CHECK(std::stod(header(free, "X-Scale-Factor")) == 1.0);
}

TEST_CASE("live render server") {
    LiveRenderServer server;
    httplib::Client client("127.0.0.1", server.port());
    const auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body)["status"] == "ok");

    const auto sched = client.Get("/schedule");
    REQUIRE(sched);
    CHECK(json::parse(sched->body)["rows"].size() == 4);

    const json req = {{"markdown", long_memory()}, {"budget", 16}};
    const auto res = client.Post("/render", req.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "image/png");
    CHECK(std::stoll(res->get_header_value("X-Visual-Tokens")) <= 16);
    const auto direct = handle_render(req.dump());
    CHECK(res->body == direct.body);

    const auto bad = client.Post("/render", "nope", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    CHECK(client.Get("/missing")->status == 404);
}

TEST_CASE("http clients talk to a chat-completions endpoint") {
    FakeChatServer chat("\\boxed{Avery Ashdown}");
    HttpClientConfig cfg;
    cfg.endpoint = chat.endpoint();
    cfg.model = "test-model";
    cfg.api_key = "k123";

    HttpDrafter drafter(cfg);
    const std::string prompt = build_draft_prompt("Who?", "chunk", "");
    const DraftRequest dreq{1, "", "chunk", "Who?", prompt};
    CHECK(drafter.draft(dreq) == "\\boxed{Avery Ashdown}");

    const auto rendered = render_memory("# Avery Ashdown wrote it");
    const auto fit = fit_to_budget(rendered.image, 16);
    const std::string rprompt = build_read_prompt("Who?");
    HttpReader reader(cfg);
    const ReadRequest rreq{fit.image, rendered.layout, fit.scale_factor, "Who?", rprompt};
    CHECK(reader.read(rreq) == "\\boxed{Avery Ashdown}");

    const auto bodies = chat.bodies();
    REQUIRE(bodies.size() == 2);
    const auto d = json::parse(bodies[0]);
    CHECK(d["model"] == "test-model");
    CHECK(d["messages"][0]["content"] == prompt);
    const auto r = json::parse(bodies[1]);
    const auto& parts = r["messages"][0]["content"];
    REQUIRE(parts.size() == 2);
    const std::string url = parts[0]["image_url"]["url"];
    const std::string prefix = "data:image/png;base64,";
    REQUIRE(url.rfind(prefix, 0) == 0);
    CHECK(decode_png(base64_decode(url.substr(prefix.size()))) == fit.image);
    CHECK(parts[1]["text"] == rprompt);
    CHECK(chat.auth()[0] == "Bearer k123");
}

TEST_CASE("http client failures surface as ClientError") {
    FakeChatServer failing("oops", 500);
    HttpClientConfig cfg;
    cfg.endpoint = failing.endpoint();
    HttpDrafter drafter(cfg);
    const DraftRequest req{1, "", "c", "q", "p"};
    CHECK_THROWS_AS(drafter.draft(req), ClientError);

    HttpClientConfig none;
    CHECK_THROWS_AS(HttpDrafter(none).draft(req), ClientError);

    HttpClientConfig closed;
    closed.endpoint = "http://127.0.0.1:1";
    closed.timeout_seconds = 2;
    CHECK_THROWS_AS(HttpDrafter(closed).draft(req), ClientError);
}

TEST_CASE("sweep over HTTP clients") {
    FakeChatServer chat("# noted");
    HttpClientConfig cfg;
    cfg.endpoint = chat.endpoint();
    SweepConfig sc;
    sc.budgets = {16, 64};
    const auto suite = make_synthetic_suite(2, 8);
    const auto report = budget_sweep(suite, HttpClientFactory(cfg), sc);
    CHECK(report.failed_instances == 0);
    CHECK(report.records.size() == 4);
    // 3 draft calls plus one read per budget, per instance.
    CHECK(chat.bodies().size() == 2 * (3 + 2));
    CHECK(report.overall_accuracy(64) == 0.0);
}
