#include "cli.hpp"

#include <memocr/budget_control.hpp>
#include <memocr/errors.hpp>
#include <memocr/eval_harness.hpp>
#include <memocr/render_service.hpp>
#include <memocr/synthetic_suite.hpp>
#include <memocr/trainer_math.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace memocr::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Unreadable inputs map to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::vector<int> parse_budgets(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        std::size_t used = 0;
        int b = 0;
        try {
            b = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || b < 1) {
            throw InvalidBudget("bad budget '" + item + "'");
        }
        out.push_back(b);
    }
    if (out.empty()) {
        throw InvalidBudget("no budgets given");
    }
    return out;
}

std::vector<std::string> collect_evidence(const std::vector<std::string>& inline_ev, const std::string& file) {
    std::vector<std::string> ev = inline_ev;
    if (!file.empty()) {
        std::istringstream in(read_file(file));
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (!line.empty()) {
                ev.push_back(line);
            }
        }
    }
    return ev;
}

json box_json(const LayoutBox& b) {
    return {{"block_id", b.block_id}, {"text", b.text},       {"x", b.bbox.x},
            {"y", b.bbox.y},          {"w", b.bbox.w},        {"h", b.bbox.h},
            {"scale", b.scale},       {"bold", b.bold},       {"priority", to_string(b.priority)}};
}

RenderServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server != nullptr) {
        g_server->stop();
    }
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Visual memory renderer and evaluation tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "memocr 0.1.0");

    std::string style_name = "default";
    std::string priority_name = "default";
    app.add_option("--style", style_name, "Style preset (default|uniform)")->capture_default_str();
    app.add_option("--priority", priority_name, "Priority rule (default|h1-only)")->capture_default_str();

    // render
    auto* render = app.add_subcommand("render", "Render a Markdown memory to PNG");
    std::string render_in;
    std::string render_out;
    std::optional<std::int64_t> render_budget;
    bool render_layout = false;
    render->add_option("input", render_in, "Markdown file")->required();
    render->add_option("-o,--out", render_out, "PNG output path");
    render->add_option("-b,--budget", render_budget, "Visual-token budget");
    render->add_flag("--layout", render_layout, "Include layout boxes in the JSON output");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Budget sweep over an instance file");
    std::string sweep_in;
    std::string sweep_out = "report";
    std::string budgets_text = "16,64,256,1024";
    bool mock = false;
    std::string endpoint;
    std::string model;
    std::string placement = "heading";
    std::string inject_mode = "none";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string dump_dir;
    sweep->add_option("input", sweep_in, "Instances (JSON Lines)")->required();
    sweep->add_option("-o,--out", sweep_out, "Report directory")->capture_default_str();
    sweep->add_option("--budgets", budgets_text, "Comma-separated budgets")->capture_default_str();
    sweep->add_flag("--mock", mock, "Use the deterministic mock clients");
    sweep->add_option("--endpoint", endpoint, "Chat-completions base URL (or MEMOCR_ENDPOINT)");
    sweep->add_option("--model", model, "Model name (or MEMOCR_MODEL)");
    sweep->add_option("--placement", placement, "Mock drafter evidence placement (heading|body)")->capture_default_str();
    sweep->add_option("--inject", inject_mode, "Oracle injection (none|crucial|detailed)")->capture_default_str();
    sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
    sweep->add_option("--seed", seed, "Seed recorded in the report");
    sweep->add_option("--dump-images", dump_dir, "Directory for per-budget PNGs");

    // inject
    auto* inject = app.add_subcommand("inject", "Insert evidence into a memory");
    std::string inject_in;
    std::string inject_out;
    std::string inject_region = "crucial";
    std::vector<std::string> inject_ev;
    std::string inject_ev_file;
    inject->add_option("input", inject_in, "Markdown memory")->required();
    inject->add_option("--region", inject_region, "crucial|detailed")->capture_default_str();
    inject->add_option("-e,--evidence", inject_ev, "Evidence text (repeatable)");
    inject->add_option("--evidence-file", inject_ev_file, "One evidence item per line");
    inject->add_option("-o,--out", inject_out, "Output Markdown (default stdout)");

    // stats
    auto* stats = app.add_subcommand("stats", "Evidence precision per salience region");
    std::string stats_in;
    std::vector<std::string> stats_ev;
    std::string stats_ev_file;
    stats->add_option("input", stats_in, "Markdown memory")->required();
    stats->add_option("-e,--evidence", stats_ev, "Evidence text (repeatable)");
    stats->add_option("--evidence-file", stats_ev_file, "One evidence item per line");

    // advantage
    auto* adv = app.add_subcommand("advantage", "Group-relative advantages from rewards JSON");
    std::string adv_in;
    double w_std = 1.0;
    double w_augm = 0.7;
    double w_augq = 0.3;
    std::string norm_name = "std";
    adv->add_option("input", adv_in, "JSON {std:[...], augM:[...], augQ:[...]}")->required();
    adv->add_option("--w-std", w_std)->capture_default_str();
    adv->add_option("--w-augm", w_augm)->capture_default_str();
    adv->add_option("--w-augq", w_augq)->capture_default_str();
    adv->add_option("--normalization", norm_name, "std|mean")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP render service");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_bytes = RenderServiceConfig{}.max_markdown_bytes;
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--max-bytes", max_bytes, "Markdown size limit")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Write the synthetic instance suite");
    std::string synth_out;
    std::size_t synth_n = kSyntheticSuiteSize;
    std::uint64_t synth_seed = kSyntheticSuiteSeed;
    synth->add_option("-o,--out", synth_out, "Output JSON Lines")->required();
    synth->add_option("-n,--count", synth_n)->capture_default_str();
    synth->add_option("--seed", synth_seed)->capture_default_str();

    // schedule
    auto* schedule = app.add_subcommand("schedule", "Print the budget schedule as JSON");
    std::string schedule_budgets = "16,64,256,1024";
    schedule->add_option("--budgets", schedule_budgets)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        const StyleSheet style = StyleSheet::from_name(style_name);
        const PriorityConfig priority = PriorityConfig::from_name(priority_name);

        if (*render) {
            RenderRequest req;
            req.markdown = read_file(render_in);
            req.budget = render_budget;
            req.style = style;
            req.priority = priority;
            if (req.budget && *req.budget < 1) {
                throw InvalidBudget("budget must be >= 1");
            }
            const RenderOutput r = render_request(req);
            if (!render_out.empty()) {
                write_png(r.image, render_out);
            }
            json j = {{"width", r.image.width()},
                      {"height", r.image.height()},
                      {"visual_tokens", r.visual_tokens},
                      {"scale_factor", r.scale_factor},
                      {"content_hash", r.image.content_hash()}};
            if (render_budget) {
                j["budget"] = *render_budget;
            }
            if (render_layout) {
                j["boxes"] = json::array();
                for (const auto& b : r.layout.boxes) {
                    j["boxes"].push_back(box_json(b));
                }
            }
            out << j.dump() << '\n';
            return 0;
        }

        if (*sweep) {
            const InstanceFile file = parse_instances(read_file(sweep_in));
            for (const auto& [line, msg] : file.skipped) {
                err << "warning: " << sweep_in << ':' << line << ": skipped: " << msg << '\n';
            }
            SweepConfig cfg;
            cfg.budgets = parse_budgets(budgets_text);
            cfg.style = style;
            cfg.priority = priority;
            cfg.injection = injection_from_string(inject_mode);
            cfg.threads = threads;
            cfg.seed = seed;
            if (!dump_dir.empty()) {
                cfg.image_dump_dir = fs::path(dump_dir);
            }
            std::unique_ptr<ClientFactory> factory;
            if (mock) {
                factory = std::make_unique<MockClientFactory>(placement_from_string(placement));
            } else {
                HttpClientConfig hc;
                hc.endpoint = endpoint;
                hc.model = model;
                hc = hc.with_environment();
                if (hc.endpoint.empty()) {
                    err << "error: pass --mock or an endpoint (--endpoint or MEMOCR_ENDPOINT)\n";
                    return kExitUsage;
                }
                factory = std::make_unique<HttpClientFactory>(hc);
            }
            EvalReport report = budget_sweep(file.instances, *factory, cfg);
            report.skipped_lines = file.skipped.size();
            for (const auto& s : report.instances) {
                if (!s.error.empty()) {
                    err << "warning: instance " << s.instance_id << " failed: " << s.error << '\n';
                }
            }
            export_report(report, sweep_out);
            json summary = {{"instances", report.instances.size()},
                            {"failed_instances", report.failed_instances},
                            {"skipped_lines", report.skipped_lines},
                            {"report_dir", sweep_out},
                            {"accuracy", json::object()}};
            for (int b : report.budgets) {
                summary["accuracy"][std::to_string(b)] = report.overall_accuracy(b);
            }
            out << summary.dump() << '\n';
            const bool all_failed = report.instances.empty() || report.failed_instances == report.instances.size();
            return all_failed ? kExitFailure : 0;
        }

        if (*inject) {
            const std::string md = read_file(inject_in);
            const auto ev = collect_evidence(inject_ev, inject_ev_file);
            if (ev.empty()) {
                throw PreconditionError("no evidence given (--evidence or --evidence-file)");
            }
            const PriorityClass region = priority_from_string(inject_region);
            MemoryState m{0, md, default_tokenizer().count(md)};
            // Later items end up nearer the region's insertion point, so crucial walks backwards.
            if (region == PriorityClass::crucial) {
                for (auto it = ev.rbegin(); it != ev.rend(); ++it) {
                    m = inject_evidence(m, region, *it);
                }
            } else {
                for (const auto& e : ev) {
                    m = inject_evidence(m, region, e);
                }
            }
            if (inject_out.empty()) {
                out << m.rich_text << '\n';
            } else {
                write_file(inject_out, m.rich_text + "\n");
            }
            return 0;
        }

        if (*stats) {
            const std::string md = read_file(stats_in);
            const auto ev = collect_evidence(stats_ev, stats_ev_file);
            const MemoryState m{0, md, default_tokenizer().count(md)};
            const RegionPrecisionStats s = region_precision(m, ev, priority);
            auto region = [](const RegionStats& r) {
                return json{{"tokens", r.token_count}, {"evidence_tokens", r.evidence_token_count}, {"precision", r.precision}};
            };
            out << json{{"crucial", region(s.crucial)}, {"detailed", region(s.detailed)}}.dump() << '\n';
            return 0;
        }

        if (*adv) {
            const RolloutGroup group = rollout_group_from_json(read_file(adv_in));
            std::map<TaskId, double> weights;
            const std::map<TaskId, double> all = {{TaskId::standard, w_std},
                                                  {TaskId::augmented_memory, w_augm},
                                                  {TaskId::augmented_question, w_augq}};
            for (const auto& [id, w] : all) {
                if (group.rewards.contains(id)) {
                    weights[id] = w;
                }
            }
            const AdvantageSet set = compute_advantages(group, weights, normalization_from_string(norm_name));
            out << advantage_set_to_json(set, weights) << '\n';
            return 0;
        }

        if (*serve) {
            RenderServiceConfig sc;
            sc.max_markdown_bytes = max_bytes;
            RenderServer server(sc);
            const int bound = server.bind(host, port);
            if (bound < 0) {
                err << "error: cannot bind " << host << ':' << port << '\n';
                return kExitFailure;
            }
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            err << "listening on http://" << host << ':' << bound << '\n';
            const bool ok = server.listen_after_bind();
            g_server = nullptr;
            return ok ? 0 : kExitFailure;
        }

        if (*synth) {
            write_instances(make_synthetic_suite(synth_n, synth_seed), synth_out);
            out << json{{"instances", synth_n}, {"seed", synth_seed}, {"out", synth_out}}.dump() << '\n';
            return 0;
        }

        if (*schedule) {
            out << BudgetSchedule::for_budgets(parse_budgets(schedule_budgets)).to_json() << '\n';
            return 0;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("memocr");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) {
        argv.push_back(s.data());
    }
    argv.push_back(nullptr);
    return run(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace memocr::cli
