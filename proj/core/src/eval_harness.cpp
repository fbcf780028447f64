#include "memocr/eval_harness.hpp"

#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace memocr {

using nlohmann::json;
using nlohmann::ordered_json;

MockClientFactory::MockClientFactory(EvidencePlacement placement, LegibilityModel legibility)
    : placement_(placement), legibility_(legibility) {}

std::unique_ptr<DrafterClient> MockClientFactory::make_drafter(const EvalInstance& instance) const {
    MockDrafterConfig cfg;
    cfg.evidence = instance.evidence;
    cfg.placement = placement_;
    return std::make_unique<MockDrafter>(std::move(cfg));
}

std::unique_ptr<ReaderClient> MockClientFactory::make_reader(const EvalInstance& instance) const {
    MockReaderConfig cfg;
    cfg.gold_candidates = instance.gold_answers;
    if (instance.detail_question) {
        cfg.question_candidates.emplace_back(*instance.detail_question, instance.detail_answers);
    }
    cfg.legibility = legibility_;
    return std::make_unique<MockReader>(std::move(cfg));
}

std::unique_ptr<DrafterClient> HttpClientFactory::make_drafter(const EvalInstance&) const {
    return std::make_unique<HttpDrafter>(cfg_);
}

std::unique_ptr<ReaderClient> HttpClientFactory::make_reader(const EvalInstance&) const {
    return std::make_unique<HttpReader>(cfg_);
}

Injection injection_from_string(std::string_view s) {
    if (s == "none") {
        return Injection::none;
    }
    if (s == "crucial") {
        return Injection::crucial;
    }
    if (s == "detailed") {
        return Injection::detailed;
    }
    throw FormatError("unknown injection '" + std::string(s) + "' (expected none|crucial|detailed)");
}

const char* to_string(Injection inj) {
    switch (inj) {
        case Injection::crucial:
            return "crucial";
        case Injection::detailed:
            return "detailed";
        case Injection::none:
            break;
    }
    return "none";
}

namespace {

struct InstanceOutcome {
    InstanceSummary summary;
    std::vector<EvalRecord> records;
};

std::string file_stem(std::string_view id) {
    std::string out;
    for (char c : id) {
        out.push_back(detail::is_word_char(c) || c == '-' || c == '_' ? c : '_');
    }
    return out.empty() ? "instance" : out;
}

InstanceOutcome run_instance(const EvalInstance& inst, const ClientFactory& factory, const SweepConfig& cfg) {
    InstanceOutcome out;
    out.summary.instance_id = inst.id;
    auto fail_all = [&](const std::string& msg) {
        out.summary.error = msg;
        for (int b : cfg.budgets) {
            EvalRecord r;
            r.instance_id = inst.id;
            r.dataset = inst.dataset;
            r.budget = b;
            r.error = msg;
            out.records.push_back(std::move(r));
        }
    };

    MemoryState memory;
    std::unique_ptr<ReaderClient> reader;
    try {
        const ContextStream stream = inst.chunks.empty()
                                         ? chunk_stream(inst.context, cfg.lifecycle.chunk_size, *cfg.lifecycle.tokenizer)
                                         : stream_from_chunks(inst.chunks, *cfg.lifecycle.tokenizer);
        auto drafter = factory.make_drafter(inst);
        reader = factory.make_reader(inst);
        auto lifecycle = run_lifecycle(stream, inst.question, *drafter, cfg.lifecycle);
        memory = std::move(lifecycle.final_state);
        out.summary.draft_calls = lifecycle.ledger.count(Stage::draft);
    } catch (const Error& e) {
        fail_all(e.what());
        return out;
    }

    if (cfg.injection != Injection::none) {
        const PriorityClass region =
            cfg.injection == Injection::crucial ? PriorityClass::crucial : PriorityClass::detailed;
        // Prepending reverses order, so walk crucial evidence backwards.
        if (region == PriorityClass::crucial) {
            for (auto it = inst.evidence.rbegin(); it != inst.evidence.rend(); ++it) {
                memory = inject_evidence(memory, region, *it);
            }
        } else {
            for (const auto& ev : inst.evidence) {
                memory = inject_evidence(memory, region, ev);
            }
        }
    }
    out.summary.memory_tokens = memory.token_count;

    const RenderedMemory rendered = render_memory(memory.rich_text, cfg.style, cfg.priority);
    for (int b : cfg.budgets) {
        EvalRecord r;
        r.instance_id = inst.id;
        r.dataset = inst.dataset;
        r.budget = b;
        try {
            const AnswerResult ans = answer_rendered(rendered, inst.question, b, *reader);
            r.predicted = ans.answer;
            r.matched = sem_match(ans.answer, inst.gold_answers);
            r.visual_tokens_used = ans.visual_tokens;
            r.scale_factor = ans.scale_factor;
            if (cfg.image_dump_dir) {
                write_png(ans.fitted, *cfg.image_dump_dir / (file_stem(inst.id) + "_B" + std::to_string(b) + ".png"));
            }
        } catch (const ClientError& e) {
            r.error = e.what();
        }
        out.records.push_back(std::move(r));
    }
    return out;
}

}  // namespace

const AccuracyRow* EvalReport::row(const std::string& dataset, int budget) const {
    for (const auto& r : accuracy) {
        if (r.dataset == dataset && r.budget == budget) {
            return &r;
        }
    }
    return nullptr;
}

double EvalReport::overall_accuracy(int budget) const {
    std::size_t n = 0;
    std::size_t correct = 0;
    for (const auto& r : records) {
        if (r.budget == budget) {
            ++n;
            correct += r.matched ? 1 : 0;
        }
    }
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

double relative_drop(double acc_b, double acc_ref) {
    if (acc_ref == 0.0) {
        throw UndefinedReference("relative drop is undefined for a zero reference accuracy");
    }
    return (acc_b - acc_ref) / acc_ref * 100.0;
}

void summarize(EvalReport& report) {
    std::vector<std::string> datasets;
    std::map<std::pair<std::string, int>, std::pair<std::size_t, std::size_t>> tally;
    for (const auto& r : report.records) {
        if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
            datasets.push_back(r.dataset);
        }
        auto& [n, c] = tally[{r.dataset, r.budget}];
        ++n;
        c += r.matched ? 1 : 0;
    }
    if (std::find(report.budgets.begin(), report.budgets.end(), kReferenceBudget) != report.budgets.end() ||
        report.budgets.empty()) {
        report.reference_budget = kReferenceBudget;
    } else {
        report.reference_budget = *std::max_element(report.budgets.begin(), report.budgets.end());
    }

    report.accuracy.clear();
    for (const auto& ds : datasets) {
        const auto ref_it = tally.find({ds, report.reference_budget});
        std::optional<double> ref_acc;
        if (ref_it != tally.end() && ref_it->second.first > 0) {
            ref_acc = static_cast<double>(ref_it->second.second) / static_cast<double>(ref_it->second.first);
        }
        for (int b : report.budgets) {
            AccuracyRow row;
            row.dataset = ds;
            row.budget = b;
            const auto it = tally.find({ds, b});
            if (it != tally.end()) {
                row.n = it->second.first;
                row.correct = it->second.second;
            }
            row.accuracy = row.n == 0 ? 0.0 : static_cast<double>(row.correct) / static_cast<double>(row.n);
            if (ref_acc && *ref_acc > 0.0) {
                row.relative_drop = b == report.reference_budget ? 0.0 : relative_drop(row.accuracy, *ref_acc);
            }
            report.accuracy.push_back(std::move(row));
        }
    }
}

EvalReport budget_sweep(const std::vector<EvalInstance>& instances, const ClientFactory& factory,
                        const SweepConfig& cfg) {
    if (instances.empty()) {
        throw PreconditionError("budget_sweep needs at least one instance");
    }
    if (cfg.budgets.empty()) {
        throw PreconditionError("budget_sweep needs at least one budget");
    }
    for (int b : cfg.budgets) {
        if (b < 1) {
            throw InvalidBudget("budget must be >= 1, got " + std::to_string(b));
        }
    }
    cfg.style.validate();
    if (cfg.image_dump_dir) {
        std::filesystem::create_directories(*cfg.image_dump_dir);
    }

    std::vector<InstanceOutcome> outcomes(instances.size());
    unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(instances.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < instances.size(); i = next++) {
            outcomes[i] = run_instance(instances[i], factory, cfg);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }

    EvalReport report;
    report.seed = cfg.seed;
    report.budgets = cfg.budgets;
    report.injection = to_string(cfg.injection);
    for (auto& o : outcomes) {
        if (!o.summary.error.empty()) {
            ++report.failed_instances;
        }
        report.instances.push_back(std::move(o.summary));
        report.records.insert(report.records.end(), std::make_move_iterator(o.records.begin()),
                              std::make_move_iterator(o.records.end()));
    }
    summarize(report);
    return report;
}

MemoryState inject_evidence(const MemoryState& memory, PriorityClass region, std::string_view evidence) {
    std::string ev;
    for (char c : detail::trim(evidence)) {
        ev.push_back(c == '\n' || c == '\r' ? ' ' : c);
    }
    std::string_view body = detail::trim(ev);
    if (region == PriorityClass::detailed) {
        // Keep it a plain paragraph even if it starts with block markup.
        while (!body.empty() && (body.front() == '#' || body.front() == '-' || body.front() == '*')) {
            body = detail::trim(body.substr(1));
        }
    }
    if (body.empty()) {
        throw PreconditionError("inject_evidence needs non-empty evidence");
    }
    MemoryState out = memory;
    const std::string current = normalize_source(memory.rich_text);
    if (region == PriorityClass::crucial) {
        out.rich_text = "# " + std::string(body) + (current.empty() ? "" : "\n\n" + current);
    } else {
        out.rich_text = current.empty() ? std::string(body) : current + "\n\n" + std::string(body);
    }
    out.token_count = default_tokenizer().count(out.rich_text);
    return out;
}

RegionPrecisionStats region_precision(const MemoryState& memory, const std::vector<std::string>& evidence,
                                      const PriorityConfig& cfg) {
    std::set<std::string> evidence_tokens;
    const auto& tok = default_tokenizer();
    for (const auto& e : evidence) {
        for (const auto& s : tok.spans(e)) {
            const std::string t = normalize_answer(std::string_view(e).substr(s.begin, s.end - s.begin));
            if (!t.empty()) {
                evidence_tokens.insert(t);
            }
        }
    }

    std::string crucial_text;
    std::string detailed_text;
    const SalienceTree tree = parse(normalize_source(memory.rich_text));
    for (const Block& b : tree.blocks) {
        for (const InlineSpan& s : b.spans) {
            std::string& target = priority_class(b, s, cfg) == PriorityClass::crucial ? crucial_text : detailed_text;
            // Span boundaries also separate tokens.
            target += s.text;
            target += '\n';
        }
    }

    auto tally = [&](const std::string& text) {
        RegionStats st;
        for (const auto& s : tok.spans(text)) {
            ++st.token_count;
            if (evidence_tokens.contains(normalize_answer(std::string_view(text).substr(s.begin, s.end - s.begin)))) {
                ++st.evidence_token_count;
            }
        }
        st.precision = st.token_count == 0
                           ? 0.0
                           : static_cast<double>(st.evidence_token_count) / static_cast<double>(st.token_count);
        return st;
    };
    return {tally(crucial_text), tally(detailed_text)};
}

TTestResult ttest_ind(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw DegenerateSamples("t-test needs at least 2 samples per group");
    }
    auto moments = [](std::span<const double> x) {
        double m = 0.0;
        for (double v : x) {
            m += v;
        }
        m /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) {
            ss += (v - m) * (v - m);
        }
        return std::pair{m, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = va / na;
    const double sb = vb / nb;
    const double se2 = sa + sb;
    if (!(se2 > 0.0) || !std::isfinite(se2)) {
        throw DegenerateSamples("t-test is undefined when both samples have zero variance");
    }
    TTestResult r;
    r.t = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t_distribution<double> dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t))));
    return r;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json j;
    j["schema_version"] = report.schema_version;
    j["seed"] = report.seed;
    j["budgets"] = report.budgets;
    j["reference_budget"] = report.reference_budget;
    j["injection"] = report.injection;
    j["failed_instances"] = report.failed_instances;
    j["skipped_lines"] = report.skipped_lines;
    auto acc = ordered_json::array();
    for (const auto& r : report.accuracy) {
        acc.push_back({{"dataset", r.dataset},
                       {"budget", r.budget},
                       {"n", r.n},
                       {"correct", r.correct},
                       {"accuracy", r.accuracy},
                       {"relative_drop", r.relative_drop ? ordered_json(*r.relative_drop) : ordered_json(nullptr)}});
    }
    j["accuracy"] = std::move(acc);
    auto inst = ordered_json::array();
    for (const auto& s : report.instances) {
        inst.push_back({{"id", s.instance_id},
                        {"draft_calls", s.draft_calls},
                        {"memory_tokens", s.memory_tokens},
                        {"error", s.error}});
    }
    j["instances"] = std::move(inst);
    auto recs = ordered_json::array();
    for (const auto& r : report.records) {
        recs.push_back({{"instance_id", r.instance_id},
                        {"dataset", r.dataset},
                        {"budget", r.budget},
                        {"predicted", r.predicted},
                        {"matched", r.matched},
                        {"visual_tokens_used", r.visual_tokens_used},
                        {"scale_factor", r.scale_factor},
                        {"error", r.error}});
    }
    j["records"] = std::move(recs);
    return j.dump(2);
}

EvalReport report_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        EvalReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw FormatError("unsupported report schema_version " + std::to_string(r.schema_version));
        }
        r.seed = j.at("seed").get<std::uint64_t>();
        r.budgets = j.at("budgets").get<std::vector<int>>();
        r.reference_budget = j.at("reference_budget").get<int>();
        r.injection = j.value("injection", std::string("none"));
        r.failed_instances = j.value("failed_instances", std::size_t{0});
        r.skipped_lines = j.value("skipped_lines", std::size_t{0});
        for (const auto& a : j.at("accuracy")) {
            AccuracyRow row;
            row.dataset = a.at("dataset").get<std::string>();
            row.budget = a.at("budget").get<int>();
            row.n = a.at("n").get<std::size_t>();
            row.correct = a.at("correct").get<std::size_t>();
            row.accuracy = a.at("accuracy").get<double>();
            if (!a.at("relative_drop").is_null()) {
                row.relative_drop = a["relative_drop"].get<double>();
            }
            r.accuracy.push_back(std::move(row));
        }
        for (const auto& s : j.at("instances")) {
            r.instances.push_back({s.at("id").get<std::string>(), s.at("draft_calls").get<std::size_t>(),
                                   s.at("memory_tokens").get<std::size_t>(), s.at("error").get<std::string>()});
        }
        for (const auto& e : j.at("records")) {
            EvalRecord rec;
            rec.instance_id = e.at("instance_id").get<std::string>();
            rec.dataset = e.at("dataset").get<std::string>();
            rec.budget = e.at("budget").get<int>();
            rec.predicted = e.at("predicted").get<std::string>();
            rec.matched = e.at("matched").get<bool>();
            rec.visual_tokens_used = e.at("visual_tokens_used").get<std::int64_t>();
            rec.scale_factor = e.at("scale_factor").get<double>();
            rec.error = e.at("error").get<std::string>();
            r.records.push_back(std::move(rec));
        }
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid report JSON: ") + e.what());
    }
}

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "dataset,budget,n,correct,accuracy,relative_drop_pct\n";
    out << std::fixed;
    for (const auto& r : report.accuracy) {
        out << r.dataset << ',' << r.budget << ',' << r.n << ',' << r.correct << ',' << std::setprecision(4)
            << r.accuracy * 100.0 << ',';
        if (r.relative_drop) {
            out << std::setprecision(1) << *r.relative_drop;
        }
        out << '\n';
    }
    return out.str();
}

void export_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [](const std::filesystem::path& p, const std::string& body) {
        std::ofstream out(p, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot open '" + p.string() + "' for writing");
        }
        out << body;
        if (!out) {
            throw std::runtime_error("write failed for '" + p.string() + "'");
        }
    };
    write(dir / "report.json", report_to_json(report));
    write(dir / "report.csv", report_to_csv(report));
}

}  // namespace memocr
