#include <memocr/errors.hpp>
#include <memocr/eval_harness.hpp>
#include <memocr/synthetic_suite.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>
#include <test_support.hpp>

#include <cmath>
#include <sstream>

using namespace memocr;

namespace {

// Student t density integrated with composite Simpson; two-sided tail.
double t_two_sided_p(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
    auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const double hi = std::fabs(t);
    const int n = 200000;
    const double h = hi / n;
    double s = pdf(0) + pdf(hi);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4 : 2) * pdf(i * h);
    }
    const double central = s * h / 3;  // integral over [0, |t|]
    return 1.0 - 2.0 * central;
}

std::vector<EvalInstance> small_suite(std::size_t n) {
    return make_synthetic_suite(n, 5);
}

class BrokenDrafter final : public DrafterClient {
public:
    std::string draft(const DraftRequest&) override { throw ClientError("offline"); }
};

// Mock clients, except instance "bad" whose drafter always fails.
class PartlyBrokenFactory final : public ClientFactory {
public:
    std::unique_ptr<DrafterClient> make_drafter(const EvalInstance& inst) const override {
        if (inst.id == "bad") {
            return std::make_unique<BrokenDrafter>();
        }
        return mock_.make_drafter(inst);
    }
    std::unique_ptr<ReaderClient> make_reader(const EvalInstance& inst) const override {
        return mock_.make_reader(inst);
    }

private:
    MockClientFactory mock_;
};

}  // namespace

TEST_CASE("sem_match and extract_boxed") {
    CHECK(sem_match("\\boxed{Gene MacLellan}", {"Gene MacLellan"}));
    CHECK(sem_match("gene  maclellan.", {"Gene MacLellan"}));
    CHECK_FALSE(sem_match("Greg Brown", {"Gene MacLellan"}));
    CHECK_FALSE(sem_match("", {"Gene MacLellan"}));
    CHECK(sem_match("The writer was Gene MacLellan of Toronto", {"Gene MacLellan"}));
    // Boxed content wins over surrounding text.
    CHECK_FALSE(sem_match("Gene MacLellan? no: \\boxed{Greg Brown}", {"Gene MacLellan"}));

    CHECK(extract_boxed("so \\boxed{42}") == "42");
    CHECK_FALSE(extract_boxed("no marker").has_value());
    CHECK(extract_boxed("\\boxed{a{b}c}") == "a{b}c");
    CHECK(extract_boxed("\\boxed{1} then \\boxed{2}") == "2");
    CHECK_FALSE(extract_boxed("\\boxed{open").has_value());
    CHECK(boxed("x") == "\\boxed{x}");
}

TEST_CASE("sem_match is invariant to case and surrounding punctuation") {
    const std::vector<std::string> gold = {"Avery Ashdown"};
    for (const char* p : {"avery ashdown", "AVERY ASHDOWN", "\"Avery Ashdown!\"", "(avery ashdown).", "...Avery Ashdown"}) {
        CAPTURE(p);
        CHECK(sem_match(p, gold));
        CHECK(sem_match(boxed(p), gold));
    }
    CHECK(normalize_answer("  A,  b.C ") == "a bc");
}

TEST_CASE("relative_drop") {
    CHECK(std::abs(relative_drop(62.2, 74.6) - (-16.6)) <= 0.05);
    CHECK(std::abs(relative_drop(55.0, 61.3) - (-10.3)) <= 0.05);
    CHECK(relative_drop(0.5, 0.5) == 0.0);
    CHECK_THROWS_AS(relative_drop(0.5, 0.0), UndefinedReference);
    for (const auto& [a, b] : {std::pair{62.2, 74.6}, {55.0, 61.3}, {0.1, 0.9}, {1.0, 0.25}}) {
        const double d = relative_drop(a, b);
        CHECK(std::abs(b * (1 + d / 100) - a) <= 1e-9);
    }
}

TEST_CASE("t-test") {
    const std::vector<double> same = {1.0, 2.0, 3.0};
    CHECK(std::abs(ttest_ind(same, same).p - 1.0) <= 1e-9);

    const std::vector<double> a = {74.2, 74.6, 75.0};
    const std::vector<double> b = {66.9, 67.8, 68.7};
    CHECK(ttest_ind(a, b).p < 0.05);

    const std::vector<double> x = {19.1, 20.3, 18.7, 21.0, 20.5};
    const std::vector<double> y = {17.2, 18.0, 16.9, 18.8, 17.5};
    const auto r = ttest_ind(x, y);
    CHECK(r.t == doctest::Approx(4.0774).epsilon(1e-4));
    CHECK(std::abs(r.p - t_two_sided_p(r.t, r.df)) <= 1e-3);
    CHECK(std::abs(r.p - t_two_sided_p(r.t, r.df)) <= 1e-8);
    CHECK(ttest_ind(y, x).t == doctest::Approx(-r.t));

    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(ttest_ind(one, a), DegenerateSamples);
    const std::vector<double> c1 = {2.0, 2.0};
    const std::vector<double> c2 = {3.0, 3.0};
    CHECK_THROWS_AS(ttest_ind(c1, c2), DegenerateSamples);
}

TEST_CASE("inject_evidence") {
    const MemoryState m{2, "# Band\n\nSome body.", 4};
    const auto c = inject_evidence(m, PriorityClass::crucial, "Avery Ashdown wrote it");
    const auto tc = parse(c.rich_text);
    REQUIRE(tc.blocks.size() == 3);
    CHECK(tc.blocks[0].is_heading(1));
    CHECK(tc.blocks[0].plain_text() == "Avery Ashdown wrote it");
    CHECK(c.step == 2);

    const auto d = inject_evidence(m, PriorityClass::detailed, "# Avery Ashdown wrote it");
    const auto td = parse(d.rich_text);
    CHECK(td.blocks.back().kind == BlockKind::paragraph);
    CHECK(td.blocks.back().plain_text() == "Avery Ashdown wrote it");

    CHECK(parse(inject_evidence({}, PriorityClass::crucial, "x").rich_text).blocks.size() == 1);
    CHECK(parse(inject_evidence({}, PriorityClass::detailed, "x").rich_text).blocks.size() == 1);
    CHECK_THROWS_AS(inject_evidence(m, PriorityClass::detailed, "  # "), PreconditionError);
}

TEST_CASE("region_precision on a hand-tallied fixture") {
    // 30 whitespace tokens: H1 (4), bold (1) and H2 (2) are crucial by default;
    // the remaining 23 are body text.
    const std::string md =
        "# Gene MacLellan wrote Snowbird\n\n"
        "Anne Murray recorded **Snowbird** in 1970 and it became a hit single across Canada.\n\n"
        "## Chart history\n\n"
        "The single topped the adult contemporary chart for several weeks.";
    const std::vector<std::string> ev = {"Gene MacLellan wrote Snowbird", "Anne Murray recorded Snowbird in 1970"};
    // The two heading markers are the only non-span tokens.
    REQUIRE(default_tokenizer().count(md) == 32);
    const MemoryState m{1, md, 32};

    const auto s = region_precision(m, ev);
    CHECK(s.crucial.token_count == 7);
    CHECK(s.crucial.evidence_token_count == 5);
    CHECK(s.crucial.precision == doctest::Approx(5.0 / 7.0));
    CHECK(s.detailed.token_count == 23);
    CHECK(s.detailed.evidence_token_count == 5);
    CHECK(s.detailed.precision == doctest::Approx(5.0 / 23.0));

    const auto p = region_precision(m, ev, PriorityConfig::h1_only());
    CHECK(p.crucial.token_count == 4);
    CHECK(p.crucial.precision == 1.0);
    CHECK(p.detailed.token_count == 26);
    CHECK(p.detailed.evidence_token_count == 6);
    CHECK(p.crucial.token_count + p.detailed.token_count == 30);
}

TEST_CASE("region_precision trivial cases") {
    const MemoryState exact{1, "# alpha beta", 3};
    CHECK(region_precision(exact, {"alpha beta"}).crucial.precision == 1.0);
    const MemoryState none{1, "# one\n\ntwo three", 4};
    const auto s = region_precision(none, {"zebra"});
    CHECK(s.crucial.precision == 0.0);
    CHECK(s.detailed.precision == 0.0);
    const auto e = region_precision(MemoryState{}, {"zebra"});
    CHECK(e.crucial.token_count == 0);
    CHECK(e.detailed.precision == 0.0);
}

TEST_CASE("region_precision partition holds on the synthetic memories") {
    const auto suite = small_suite(10);
    for (const auto& inst : suite) {
        MockDrafterConfig dc;
        dc.evidence = inst.evidence;
        std::string mem;
        for (const auto& c : inst.chunks) {
            mem = mock_draft(mem, c, inst.question, dc);
        }
        const MemoryState m{3, mem, default_tokenizer().count(mem)};
        const auto s = region_precision(m, inst.evidence);
        std::size_t span_tokens = 0;
        for (const auto& b : parse(mem).blocks) {
            for (const auto& sp : b.spans) {
                span_tokens += default_tokenizer().count(sp.text);
            }
        }
        CHECK(s.crucial.token_count + s.detailed.token_count == span_tokens);
        CHECK(s.crucial.precision > s.detailed.precision);
    }
}

TEST_CASE("budget_sweep: one instance, one budget") {
    SweepConfig cfg;
    cfg.budgets = {64};
    const auto suite = small_suite(1);
    const auto r = budget_sweep(suite, MockClientFactory{}, cfg);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].budget == 64);
    CHECK(r.records[0].visual_tokens_used <= 64);
    REQUIRE(r.instances.size() == 1);
    CHECK(r.instances[0].draft_calls == suite[0].chunks.size());
    CHECK(r.reference_budget == 64);
    REQUIRE(r.accuracy.size() == 1);
    CHECK(r.accuracy[0].relative_drop == 0.0);
}

TEST_CASE("budget_sweep: body memories lose accuracy monotonically as B shrinks") {
    SweepConfig cfg;
    cfg.threads = 4;
    const auto suite = small_suite(20);
    const auto r = budget_sweep(suite, MockClientFactory{EvidencePlacement::body}, cfg);
    CHECK(r.records.size() == suite.size() * 4);
    double prev = 2.0;
    for (int b : {1024, 256, 64, 16}) {
        const double acc = r.overall_accuracy(b);
        CHECK(acc <= prev);
        prev = acc;
    }
    CHECK(r.overall_accuracy(16) < r.overall_accuracy(1024));
    for (const auto& s : r.instances) {
        CHECK(s.draft_calls == 3);
    }
    for (const auto& rec : r.records) {
        CHECK(rec.visual_tokens_used <= rec.budget);
    }
    const AccuracyRow* ref = r.row("synthetic", 1024);
    REQUIRE(ref != nullptr);
    CHECK(ref->relative_drop == 0.0);
}

TEST_CASE("budget_sweep: oracle ordering") {
    const auto suite = small_suite(20);
    SweepConfig crucial;
    crucial.injection = Injection::crucial;
    SweepConfig detailed;
    detailed.injection = Injection::detailed;
    const MockClientFactory factory{EvidencePlacement::body};
    const auto rc = budget_sweep(suite, factory, crucial);
    const auto rd = budget_sweep(suite, factory, detailed);
    for (int b : kDefaultBudgets) {
        CHECK(rc.overall_accuracy(b) >= rd.overall_accuracy(b));
    }
    CHECK(rc.overall_accuracy(16) > rd.overall_accuracy(16));
    CHECK(rc.injection == "crucial");
}

TEST_CASE("budget_sweep is independent of thread count") {
    const auto suite = small_suite(12);
    SweepConfig one;
    one.threads = 1;
    SweepConfig many;
    many.threads = 6;
    const auto a = budget_sweep(suite, MockClientFactory{}, one);
    const auto b = budget_sweep(suite, MockClientFactory{}, many);
    CHECK(a == b);
    CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("budget_sweep records per-instance failures") {
    auto suite = small_suite(3);
    suite[1].id = "bad";
    const auto r = budget_sweep(suite, PartlyBrokenFactory{});
    CHECK(r.failed_instances == 1);
    CHECK_FALSE(r.instances[1].error.empty());
    std::size_t failed_records = 0;
    for (const auto& rec : r.records) {
        if (rec.instance_id == "bad") {
            CHECK_FALSE(rec.matched);
            CHECK_FALSE(rec.error.empty());
            ++failed_records;
        }
    }
    CHECK(failed_records == 4);
}

TEST_CASE("budget_sweep argument checks") {
    SweepConfig cfg;
    CHECK_THROWS_AS(budget_sweep({}, MockClientFactory{}, cfg), PreconditionError);
    cfg.budgets = {0};
    CHECK_THROWS_AS(budget_sweep(small_suite(1), MockClientFactory{}, cfg), InvalidBudget);
}

TEST_CASE("image dumps") {
    const auto dir = testsupport::scratch("dumps");
    SweepConfig cfg;
    cfg.budgets = {16, 256};
    cfg.image_dump_dir = dir;
    const auto suite = small_suite(2);
    budget_sweep(suite, MockClientFactory{}, cfg);
    for (const auto& inst : suite) {
        for (int b : cfg.budgets) {
            const auto p = dir / (inst.id + "_B" + std::to_string(b) + ".png");
            REQUIRE(std::filesystem::exists(p));
            CHECK(visual_token_count(read_png(p)) <= b);
        }
    }
}

TEST_CASE("report export: round trip, CSV shape, empty report") {
    auto suite = small_suite(4);
    suite[0].dataset = "alpha";
    suite[1].dataset = "alpha";
    SweepConfig cfg;
    cfg.seed = 99;
    cfg.budgets = {16, 64, 1024};
    const auto r = budget_sweep(suite, MockClientFactory{}, cfg);
    CHECK(r.seed == 99);

    const auto dir = testsupport::scratch("report");
    export_report(r, dir);
    const auto back = report_from_json(testsupport::slurp(dir / "report.json"));
    CHECK(back == r);

    std::istringstream csv(testsupport::slurp(dir / "report.csv"));
    std::string line;
    std::size_t rows = 0;
    std::getline(csv, line);
    CHECK(line == "dataset,budget,n,correct,accuracy,relative_drop_pct");
    while (std::getline(csv, line)) {
        if (!line.empty()) {
            ++rows;
        }
    }
    CHECK(rows == cfg.budgets.size() * 2);

    const EvalReport empty;
    const auto j = nlohmann::json::parse(report_to_json(empty));
    CHECK(j["records"].empty());
    CHECK(j["schema_version"] == 1);
    CHECK(report_from_json(report_to_json(empty)) == empty);
    CHECK_THROWS_AS(report_from_json("{}"), FormatError);
}

TEST_CASE("instance files") {
    const auto suite = small_suite(3);
    std::string text;
    for (const auto& i : suite) {
        text += instance_to_json_line(i) + "\n";
    }
    text += "{not json\n\n";
    text += R"({"schema_version":1,"id":"x","question":"q","gold_answers":[],"context":"c"})" "\n";
    const auto parsed = parse_instances(text);
    CHECK(parsed.instances.size() == 3);
    CHECK(parsed.skipped.size() == 2);
    CHECK(parsed.skipped[0].first == 4);
    CHECK(instance_to_json_line(parsed.instances[2]) == instance_to_json_line(suite[2]));

    const auto shipped = read_instances(testsupport::source_dir() / "data" / "synthetic_suite.jsonl");
    CHECK(shipped.skipped.empty());
    const auto fresh = make_synthetic_suite();
    REQUIRE(shipped.instances.size() == fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        CHECK(instance_to_json_line(shipped.instances[i]) == instance_to_json_line(fresh[i]));
    }
}

TEST_CASE("synthetic filler shares no content word with synthetic questions") {
    const auto suite = make_synthetic_suite();
    const auto filler = content_words(synthetic_filler(5000, 1));
    for (const auto& inst : suite) {
        for (const auto& w : content_words(inst.question)) {
            CHECK_FALSE(filler.contains(w));
        }
    }
    CHECK(default_tokenizer().count(synthetic_filler(12345, 2)) == 12345);
}
