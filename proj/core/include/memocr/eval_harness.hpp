#pragma once

#include "memocr/answer_matching.hpp"
#include "memocr/eval_instance.hpp"
#include "memocr/http_clients.hpp"
#include "memocr/memory_lifecycle.hpp"
#include "memocr/mock_clients.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memocr {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kReferenceBudget = 1024;

// Builds per-instance clients so sweeps can run instances concurrently.
class ClientFactory {
public:
    virtual ~ClientFactory() = default;
    virtual std::unique_ptr<DrafterClient> make_drafter(const EvalInstance& instance) const = 0;
    virtual std::unique_ptr<ReaderClient> make_reader(const EvalInstance& instance) const = 0;
};

class MockClientFactory final : public ClientFactory {
public:
    explicit MockClientFactory(EvidencePlacement placement = EvidencePlacement::heading,
                               LegibilityModel legibility = {});
    std::unique_ptr<DrafterClient> make_drafter(const EvalInstance& instance) const override;
    std::unique_ptr<ReaderClient> make_reader(const EvalInstance& instance) const override;

private:
    EvidencePlacement placement_;
    LegibilityModel legibility_;
};

class HttpClientFactory final : public ClientFactory {
public:
    explicit HttpClientFactory(HttpClientConfig cfg) : cfg_(std::move(cfg)) {}
    std::unique_ptr<DrafterClient> make_drafter(const EvalInstance&) const override;
    std::unique_ptr<ReaderClient> make_reader(const EvalInstance&) const override;

private:
    HttpClientConfig cfg_;
};

enum class Injection { none, crucial, detailed };

Injection injection_from_string(std::string_view s);
const char* to_string(Injection inj);

struct SweepConfig {
    std::vector<int> budgets = kDefaultBudgets;
    StyleSheet style = StyleSheet::defaults();
    PriorityConfig priority = PriorityConfig::defaults();
    LifecycleConfig lifecycle;
    // Oracle evidence injection applied to the drafted memory before rendering.
    Injection injection = Injection::none;
    unsigned threads = 0;  // 0 = hardware concurrency
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> image_dump_dir;
};

struct EvalRecord {
    std::string instance_id;
    std::string dataset;
    int budget = 0;
    std::string predicted;
    bool matched = false;
    std::int64_t visual_tokens_used = 0;
    double scale_factor = 1.0;
    std::string error;

    bool operator==(const EvalRecord&) const = default;
};

struct InstanceSummary {
    std::string instance_id;
    std::size_t draft_calls = 0;
    std::size_t memory_tokens = 0;
    std::string error;

    bool operator==(const InstanceSummary&) const = default;
};

struct AccuracyRow {
    std::string dataset;
    int budget = 0;
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    // Signed percent versus the reference budget; empty when undefined.
    std::optional<double> relative_drop;

    bool operator==(const AccuracyRow&) const = default;
};

struct EvalReport {
    int schema_version = kReportSchemaVersion;
    std::uint64_t seed = 0;
    std::vector<int> budgets;
    int reference_budget = kReferenceBudget;
    std::string injection = "none";
    std::vector<EvalRecord> records;
    std::vector<InstanceSummary> instances;
    std::vector<AccuracyRow> accuracy;
    std::size_t failed_instances = 0;
    std::size_t skipped_lines = 0;

    const AccuracyRow* row(const std::string& dataset, int budget) const;
    // Accuracy over all datasets for one budget.
    double overall_accuracy(int budget) const;
    bool operator==(const EvalReport&) const = default;
};

// Drafts each memory once, renders it once, then fits and reads it at every budget.
EvalReport budget_sweep(const std::vector<EvalInstance>& instances, const ClientFactory& factory,
                        const SweepConfig& cfg = {});

// Recomputes `accuracy` from `records`.
void summarize(EvalReport& report);

// (acc_b - acc_ref) / acc_ref * 100. Throws UndefinedReference if acc_ref == 0.
double relative_drop(double acc_b, double acc_ref);

MemoryState inject_evidence(const MemoryState& memory, PriorityClass region, std::string_view evidence);

struct RegionStats {
    std::size_t token_count = 0;
    std::size_t evidence_token_count = 0;
    double precision = 0.0;
};

struct RegionPrecisionStats {
    RegionStats crucial;
    RegionStats detailed;
};

RegionPrecisionStats region_precision(const MemoryState& memory, const std::vector<std::string>& evidence,
                                      const PriorityConfig& cfg = PriorityConfig::defaults());

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

// Welch two-sample t-test, two-sided.
TTestResult ttest_ind(std::span<const double> a, std::span<const double> b);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
std::string report_to_csv(const EvalReport& report);

// Writes <dir>/report.json and <dir>/report.csv.
void export_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace memocr
