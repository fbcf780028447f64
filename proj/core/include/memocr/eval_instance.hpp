#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

inline constexpr int kInstanceSchemaVersion = 1;

// One long-context QA item. Provide either `context` (chunked at run time)
// or pre-split `chunks`.
struct EvalInstance {
    std::string id;
    std::string dataset = "default";
    std::string question;
    std::vector<std::string> gold_answers;
    std::string context;
    std::vector<std::string> chunks;
    std::optional<std::string> detail_question;
    std::vector<std::string> detail_answers;
    std::vector<std::string> evidence;

    bool has_context() const;
    // Throws FormatError when an invariant is violated.
    void validate() const;
};

std::string instance_to_json_line(const EvalInstance& inst);
EvalInstance instance_from_json_line(std::string_view line);

struct InstanceFile {
    std::vector<EvalInstance> instances;
    // 1-based line numbers and messages for lines that failed to parse.
    std::vector<std::pair<std::size_t, std::string>> skipped;
};

// Reads JSON Lines; malformed lines are collected in `skipped`, not thrown.
InstanceFile read_instances(const std::filesystem::path& path);
InstanceFile parse_instances(std::string_view jsonl);
void write_instances(const std::vector<EvalInstance>& instances, const std::filesystem::path& path);

}  // namespace memocr
