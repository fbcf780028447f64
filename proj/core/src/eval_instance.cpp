#include "memocr/eval_instance.hpp"

#include "memocr/errors.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace memocr {

using nlohmann::json;
using nlohmann::ordered_json;

bool EvalInstance::has_context() const {
    if (!detail::trim(context).empty()) {
        return true;
    }
    for (const auto& c : chunks) {
        if (!detail::trim(c).empty()) {
            return true;
        }
    }
    return false;
}

void EvalInstance::validate() const {
    if (gold_answers.empty()) {
        throw FormatError("instance '" + id + "': needs at least one gold answer");
    }
    if (!has_context()) {
        throw FormatError("instance '" + id + "': context is empty");
    }
    if (question.empty()) {
        throw FormatError("instance '" + id + "': question is empty");
    }
}

std::string instance_to_json_line(const EvalInstance& inst) {
    ordered_json j;
    j["schema_version"] = kInstanceSchemaVersion;
    j["id"] = inst.id;
    j["dataset"] = inst.dataset;
    j["question"] = inst.question;
    j["gold_answers"] = inst.gold_answers;
    if (!inst.context.empty()) {
        j["context"] = inst.context;
    }
    if (!inst.chunks.empty()) {
        j["chunks"] = inst.chunks;
    }
    if (inst.detail_question) {
        j["detail_question"] = *inst.detail_question;
        j["detail_answers"] = inst.detail_answers;
    }
    if (!inst.evidence.empty()) {
        j["evidence"] = inst.evidence;
    }
    return j.dump();
}

EvalInstance instance_from_json_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw FormatError("instance must be a JSON object");
    }
    try {
        const int version = j.value("schema_version", kInstanceSchemaVersion);
        if (version != kInstanceSchemaVersion) {
            throw FormatError("unsupported schema_version " + std::to_string(version));
        }
        EvalInstance inst;
        inst.id = j.at("id").get<std::string>();
        inst.dataset = j.value("dataset", std::string("default"));
        inst.question = j.at("question").get<std::string>();
        inst.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
        inst.context = j.value("context", std::string());
        inst.chunks = j.value("chunks", std::vector<std::string>{});
        if (j.contains("detail_question") && !j["detail_question"].is_null()) {
            inst.detail_question = j["detail_question"].get<std::string>();
        }
        inst.detail_answers = j.value("detail_answers", std::vector<std::string>{});
        inst.evidence = j.value("evidence", std::vector<std::string>{});
        inst.validate();
        return inst;
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad instance field: ") + e.what());
    }
}

InstanceFile parse_instances(std::string_view jsonl) {
    InstanceFile out;
    std::size_t lineno = 0;
    for (std::string_view line : detail::split_lines(jsonl)) {
        ++lineno;
        if (detail::trim(line).empty()) {
            continue;
        }
        try {
            out.instances.push_back(instance_from_json_line(line));
        } catch (const FormatError& e) {
            out.skipped.emplace_back(lineno, e.what());
        }
    }
    return out;
}

InstanceFile read_instances(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open instance file '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instances(ss.str());
}

void write_instances(const std::vector<EvalInstance>& instances, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    for (const auto& inst : instances) {
        out << instance_to_json_line(inst) << '\n';
    }
}

}  // namespace memocr
