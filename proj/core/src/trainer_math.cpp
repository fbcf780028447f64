#include "memocr/trainer_math.hpp"

#include "memocr/answer_matching.hpp"
#include "memocr/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace memocr {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(TaskId id) {
    switch (id) {
        case TaskId::standard:
            return "std";
        case TaskId::augmented_memory:
            return "augM";
        case TaskId::augmented_question:
            return "augQ";
    }
    return "?";
}

TaskId task_from_string(std::string_view s) {
    if (s == "std") {
        return TaskId::standard;
    }
    if (s == "augM") {
        return TaskId::augmented_memory;
    }
    if (s == "augQ") {
        return TaskId::augmented_question;
    }
    throw FormatError("unknown task id '" + std::string(s) + "' (expected std|augM|augQ)");
}

std::vector<TaskSpec> build_task_suite(const EvalInstance& instance, const TaskSchedule& schedule) {
    std::vector<TaskSpec> tasks;
    tasks.push_back({TaskId::standard, schedule.standard_budget, QuestionSource::original, schedule.standard_weight,
                     instance.question, instance.gold_answers});
    tasks.push_back({TaskId::augmented_memory, schedule.augmented_memory_budget(), QuestionSource::original,
                     schedule.augmented_memory_weight, instance.question, instance.gold_answers});
    if (instance.detail_question && !instance.detail_question->empty()) {
        tasks.push_back({TaskId::augmented_question, schedule.detail_budget, QuestionSource::detail_oriented,
                         schedule.augmented_question_weight, *instance.detail_question, instance.detail_answers});
    }
    return tasks;
}

std::map<TaskId, double> task_weights(const std::vector<TaskSpec>& tasks) {
    std::map<TaskId, double> w;
    for (const auto& t : tasks) {
        w[t.id] = t.weight;
    }
    return w;
}

AdvantageNormalization normalization_from_string(std::string_view s) {
    if (s == "std") {
        return AdvantageNormalization::std_dev;
    }
    if (s == "mean") {
        return AdvantageNormalization::mean_only;
    }
    throw FormatError("unknown normalization '" + std::string(s) + "' (expected std|mean)");
}

std::vector<double> group_advantage(std::span<const double> rewards, AdvantageNormalization norm) {
    if (rewards.size() < 2) {
        throw GroupTooSmall("group advantage needs at least 2 rollouts, got " + std::to_string(rewards.size()));
    }
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) {
        mean += r;
    }
    mean /= n;
    double var = 0.0;
    for (double r : rewards) {
        var += (r - mean) * (r - mean);
    }
    var /= n;
    const double sd = std::sqrt(var);

    std::vector<double> adv(rewards.size(), 0.0);
    if (norm == AdvantageNormalization::std_dev && sd == 0.0) {
        return adv;
    }
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        adv[i] = norm == AdvantageNormalization::std_dev ? (rewards[i] - mean) / sd : rewards[i] - mean;
    }
    return adv;
}

std::vector<double> aggregate_advantage(const TaskAdvantages& per_task, const std::map<TaskId, double>& weights) {
    if (per_task.empty()) {
        throw ZeroWeightSum("no tasks to aggregate");
    }
    const std::size_t g = per_task.begin()->second.size();
    double wsum = 0.0;
    for (const auto& [task, adv] : per_task) {
        if (adv.size() != g) {
            throw PreconditionError(std::string("task ") + to_string(task) + " has " + std::to_string(adv.size()) +
                                    " advantages, expected " + std::to_string(g));
        }
        const auto it = weights.find(task);
        if (it == weights.end()) {
            throw PreconditionError(std::string("no weight for task ") + to_string(task));
        }
        wsum += it->second;
    }
    if (!(wsum > 0.0)) {
        throw ZeroWeightSum("task weights sum to " + std::to_string(wsum));
    }
    std::vector<double> out(g, 0.0);
    for (const auto& [task, adv] : per_task) {
        const double w = weights.at(task);
        for (std::size_t i = 0; i < g; ++i) {
            out[i] += w * adv[i];
        }
    }
    for (double& v : out) {
        v /= wsum;
    }
    return out;
}

void RolloutGroup::validate() const {
    if (group_size < 2) {
        throw GroupTooSmall("group size must be >= 2");
    }
    for (const auto& [task, r] : rewards) {
        if (static_cast<int>(r.size()) != group_size) {
            throw PreconditionError(std::string("task ") + to_string(task) + " has " + std::to_string(r.size()) +
                                    " rewards, expected " + std::to_string(group_size));
        }
    }
}

AdvantageSet compute_advantages(const RolloutGroup& group, const std::map<TaskId, double>& weights,
                                AdvantageNormalization norm) {
    group.validate();
    AdvantageSet set;
    for (const auto& [task, r] : group.rewards) {
        set.per_task[task] = group_advantage(r, norm);
    }
    set.aggregated = aggregate_advantage(set.per_task, weights);
    return set;
}

RolloutGroup rollout_group_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("invalid rewards JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw FormatError("rewards JSON must be an object {task_id: [rewards]}");
    }
    // Accept both the bare map and {"rewards": {...}}.
    const json& body = j.contains("rewards") ? j["rewards"] : j;
    RolloutGroup group;
    group.group_size = -1;
    for (const auto& [key, value] : body.items()) {
        if (key == "schema_version") {
            continue;
        }
        if (!value.is_array()) {
            throw FormatError("rewards for '" + key + "' must be an array");
        }
        std::vector<double> r;
        for (const auto& v : value) {
            if (!v.is_number()) {
                throw FormatError("rewards for '" + key + "' must be numbers");
            }
            r.push_back(v.get<double>());
        }
        if (group.group_size < 0) {
            group.group_size = static_cast<int>(r.size());
        }
        group.rewards[task_from_string(key)] = std::move(r);
    }
    if (group.rewards.empty()) {
        throw FormatError("rewards JSON has no tasks");
    }
    group.validate();
    return group;
}

std::string advantage_set_to_json(const AdvantageSet& set, const std::map<TaskId, double>& weights) {
    ordered_json j;
    j["schema_version"] = 1;
    ordered_json w = ordered_json::object();
    ordered_json per = ordered_json::object();
    for (const auto& [task, adv] : set.per_task) {
        per[to_string(task)] = adv;
        w[to_string(task)] = weights.at(task);
    }
    j["weights"] = std::move(w);
    j["per_task"] = std::move(per);
    j["aggregated"] = set.aggregated;
    return j.dump(2);
}

double scenario_reward(std::string_view prediction, const std::vector<std::string>& golds) {
    return sem_match(prediction, golds) ? 1.0 : 0.0;
}

double task_reward(const RenderedMemory& memory, const TaskSpec& task, ReaderClient& reader) {
    const auto result = answer_rendered(memory, task.question, task.memory_budget, reader);
    return scenario_reward(result.answer, task.golds);
}

void TrainingConstants::validate() const {
    auto fail = [](const std::string& what) { throw FormatError("training constants: " + what); };
    if (chunk_size < 1) fail("chunk_size must be >= 1");
    if (group_size < 2) fail("group_size must be >= 2");
    if (kl_coefficient < 0.0) fail("kl_coefficient must be >= 0");
    if (clip_ratio <= 0.0 || clip_ratio >= 1.0) fail("clip_ratio must be in (0, 1)");
    if (top_p <= 0.0 || top_p > 1.0) fail("top_p must be in (0, 1]");
    if (temperature <= 0.0) fail("temperature must be > 0");
    if (max_memory_tokens < 1 || max_answer_tokens < 1) fail("token limits must be >= 1");
    if (global_batch_size < 1 || micro_batch_size < 1 || global_batch_size % micro_batch_size != 0) {
        fail("global_batch_size must be a positive multiple of micro_batch_size");
    }
    if (learning_rate <= 0.0) fail("learning_rate must be > 0");
    if (warmup_steps < 0) fail("warmup_steps must be >= 0");
}

TrainingConstants TrainingConstants::from_json(std::string_view text) {
    TrainingConstants c;
    try {
        const json j = json::parse(text);
        c.chunk_size = j.value("chunk_size", c.chunk_size);
        c.group_size = j.value("group_size", c.group_size);
        c.kl_coefficient = j.value("kl_coefficient", c.kl_coefficient);
        c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
        c.top_p = j.value("top_p", c.top_p);
        c.temperature = j.value("temperature", c.temperature);
        c.max_memory_tokens = j.value("max_memory_tokens", c.max_memory_tokens);
        c.max_answer_tokens = j.value("max_answer_tokens", c.max_answer_tokens);
        c.global_batch_size = j.value("global_batch_size", c.global_batch_size);
        c.micro_batch_size = j.value("micro_batch_size", c.micro_batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    } catch (const json::exception& e) {
        throw FormatError(std::string("training constants: ") + e.what());
    }
    c.validate();
    return c;
}

std::string TrainingConstants::to_json() const {
    ordered_json j = {
        {"chunk_size", chunk_size},
        {"group_size", group_size},
        {"kl_coefficient", kl_coefficient},
        {"clip_ratio", clip_ratio},
        {"top_p", top_p},
        {"temperature", temperature},
        {"max_memory_tokens", max_memory_tokens},
        {"max_answer_tokens", max_answer_tokens},
        {"global_batch_size", global_batch_size},
        {"micro_batch_size", micro_batch_size},
        {"learning_rate", learning_rate},
        {"warmup_steps", warmup_steps},
    };
    return j.dump(2);
}

}  // namespace memocr
