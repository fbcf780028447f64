#pragma once

#include "memocr/eval_instance.hpp"
#include "memocr/memory_lifecycle.hpp"

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memocr {

enum class TaskId { standard, augmented_memory, augmented_question };
enum class QuestionSource { original, detail_oriented };

const char* to_string(TaskId id);  // "std" / "augM" / "augQ"
TaskId task_from_string(std::string_view s);

struct TaskSpec {
    TaskId id;
    int memory_budget;
    QuestionSource question_source;
    double weight;
    // Question and golds this task is scored against.
    std::string question;
    std::vector<std::string> golds;
};

// Budget-aware task configuration. The low-budget task is derived from the
// standard budget by a per-dimension downsample factor.
struct TaskSchedule {
    int standard_budget = 512;
    int downsample_per_dim = 4;
    int detail_budget = 512;
    double standard_weight = 1.0;
    double augmented_memory_weight = 0.7;
    double augmented_question_weight = 0.3;

    int augmented_memory_budget() const { return standard_budget / (downsample_per_dim * downsample_per_dim); }
};

// std, augM and (when the instance has a detail question) augQ.
std::vector<TaskSpec> build_task_suite(const EvalInstance& instance, const TaskSchedule& schedule = {});

std::map<TaskId, double> task_weights(const std::vector<TaskSpec>& tasks);

enum class AdvantageNormalization {
    std_dev,    // (r - mean) / population std
    mean_only,  // r - mean
};

AdvantageNormalization normalization_from_string(std::string_view s);

std::vector<double> group_advantage(std::span<const double> rewards,
                                    AdvantageNormalization norm = AdvantageNormalization::std_dev);

using TaskAdvantages = std::map<TaskId, std::vector<double>>;

// Weighted mean over tasks, per rollout index.
std::vector<double> aggregate_advantage(const TaskAdvantages& per_task, const std::map<TaskId, double>& weights);

inline constexpr int kDefaultGroupSize = 16;

struct RolloutGroup {
    int group_size = kDefaultGroupSize;
    std::map<TaskId, std::vector<double>> rewards;

    void validate() const;
};

struct AdvantageSet {
    TaskAdvantages per_task;
    std::vector<double> aggregated;
};

AdvantageSet compute_advantages(const RolloutGroup& group, const std::map<TaskId, double>& weights,
                                AdvantageNormalization norm = AdvantageNormalization::std_dev);

// {task_id: [rewards]}; the group size is taken from the lists.
RolloutGroup rollout_group_from_json(std::string_view text);
std::string advantage_set_to_json(const AdvantageSet& set, const std::map<TaskId, double>& weights);

double scenario_reward(std::string_view prediction, const std::vector<std::string>& golds);

// Reward of one drafted memory on one task with the given reader.
double task_reward(const RenderedMemory& memory, const TaskSpec& task, ReaderClient& reader);

// Optimisation constants carried for configuration parity only; nothing here
// updates weights.
struct TrainingConstants {
    int chunk_size = 5000;
    int group_size = kDefaultGroupSize;
    double kl_coefficient = 1e-3;
    double clip_ratio = 0.20;
    double top_p = 0.999;
    double temperature = 1.0;
    int max_memory_tokens = 2048;
    int max_answer_tokens = 2048;
    int global_batch_size = 64;
    int micro_batch_size = 16;
    double learning_rate = 1e-6;
    int warmup_steps = 20;

    void validate() const;
    static TrainingConstants from_json(std::string_view text);
    std::string to_json() const;
};

}  // namespace memocr
