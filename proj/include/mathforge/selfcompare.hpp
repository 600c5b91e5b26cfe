#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mathforge/corpus.hpp"
#include "mathforge/gateway.hpp"
#include "mathforge/prompts.hpp"

namespace mathforge {

class SelfCompareError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class KZero : public SelfCompareError {
public:
    KZero() : SelfCompareError("k must be at least 1") {}
};

class KTooLarge : public SelfCompareError {
public:
    KTooLarge(int k, std::size_t n)
        : SelfCompareError("k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(n)) {}
};

class RoundOutOfRange : public SelfCompareError {
public:
    RoundOutOfRange(int round, int k)
        : SelfCompareError("round " + std::to_string(round) + " outside 1.." + std::to_string(k)) {}
};

class EmptyPriorAnswer : public SelfCompareError {
public:
    explicit EmptyPriorAnswer(const std::string& problem_id)
        : SelfCompareError("prior answer for " + problem_id + " is empty") {}
};

class MissingReferenceSolution : public SelfCompareError {
public:
    explicit MissingReferenceSolution(const std::string& problem_id)
        : SelfCompareError("problem " + problem_id + " has no reference solution to train on") {}
};

struct RoundPlan {
    int k = 1;
    long long seed = 0;
    std::vector<std::vector<std::string>> partition;  // k disjoint id sets covering the dataset

    std::string digest() const;
};

// Seeded uniform shuffle of the dataset's ids followed by contiguous
// balanced slices (sizes differ by at most 1). Deterministic in
// (dataset ids, k, seed).
RoundPlan make_partition(const Dataset& dataset, int k, long long seed);

ojson round_plan_json(const RoundPlan& plan);
RoundPlan round_plan_from_json(const ojson& j);
void write_round_plan(const RoundPlan& plan, const std::filesystem::path& path);
RoundPlan read_round_plan(const std::filesystem::path& path);

struct Attempt {
    std::string problem_id;
    int round = 1;
    std::string answer_text;
    std::optional<CanonicalAnswer> extracted;
    bool correct = false;
};

ojson attempt_json(const Attempt& a);
Attempt attempt_from_json(const ojson& j);
void write_attempts(const std::vector<Attempt>& attempts, const std::filesystem::path& path);
std::vector<Attempt> read_attempts(const std::filesystem::path& path);

// One graded attempt per problem, solve template at temperature 0.
// A missing final answer is an incorrect attempt, not an error.
std::vector<Attempt> collect_attempts(const std::vector<const Problem*>& sub_dataset, int round,
                                      Gateway& gateway, SolutionFormat format, long long base_seed);

struct SelfComparePrompt {
    std::string problem_id;
    std::string question;
    std::string prior_answer;
    std::string template_version;

    std::string render() const;  // contains question and prior_answer verbatim
};

SelfComparePrompt build_selfcompare_prompt(const Problem& problem, const Attempt& attempt,
                                           const std::string& template_version);

enum class IncludePolicy { all, incorrect_only };

std::string to_string(IncludePolicy p);
IncludePolicy include_policy_from_string(std::string_view s);

enum class SftOrigin { base, selfcompare };

std::string to_string(SftOrigin o);

struct SftExample {
    std::string prompt;
    std::string target;
    SftOrigin origin = SftOrigin::base;
    int round = 0;  // 0 = base data
    std::string problem_id;
};

// Plain solve-prompt rendering of a dataset: target is the reference
// solution. Throws MissingReferenceSolution.
std::vector<SftExample> render_base_sft(const Dataset& dataset, SolutionFormat format);

// Concatenation, origin first; no deduplication.
std::vector<SftExample> merge_with_origin(std::vector<SftExample> origin_sft,
                                          std::vector<SftExample> selfcompare_sft);

struct RoundOutput {
    std::vector<Attempt> attempts;
    std::vector<SftExample> examples;
    ojson manifest;
};

// Collects (or reuses) attempts for round r's sub-dataset, builds
// self-compare examples per the include policy, and merges them after the
// base rendering of the full origin dataset.
RoundOutput run_round(const Dataset& origin, const RoundPlan& plan, int round, Gateway& gateway,
                      IncludePolicy include_policy, SolutionFormat format,
                      const std::string& template_version, long long base_seed,
                      const std::vector<Attempt>* precollected = nullptr);

ojson sft_example_json(const SftExample& e);

// sft_round_<r>.jsonl and round_manifest_<r>.json under out_dir.
void write_round_output(const RoundOutput& out, int round, const std::filesystem::path& out_dir);

// Problems of `origin` belonging to round r of the plan, in origin order.
std::vector<const Problem*> round_problems(const Dataset& origin, const RoundPlan& plan, int round);

}  // namespace mathforge
