#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mathforge/corpus.hpp"
#include "mathforge/gateway.hpp"
#include "mathforge/prompts.hpp"

namespace mathforge {

enum class BoostOperator { Concretize, AddConstraints, Deepen, Rephrase };

inline constexpr std::array<BoostOperator, 4> kAllBoostOperators = {
    BoostOperator::Concretize, BoostOperator::AddConstraints, BoostOperator::Deepen,
    BoostOperator::Rephrase};

std::string to_string(BoostOperator op);
BoostOperator boost_operator_from_string(std::string_view s);

enum class VerificationMode { reference_match, consistency_vote };

std::string to_string(VerificationMode m);

struct BoostRecord {
    std::string id;  // <parent_id>#<operator>#<fanout index>
    std::string parent_id;
    BoostOperator op = BoostOperator::Rephrase;
    std::string boosted_question;
    std::string generated_solution;
    std::optional<CanonicalAnswer> extracted_answer;
    bool verified = false;
    VerificationMode verification_mode = VerificationMode::reference_match;
    std::string failure_reason;  // empty when verified
    int round = 1;
};

class BoostError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidBoostConfig : public BoostError {
public:
    using BoostError::BoostError;
};

class DegenerateAugmentation : public BoostError {
public:
    explicit DegenerateAugmentation(const std::string& id)
        : BoostError("augmentation for " + id + " stayed empty or identical to the original") {}
};

class GenerationTruncated : public BoostError {
public:
    explicit GenerationTruncated(const std::string& id)
        : BoostError("solution generation for " + id + " hit the token limit twice") {}
};

struct BoostConfig {
    std::vector<BoostOperator> enabled_operators = {BoostOperator::Rephrase};
    int fanout_per_operator = 1;
    int consistency_samples = 3;  // odd
    int max_generation_attempts = 2;
    SolutionFormat solution_format = SolutionFormat::HashDelimited;
    double generation_temperature = 0.7;
    int max_tokens = 1024;
    long long base_seed = 0;

    void validate() const;  // throws InvalidBoostConfig
};

BoostConfig boost_config_from_json(const ojson& j);
ojson boost_config_json(const BoostConfig& c);

// Fixed per-operator instruction template with the question substituted
// verbatim.
CompletionRequest build_boost_prompt(const Problem& problem, BoostOperator op,
                                     double temperature = 0.7, int max_tokens = 1024);

// One augmented question. Retries up to config.max_generation_attempts when
// the completion is empty or identical (after whitespace collapse) to the
// original; throws DegenerateAugmentation when attempts run out.
std::string boost_question(const Problem& problem, BoostOperator op, Gateway& gateway,
                           const BoostConfig& config, std::string_view seed_tag);

// Step-by-step solution for an augmented question. One retry on a truncated
// completion, then GenerationTruncated.
std::string generate_solution(std::string_view boosted_question, Gateway& gateway,
                              const BoostConfig& config, std::string_view seed_tag);

// Rephrase: grade the generated solution against the parent's reference
// answer. Other operators: unanimous consistency vote over
// config.consistency_samples fresh solutions plus the record's own answer.
BoostRecord verify_correctness(BoostRecord record, const Problem& parent, Gateway& gateway,
                               const BoostConfig& config);

struct BoostOutput {
    Dataset augmented;
    std::vector<BoostRecord> records;
    ojson manifest;
};

// problem x enabled operator x fanout, in that deterministic order. Every
// combination yields a BoostRecord; only verified records become problems.
BoostOutput run_boost(const Dataset& dataset, const BoostConfig& config, Gateway& gateway);

ojson boost_record_json(const BoostRecord& r);

// boosted.jsonl (corpus schema), boost_records.jsonl, boost_manifest.json.
void write_boost_output(const BoostOutput& out, const std::filesystem::path& out_dir);

}  // namespace mathforge
