#include "mathforge/booster.hpp"

#include <algorithm>
#include <fstream>

#include "mathforge/sha256.hpp"
#include "mathforge/text.hpp"

namespace mathforge {

namespace fs = std::filesystem;

std::string to_string(BoostOperator op) {
    switch (op) {
        case BoostOperator::Concretize: return "concretize";
        case BoostOperator::AddConstraints: return "add_constraints";
        case BoostOperator::Deepen: return "deepen";
        case BoostOperator::Rephrase: return "rephrase";
    }
    return "rephrase";
}

BoostOperator boost_operator_from_string(std::string_view s) {
    if (s == "concretize") return BoostOperator::Concretize;
    if (s == "add_constraints") return BoostOperator::AddConstraints;
    if (s == "deepen") return BoostOperator::Deepen;
    if (s == "rephrase") return BoostOperator::Rephrase;
    throw InvalidBoostConfig("unknown boost operator: " + std::string(s));
}

std::string to_string(VerificationMode m) {
    return m == VerificationMode::reference_match ? "reference_match" : "consistency_vote";
}

void BoostConfig::validate() const {
    if (enabled_operators.empty()) throw InvalidBoostConfig("enabled_operators must be non-empty");
    if (fanout_per_operator < 1) throw InvalidBoostConfig("fanout_per_operator must be positive");
    if (consistency_samples < 1 || consistency_samples % 2 == 0)
        throw InvalidBoostConfig("consistency_samples must be an odd positive int");
    if (max_generation_attempts < 1)
        throw InvalidBoostConfig("max_generation_attempts must be positive");
}

BoostConfig boost_config_from_json(const ojson& j) {
    BoostConfig c;
    if (j.contains("operators")) {
        c.enabled_operators.clear();
        for (const auto& op : j["operators"]) {
            c.enabled_operators.push_back(boost_operator_from_string(op.get<std::string>()));
        }
    }
    c.fanout_per_operator = j.value("fanout", 1);
    c.consistency_samples = j.value("consistency_samples", 3);
    c.max_generation_attempts = j.value("max_generation_attempts", 2);
    if (j.contains("solution_format"))
        c.solution_format = solution_format_from_string(j["solution_format"].get<std::string>());
    c.generation_temperature = j.value("temperature", 0.7);
    c.max_tokens = j.value("max_tokens", 1024);
    c.validate();
    return c;
}

ojson boost_config_json(const BoostConfig& c) {
    ojson j;
    j["operators"] = ojson::array();
    for (auto op : c.enabled_operators) j["operators"].push_back(to_string(op));
    j["fanout"] = c.fanout_per_operator;
    j["consistency_samples"] = c.consistency_samples;
    j["max_generation_attempts"] = c.max_generation_attempts;
    j["solution_format"] = to_string(c.solution_format);
    j["temperature"] = c.generation_temperature;
    j["max_tokens"] = c.max_tokens;
    j["base_seed"] = c.base_seed;
    return j;
}

CompletionRequest build_boost_prompt(const Problem& problem, BoostOperator op, double temperature,
                                     int max_tokens) {
    CompletionRequest req;
    req.messages.push_back({Role::user, boost_prompt_text(static_cast<int>(op), problem.question)});
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    return req;
}

std::string boost_question(const Problem& problem, BoostOperator op, Gateway& gateway,
                           const BoostConfig& config, std::string_view seed_tag) {
    std::string original = collapse_whitespace(problem.question);
    for (int attempt = 0; attempt < config.max_generation_attempts; ++attempt) {
        CompletionRequest req =
            build_boost_prompt(problem, op, config.generation_temperature, config.max_tokens);
        req.seed = derive_seed(config.base_seed,
                               std::string(seed_tag) + "/attempt" + std::to_string(attempt));
        CompletionResponse resp = gateway.complete(std::move(req));
        std::string candidate(trim(resp.content));
        if (!candidate.empty() && collapse_whitespace(candidate) != original) return candidate;
    }
    throw DegenerateAugmentation(std::string(seed_tag));
}

std::string generate_solution(std::string_view boosted_question, Gateway& gateway,
                              const BoostConfig& config, std::string_view seed_tag) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        CompletionRequest req;
        req.messages.push_back(
            {Role::user, solve_prompt_text(boosted_question, config.solution_format)});
        req.temperature = config.generation_temperature;
        req.max_tokens = config.max_tokens;
        req.seed = derive_seed(config.base_seed,
                               std::string(seed_tag) + "/attempt" + std::to_string(attempt));
        CompletionResponse resp = gateway.complete(std::move(req));
        if (resp.finish_reason != FinishReason::length) return resp.content;
    }
    throw GenerationTruncated(std::string(seed_tag));
}

BoostRecord verify_correctness(BoostRecord record, const Problem& parent, Gateway& gateway,
                               const BoostConfig& config) {
    record.verification_mode = record.op == BoostOperator::Rephrase
                                   ? VerificationMode::reference_match
                                   : VerificationMode::consistency_vote;
    record.verified = false;
    record.extracted_answer.reset();

    auto own = try_extract_final_answer(record.generated_solution, config.solution_format);
    if (!own) {
        record.failure_reason = "no_answer_extracted";
        return record;
    }

    if (record.verification_mode == VerificationMode::reference_match) {
        if (!parent.reference_answer) {
            record.failure_reason = "parent_missing_reference_answer";
            return record;
        }
        if (answers_equivalent(*own, *parent.reference_answer)) {
            record.verified = true;
            record.extracted_answer = std::move(own);
            record.failure_reason.clear();
        } else {
            record.failure_reason = "reference_mismatch";
        }
        return record;
    }

    // Answer-changing operators: the record's answer must agree with
    // consistency_samples independently sampled solutions, unanimously.
    std::vector<CanonicalAnswer> votes;
    votes.push_back(*own);
    for (int i = 0; i < config.consistency_samples; ++i) {
        CompletionRequest req;
        req.messages.push_back(
            {Role::user, solve_prompt_text(record.boosted_question, config.solution_format)});
        req.temperature = config.generation_temperature;
        req.max_tokens = config.max_tokens;
        req.seed = derive_seed(config.base_seed, record.id + "/vote" + std::to_string(i));
        CompletionResponse resp = gateway.complete(std::move(req));
        auto sampled = try_extract_final_answer(resp.content, config.solution_format);
        if (!sampled) {
            record.failure_reason = "vote_sample_missing_answer";
            return record;
        }
        votes.push_back(std::move(*sampled));
    }
    for (std::size_t i = 0; i < votes.size(); ++i) {
        for (std::size_t j = i + 1; j < votes.size(); ++j) {
            if (!answers_equivalent(votes[i], votes[j])) {
                record.failure_reason = "vote_split";
                return record;
            }
        }
    }
    record.verified = true;
    record.extracted_answer = std::move(own);
    record.failure_reason.clear();
    return record;
}

BoostOutput run_boost(const Dataset& dataset, const BoostConfig& config, Gateway& gateway) {
    config.validate();
    BoostOutput out;
    out.augmented.name = dataset.name + "-boosted";
    out.augmented.split = Split::derived;

    std::map<std::string, long long> op_total;
    std::map<std::string, long long> op_verified;

    for (const auto& problem : dataset.problems) {
        for (BoostOperator op : kAllBoostOperators) {
            bool enabled = std::find(config.enabled_operators.begin(), config.enabled_operators.end(),
                                     op) != config.enabled_operators.end();
            if (!enabled) continue;
            for (int f = 0; f < config.fanout_per_operator; ++f) {
                BoostRecord record;
                record.parent_id = problem.id;
                record.op = op;
                record.id = problem.id + "#" + to_string(op) + "#" + std::to_string(f);
                record.round = 1;
                record.verification_mode = op == BoostOperator::Rephrase
                                               ? VerificationMode::reference_match
                                               : VerificationMode::consistency_vote;
                ++op_total[to_string(op)];
                try {
                    record.boosted_question =
                        boost_question(problem, op, gateway, config, "boost/" + record.id);
                    record.generated_solution = generate_solution(
                        record.boosted_question, gateway, config, "solve/" + record.id);
                    record = verify_correctness(std::move(record), problem, gateway, config);
                } catch (const DegenerateAugmentation&) {
                    record.failure_reason = "degenerate_augmentation";
                } catch (const GenerationTruncated&) {
                    record.failure_reason = "generation_truncated";
                }
                if (record.verified) {
                    ++op_verified[to_string(op)];
                    Problem p;
                    p.id = record.id;
                    p.source = Source::custom;
                    p.split = Split::derived;
                    p.language = problem.language;
                    p.subject = problem.subject;
                    p.level = problem.level;
                    p.question = record.boosted_question;
                    p.reference_solution = record.generated_solution;
                    p.reference_answer = record.extracted_answer;
                    out.augmented.problems.push_back(std::move(p));
                }
                out.records.push_back(std::move(record));
            }
        }
    }

    long long total = static_cast<long long>(out.records.size());
    long long verified = static_cast<long long>(out.augmented.problems.size());
    ojson manifest;
    manifest["dataset"] = dataset.name;
    manifest["config"] = boost_config_json(config);
    manifest["config_digest"] = sha256_hex(boost_config_json(config).dump());
    manifest["boost_template_version"] = kBoostTemplateVersion;
    manifest["solve_template_version"] = kSolveTemplateVersion;
    manifest["records_total"] = total;
    manifest["records_verified"] = verified;
    manifest["pass_rate"] = total == 0 ? "0.00" : format_percent_half_up(verified, total);
    ojson per_op;
    for (const auto& [op, n] : op_total) {
        ojson entry;
        entry["total"] = n;
        entry["verified"] = op_verified.count(op) ? op_verified[op] : 0;
        per_op[op] = entry;
    }
    manifest["operators"] = per_op;
    out.manifest = std::move(manifest);
    return out;
}

ojson boost_record_json(const BoostRecord& r) {
    ojson j;
    j["id"] = r.id;
    j["parent_id"] = r.parent_id;
    j["operator"] = to_string(r.op);
    j["round"] = r.round;
    j["verification_mode"] = to_string(r.verification_mode);
    j["verified"] = r.verified;
    j["failure_reason"] = r.failure_reason;
    j["boosted_question"] = r.boosted_question;
    j["generated_solution"] = r.generated_solution;
    j["extracted_answer"] = r.extracted_answer ? r.extracted_answer->str() : "";
    return j;
}

void write_boost_output(const BoostOutput& out, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_canonical(out.augmented, out_dir / "boosted.jsonl");
    {
        std::ofstream f(out_dir / "boost_records.jsonl", std::ios::binary);
        if (!f) throw BoostError("cannot write boost_records.jsonl");
        for (const auto& r : out.records) f << boost_record_json(r).dump() << "\n";
    }
    {
        std::ofstream f(out_dir / "boost_manifest.json", std::ios::binary);
        if (!f) throw BoostError("cannot write boost_manifest.json");
        f << out.manifest.dump(2) << "\n";
    }
}

}  // namespace mathforge
