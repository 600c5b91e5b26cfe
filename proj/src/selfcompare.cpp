#include "mathforge/selfcompare.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "mathforge/sha256.hpp"
#include "mathforge/text.hpp"

namespace mathforge {

namespace fs = std::filesystem;

std::string RoundPlan::digest() const { return sha256_hex(round_plan_json(*this).dump()); }

RoundPlan make_partition(const Dataset& dataset, int k, long long seed) {
    std::size_t n = dataset.problems.size();
    if (k < 1) throw KZero();
    if (static_cast<std::size_t>(k) > n) throw KTooLarge(k, n);

    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& p : dataset.problems) ids.push_back(p.id);

    // Hand-rolled Fisher-Yates: std::shuffle's draw order is
    // implementation-defined, this must reproduce across toolchains.
    std::mt19937_64 rng(static_cast<unsigned long long>(seed));
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(ids[i], ids[j]);
    }

    RoundPlan plan;
    plan.k = k;
    plan.seed = seed;
    std::size_t base = n / static_cast<std::size_t>(k);
    std::size_t remainder = n % static_cast<std::size_t>(k);
    std::size_t cursor = 0;
    for (int r = 0; r < k; ++r) {
        std::size_t size = base + (static_cast<std::size_t>(r) < remainder ? 1 : 0);
        plan.partition.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                                    ids.begin() + static_cast<std::ptrdiff_t>(cursor + size));
        cursor += size;
    }
    return plan;
}

ojson round_plan_json(const RoundPlan& plan) {
    ojson j;
    j["k"] = plan.k;
    j["seed"] = plan.seed;
    j["partition"] = plan.partition;
    return j;
}

RoundPlan round_plan_from_json(const ojson& j) {
    RoundPlan plan;
    plan.k = j.at("k").get<int>();
    plan.seed = j.at("seed").get<long long>();
    plan.partition = j.at("partition").get<std::vector<std::vector<std::string>>>();
    if (plan.k < 1 || plan.partition.size() != static_cast<std::size_t>(plan.k))
        throw SelfCompareError("round plan has " + std::to_string(plan.partition.size()) +
                               " partitions for k = " + std::to_string(plan.k));
    return plan;
}

void write_round_plan(const RoundPlan& plan, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SelfCompareError("cannot write round plan: " + path.string());
    out << round_plan_json(plan).dump(2) << "\n";
}

RoundPlan read_round_plan(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SelfCompareError("cannot read round plan: " + path.string());
    ojson j = ojson::parse(in, nullptr, false);
    if (j.is_discarded()) throw SelfCompareError("round plan is not valid JSON: " + path.string());
    return round_plan_from_json(j);
}

ojson attempt_json(const Attempt& a) {
    ojson j;
    j["problem_id"] = a.problem_id;
    j["round"] = a.round;
    j["answer_text"] = a.answer_text;
    j["extracted"] = a.extracted ? a.extracted->str() : "";
    j["correct"] = a.correct;
    return j;
}

Attempt attempt_from_json(const ojson& j) {
    Attempt a;
    a.problem_id = j.at("problem_id").get<std::string>();
    a.round = j.at("round").get<int>();
    a.answer_text = j.at("answer_text").get<std::string>();
    std::string extracted = j.value("extracted", "");
    if (!extracted.empty()) a.extracted = normalize(extracted);
    a.correct = j.at("correct").get<bool>();
    return a;
}

void write_attempts(const std::vector<Attempt>& attempts, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SelfCompareError("cannot write attempts: " + path.string());
    for (const auto& a : attempts) out << attempt_json(a).dump() << "\n";
}

std::vector<Attempt> read_attempts(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SelfCompareError("cannot read attempts: " + path.string());
    std::vector<Attempt> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ojson j = ojson::parse(line, nullptr, false);
        if (j.is_discarded()) throw SelfCompareError("attempts file has a malformed line");
        out.push_back(attempt_from_json(j));
    }
    return out;
}

std::vector<Attempt> collect_attempts(const std::vector<const Problem*>& sub_dataset, int round,
                                      Gateway& gateway, SolutionFormat format, long long base_seed) {
    std::vector<Attempt> attempts;
    attempts.reserve(sub_dataset.size());
    for (const Problem* p : sub_dataset) {
        CompletionRequest req;
        req.messages.push_back({Role::user, solve_prompt_text(p->question, format)});
        req.temperature = 0.0;  // reproducible previous answers
        req.seed = derive_seed(base_seed, "attempt/" + p->id + "/round" + std::to_string(round));
        CompletionResponse resp = gateway.complete(std::move(req));

        Attempt a;
        a.problem_id = p->id;
        a.round = round;
        a.answer_text = resp.content;
        if (p->reference_answer) {
            GradeResult g = grade_completion(p->id, *p->reference_answer, a.answer_text, format);
            a.extracted = g.extracted;
            a.correct = g.correct;
        }
        attempts.push_back(std::move(a));
    }
    return attempts;
}

std::string SelfComparePrompt::render() const {
    return selfcompare_prompt_text(question, prior_answer, template_version);
}

SelfComparePrompt build_selfcompare_prompt(const Problem& problem, const Attempt& attempt,
                                           const std::string& template_version) {
    if (attempt.problem_id != problem.id)
        throw SelfCompareError("attempt " + attempt.problem_id + " does not belong to problem " +
                               problem.id);
    if (trim(attempt.answer_text).empty()) throw EmptyPriorAnswer(problem.id);
    SelfComparePrompt prompt;
    prompt.problem_id = problem.id;
    prompt.question = problem.question;
    prompt.prior_answer = attempt.answer_text;
    prompt.template_version = template_version;
    prompt.render();  // validates the template version
    return prompt;
}

std::string to_string(IncludePolicy p) { return p == IncludePolicy::all ? "all" : "incorrect_only"; }

IncludePolicy include_policy_from_string(std::string_view s) {
    if (s == "all") return IncludePolicy::all;
    if (s == "incorrect_only") return IncludePolicy::incorrect_only;
    throw SelfCompareError("unknown include policy: " + std::string(s));
}

std::string to_string(SftOrigin o) { return o == SftOrigin::base ? "base" : "selfcompare"; }

std::vector<SftExample> render_base_sft(const Dataset& dataset, SolutionFormat format) {
    std::vector<SftExample> out;
    out.reserve(dataset.problems.size());
    for (const auto& p : dataset.problems) {
        if (trim(p.reference_solution).empty()) throw MissingReferenceSolution(p.id);
        SftExample e;
        e.prompt = solve_prompt_text(p.question, format);
        e.target = p.reference_solution;
        e.origin = SftOrigin::base;
        e.round = 0;
        e.problem_id = p.id;
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<SftExample> merge_with_origin(std::vector<SftExample> origin_sft,
                                          std::vector<SftExample> selfcompare_sft) {
    origin_sft.reserve(origin_sft.size() + selfcompare_sft.size());
    for (auto& e : selfcompare_sft) origin_sft.push_back(std::move(e));
    return origin_sft;
}

std::vector<const Problem*> round_problems(const Dataset& origin, const RoundPlan& plan, int round) {
    if (round < 1 || round > plan.k) throw RoundOutOfRange(round, plan.k);
    const auto& ids = plan.partition[static_cast<std::size_t>(round - 1)];
    std::set<std::string> members(ids.begin(), ids.end());
    std::vector<const Problem*> out;
    for (const auto& p : origin.problems) {
        if (members.count(p.id)) out.push_back(&p);
    }
    return out;
}

RoundOutput run_round(const Dataset& origin, const RoundPlan& plan, int round, Gateway& gateway,
                      IncludePolicy include_policy, SolutionFormat format,
                      const std::string& template_version, long long base_seed,
                      const std::vector<Attempt>* precollected) {
    std::vector<const Problem*> sub = round_problems(origin, plan, round);

    RoundOutput out;
    out.attempts = precollected ? *precollected
                                : collect_attempts(sub, round, gateway, format, base_seed);

    std::vector<SftExample> sc;
    for (const auto& attempt : out.attempts) {
        if (include_policy == IncludePolicy::incorrect_only && attempt.correct) continue;
        const Problem* p = origin.find(attempt.problem_id);
        if (!p) throw SelfCompareError("attempt references unknown problem " + attempt.problem_id);
        if (trim(p->reference_solution).empty()) throw MissingReferenceSolution(p->id);
        SelfComparePrompt prompt = build_selfcompare_prompt(*p, attempt, template_version);
        SftExample e;
        e.prompt = prompt.render();
        e.target = p->reference_solution;
        e.origin = SftOrigin::selfcompare;
        e.round = round;
        e.problem_id = p->id;
        sc.push_back(std::move(e));
    }

    std::size_t sc_count = sc.size();
    out.examples = merge_with_origin(render_base_sft(origin, format), std::move(sc));

    long long correct = 0;
    for (const auto& a : out.attempts) correct += a.correct ? 1 : 0;

    ojson manifest;
    manifest["round"] = round;
    manifest["k"] = plan.k;
    manifest["plan_digest"] = plan.digest();
    manifest["include_policy"] = to_string(include_policy);
    manifest["template_version"] = template_version;
    manifest["solution_format"] = to_string(format);
    manifest["model"] = gateway.model();
    manifest["attempts"] = out.attempts.size();
    manifest["attempts_correct"] = correct;
    manifest["base_examples"] = origin.problems.size();
    manifest["selfcompare_examples"] = sc_count;
    manifest["total_examples"] = out.examples.size();
    out.manifest = std::move(manifest);
    return out;
}

ojson sft_example_json(const SftExample& e) {
    ojson j;
    j["prompt"] = e.prompt;
    j["target"] = e.target;
    j["origin"] = to_string(e.origin);
    j["round"] = e.round;
    j["problem_id"] = e.problem_id;
    return j;
}

void write_round_output(const RoundOutput& out, int round, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    {
        std::ofstream f(out_dir / ("sft_round_" + std::to_string(round) + ".jsonl"), std::ios::binary);
        if (!f) throw SelfCompareError("cannot write sft round file");
        for (const auto& e : out.examples) f << sft_example_json(e).dump() << "\n";
    }
    {
        std::ofstream f(out_dir / ("round_manifest_" + std::to_string(round) + ".json"),
                        std::ios::binary);
        if (!f) throw SelfCompareError("cannot write round manifest");
        f << out.manifest.dump(2) << "\n";
    }
}

}  // namespace mathforge
