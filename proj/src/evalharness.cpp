#include "mathforge/evalharness.hpp"

#include <fstream>

#include "mathforge/text.hpp"

namespace mathforge {

namespace fs = std::filesystem;

void EvalConfig::validate() const {
    if (max_problems && *max_problems < 1) throw EvalError("max_problems must be >= 1 when set");
    if (temperature < 0) throw EvalError("temperature must be >= 0");
}

ojson completion_record_json(const CompletionRecord& r) {
    ojson j;
    j["problem_id"] = r.problem_id;
    j["prompt"] = r.prompt;
    j["completion"] = r.completion;
    j["finish_reason"] = to_string(r.finish_reason);
    return j;
}

void write_completions(const std::vector<CompletionRecord>& completions, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EvalError("cannot write completions: " + path.string());
    for (const auto& r : completions) out << completion_record_json(r).dump() << "\n";
}

std::vector<CompletionRecord> read_completions(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EvalError("cannot read completions: " + path.string());
    std::vector<CompletionRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ojson j = ojson::parse(line, nullptr, false);
        if (j.is_discarded()) throw EvalError("completions file has a malformed line");
        CompletionRecord r;
        r.problem_id = j.at("problem_id").get<std::string>();
        r.prompt = j.value("prompt", "");
        r.completion = j.value("completion", "");
        r.finish_reason = finish_reason_from_string(j.value("finish_reason", "stop"));
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::string dominant_source(const Dataset& dataset) {
    std::map<std::string, long long> counts;
    for (const auto& p : dataset.problems) ++counts[to_string(p.source)];
    std::string best = "custom";
    long long best_n = -1;
    for (const auto& [source, n] : counts) {
        if (n > best_n) {
            best = source;
            best_n = n;
        }
    }
    return best;
}

}  // namespace

EvalOutput run_eval(const Dataset& dataset, const EvalConfig& config, Gateway& gateway) {
    config.validate();
    if (dataset.problems.empty()) throw EmptyResults();

    std::size_t limit = dataset.problems.size();
    if (config.max_problems) limit = std::min(limit, static_cast<std::size_t>(*config.max_problems));

    EvalOutput out;
    out.report.name = dataset.name;
    out.report.source = dominant_source(dataset);

    for (std::size_t i = 0; i < limit; ++i) {
        const Problem& p = dataset.problems[i];
        CompletionRecord rec;
        rec.problem_id = p.id;
        rec.prompt = solve_prompt_text(p.question, config.solution_format);

        try {
            CompletionRequest req;
            req.messages.push_back({Role::user, rec.prompt});
            req.temperature = config.temperature;
            req.seed = derive_seed(config.base_seed, "eval/" + p.id);
            CompletionResponse resp = gateway.complete(std::move(req));
            rec.completion = resp.content;
            rec.finish_reason = resp.finish_reason;
        } catch (const GatewayError&) {
            rec.completion.clear();
            rec.finish_reason = FinishReason::error;
        }

        GradeResult g;
        if (p.reference_answer) {
            g = grade_completion(p.id, *p.reference_answer, rec.completion, config.solution_format);
        } else {
            g.problem_id = p.id;
            g.failure = GradeFailure::NoAnswerFound;
        }
        out.report.results.push_back(std::move(g));
        out.completions.push_back(std::move(rec));
    }
    return out;
}

GradeReport regrade(const std::vector<CompletionRecord>& completions, const Dataset& dataset,
                    SolutionFormat format) {
    if (completions.empty()) throw EmptyResults();
    GradeReport report;
    report.name = dataset.name;
    report.source = dominant_source(dataset);
    for (const auto& rec : completions) {
        const Problem* p = dataset.find(rec.problem_id);
        if (!p) throw UnknownProblemId(rec.problem_id);
        if (!p->reference_answer) {
            GradeResult g;
            g.problem_id = p->id;
            g.failure = GradeFailure::NoAnswerFound;
            report.results.push_back(std::move(g));
            continue;
        }
        report.results.push_back(grade_completion(p->id, *p->reference_answer, rec.completion, format));
    }
    return report;
}

ReportStyle report_style_from_string(std::string_view s) {
    if (s == "json") return ReportStyle::json;
    if (s == "markdown") return ReportStyle::markdown;
    throw EvalError("unknown report style: " + std::string(s));
}

std::string render_report(const std::vector<GradeReport>& reports, ReportStyle style,
                          const std::string& run_name) {
    if (style == ReportStyle::json) {
        ojson j;
        j["run"] = run_name;
        j["reports"] = ojson::array();
        for (const auto& r : reports) j["reports"].push_back(grade_report_json(r));
        return j.dump(2) + "\n";
    }

    std::vector<std::string> columns = {"gsm8k", "math", "cmath"};
    bool has_custom = false;
    for (const auto& r : reports) {
        if (r.source == "custom") has_custom = true;
    }
    if (has_custom) columns.push_back("custom");

    std::map<std::string, std::string> cells;
    long long total = 0;
    for (const auto& r : reports) {
        cells[r.source] = r.pass_at_1_display();
        total += static_cast<long long>(r.results.size());
    }

    static const std::map<std::string, std::string> headers = {
        {"gsm8k", "GSM8K"}, {"math", "MATH"}, {"cmath", "CMath"}, {"custom", "Custom"}};

    std::string out = "| Run | #Problems |";
    for (const auto& c : columns) out += " " + headers.at(c) + " |";
    out += "\n|---|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
    out += "\n| " + run_name + " | " + std::to_string(total) + " |";
    for (const auto& c : columns) {
        auto it = cells.find(c);
        out += " " + (it == cells.end() ? std::string("-") : it->second) + " |";
    }
    out += "\n";
    return out;
}

std::string render_report(const GradeReport& report, ReportStyle style, const std::string& run_name) {
    return render_report(std::vector<GradeReport>{report}, style, run_name);
}

}  // namespace mathforge
