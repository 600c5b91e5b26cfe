#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mathforge/corpus.hpp"
#include "mathforge/gateway.hpp"
#include "mathforge/prompts.hpp"

namespace mathforge {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownProblemId : public EvalError {
public:
    explicit UnknownProblemId(const std::string& id)
        : EvalError("completion references unknown problem id: " + id) {}
};

struct EvalConfig {
    SolutionFormat solution_format = SolutionFormat::HashDelimited;
    std::string prompt_template_version = kSolveTemplateVersion;
    std::optional<int> max_problems;  // cap for desk-scale runs
    double temperature = 0.0;         // pass@1: one deterministic sample per problem
    long long base_seed = 0;

    void validate() const;
};

struct CompletionRecord {
    std::string problem_id;
    std::string prompt;
    std::string completion;
    FinishReason finish_reason = FinishReason::stop;
};

ojson completion_record_json(const CompletionRecord& r);
void write_completions(const std::vector<CompletionRecord>& completions,
                       const std::filesystem::path& path);
std::vector<CompletionRecord> read_completions(const std::filesystem::path& path);

struct EvalOutput {
    GradeReport report;
    std::vector<CompletionRecord> completions;
};

// One completion per problem, graded. A per-problem backend failure is
// recorded as an incorrect result and the run continues. Throws
// EmptyResults for an empty dataset.
EvalOutput run_eval(const Dataset& dataset, const EvalConfig& config, Gateway& gateway);

// Pure offline re-grade of persisted completions. Throws UnknownProblemId
// and EmptyResults.
GradeReport regrade(const std::vector<CompletionRecord>& completions, const Dataset& dataset,
                    SolutionFormat format);

enum class ReportStyle { json, markdown };

ReportStyle report_style_from_string(std::string_view s);

// One table row combining the given reports: columns GSM8K / MATH / CMath
// (plus Custom when present), two-decimal percentages, "-" for datasets the
// run did not evaluate.
std::string render_report(const std::vector<GradeReport>& reports, ReportStyle style,
                          const std::string& run_name);
std::string render_report(const GradeReport& report, ReportStyle style, const std::string& run_name);

}  // namespace mathforge
