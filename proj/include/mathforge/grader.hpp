#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mathforge/answer.hpp"

namespace mathforge {

using ojson = nlohmann::ordered_json;

enum class SolutionFormat { HashDelimited, Boxed, LastNumber };

std::string to_string(SolutionFormat f);
SolutionFormat solution_format_from_string(std::string_view s);

class NoAnswerFound : public std::runtime_error {
public:
    explicit NoAnswerFound(const std::string& what) : std::runtime_error("no answer found: " + what) {}
};

class EmptyResults : public std::runtime_error {
public:
    EmptyResults() : std::runtime_error("cannot compute pass@1 over zero results") {}
};

// hash_delimited: token after the last "####"; boxed: content of the last
// balanced \boxed{...}; last_number: last maximal numeric token.
// The extracted text is canonicalized via normalize().
CanonicalAnswer extract_final_answer(std::string_view text, SolutionFormat format);
std::optional<CanonicalAnswer> try_extract_final_answer(std::string_view text, SolutionFormat format);

enum class GradeFailure { NoAnswerFound, NotEquivalent };

std::string to_string(GradeFailure f);

struct GradeResult {
    std::string problem_id;
    std::optional<CanonicalAnswer> extracted;
    CanonicalAnswer reference;
    bool correct = false;
    std::optional<GradeFailure> failure;
};

// Extraction then equivalence against the reference. Failures are recorded
// in the result, never thrown.
GradeResult grade_completion(const std::string& problem_id, const CanonicalAnswer& reference,
                             std::string_view completion, SolutionFormat format);

// Half-up to two decimals, e.g. (954, 1319) -> "72.33". total must be > 0.
std::string format_percent_half_up(long long correct, long long total);

// Two-decimal pass@1 percentage. Throws EmptyResults on an empty list.
std::string pass_at_1(const std::vector<GradeResult>& results);

struct GradeReport {
    std::string name;    // split / run label
    std::string source;  // dataset source key: gsm8k | math | cmath | custom
    std::vector<GradeResult> results;

    long long correct_count() const;
    double pass_at_1_raw() const;       // 100 * correct / total; 0 when empty
    std::string pass_at_1_display() const;  // throws EmptyResults when empty
};

ojson grade_result_json(const GradeResult& r);
ojson grade_report_json(const GradeReport& report);

}  // namespace mathforge
