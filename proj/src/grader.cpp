#include "mathforge/grader.hpp"

#include <cctype>
#include <regex>

#include "mathforge/text.hpp"

namespace mathforge {

std::string to_string(SolutionFormat f) {
    switch (f) {
        case SolutionFormat::HashDelimited: return "hash_delimited";
        case SolutionFormat::Boxed: return "boxed";
        case SolutionFormat::LastNumber: return "last_number";
    }
    return "hash_delimited";
}

SolutionFormat solution_format_from_string(std::string_view s) {
    if (s == "hash_delimited") return SolutionFormat::HashDelimited;
    if (s == "boxed") return SolutionFormat::Boxed;
    if (s == "last_number") return SolutionFormat::LastNumber;
    throw std::runtime_error("unknown solution format: " + std::string(s));
}

std::string to_string(GradeFailure f) {
    return f == GradeFailure::NoAnswerFound ? "no_answer_found" : "not_equivalent";
}

namespace {

std::optional<std::string> hash_delimited_token(std::string_view text) {
    std::size_t pos = text.rfind("####");
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t i = pos + 4;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) return std::nullopt;
    return std::string(text.substr(i, j - i));
}

std::optional<std::string> last_boxed_content(std::string_view text) {
    std::optional<std::string> found;
    std::size_t pos = 0;
    while ((pos = text.find("\\boxed{", pos)) != std::string_view::npos) {
        int depth = 0;
        std::size_t open = pos + 6;
        std::size_t close = std::string_view::npos;
        for (std::size_t i = open; i < text.size(); ++i) {
            if (text[i] == '{') ++depth;
            else if (text[i] == '}' && --depth == 0) {
                close = i;
                break;
            }
        }
        if (close == std::string_view::npos) break;  // unbalanced tail
        found = std::string(text.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    return found;
}

std::optional<std::string> last_number_token(std::string_view text) {
    static const std::regex number_re(
        R"([+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?%?|[+-]?\d+(?:\.\d+)?%?)");
    std::string s(text);
    auto begin = std::sregex_iterator(s.begin(), s.end(), number_re);
    auto end = std::sregex_iterator();
    std::optional<std::string> found;
    for (auto it = begin; it != end; ++it) found = it->str();
    return found;
}

}  // namespace

std::optional<CanonicalAnswer> try_extract_final_answer(std::string_view text, SolutionFormat format) {
    std::optional<std::string> token;
    switch (format) {
        case SolutionFormat::HashDelimited: token = hash_delimited_token(text); break;
        case SolutionFormat::Boxed: token = last_boxed_content(text); break;
        case SolutionFormat::LastNumber: token = last_number_token(text); break;
    }
    if (!token) return std::nullopt;
    return try_normalize(*token);
}

CanonicalAnswer extract_final_answer(std::string_view text, SolutionFormat format) {
    auto a = try_extract_final_answer(text, format);
    if (!a) throw NoAnswerFound("format " + to_string(format) + " marker absent or empty");
    return *a;
}

GradeResult grade_completion(const std::string& problem_id, const CanonicalAnswer& reference,
                             std::string_view completion, SolutionFormat format) {
    GradeResult r;
    r.problem_id = problem_id;
    r.reference = reference;
    r.extracted = try_extract_final_answer(completion, format);
    if (!r.extracted) {
        r.failure = GradeFailure::NoAnswerFound;
        return r;
    }
    if (answers_equivalent(*r.extracted, reference)) {
        r.correct = true;
    } else {
        r.failure = GradeFailure::NotEquivalent;
    }
    return r;
}

std::string format_percent_half_up(long long correct, long long total) {
    if (total <= 0) throw EmptyResults();
    // hundredths of a percent, rounded half-up
    long long scaled = (20000 * correct + total) / (2 * total);
    std::string frac = std::to_string(scaled % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(scaled / 100) + "." + frac;
}

std::string pass_at_1(const std::vector<GradeResult>& results) {
    if (results.empty()) throw EmptyResults();
    long long correct = 0;
    for (const auto& r : results) correct += r.correct ? 1 : 0;
    return format_percent_half_up(correct, static_cast<long long>(results.size()));
}

long long GradeReport::correct_count() const {
    long long c = 0;
    for (const auto& r : results) c += r.correct ? 1 : 0;
    return c;
}

double GradeReport::pass_at_1_raw() const {
    if (results.empty()) return 0.0;
    return 100.0 * static_cast<double>(correct_count()) / static_cast<double>(results.size());
}

std::string GradeReport::pass_at_1_display() const { return pass_at_1(results); }

ojson grade_result_json(const GradeResult& r) {
    ojson j;
    j["problem_id"] = r.problem_id;
    j["correct"] = r.correct;
    j["extracted"] = r.extracted ? r.extracted->str() : "";
    j["reference"] = r.reference.str();
    j["failure"] = r.failure ? to_string(*r.failure) : "";
    return j;
}

ojson grade_report_json(const GradeReport& report) {
    ojson j;
    j["name"] = report.name;
    j["source"] = report.source;
    j["total"] = report.results.size();
    j["correct"] = report.correct_count();
    j["pass_at_1"] = report.results.empty() ? "" : report.pass_at_1_display();
    j["pass_at_1_raw"] = report.pass_at_1_raw();
    j["results"] = ojson::array();
    for (const auto& r : report.results) j["results"].push_back(grade_result_json(r));
    return j;
}

}  // namespace mathforge
