#pragma once

#include <string>
#include <string_view>

#include "mathforge/grader.hpp"

namespace mathforge {

// Template versions are shipped constants so generated datasets and tests
// stay stable; bumping a version means adding a new template, not editing
// an old one.
inline constexpr const char* kBoostTemplateVersion = "boost-v1";
inline constexpr const char* kSolveTemplateVersion = "solve-v1";
inline constexpr const char* kSelfCompareTemplateVersion = "selfcompare-v1";

class UnknownTemplateVersion : public std::runtime_error {
public:
    explicit UnknownTemplateVersion(const std::string& version)
        : std::runtime_error("unknown template version: " + version) {}
};

// Instruction block for one augmentation operator (question substituted by
// boost_prompt_text).
std::string boost_instruction(int operator_index);

// Full augmentation prompt: instruction block + original question.
std::string boost_prompt_text(int operator_index, std::string_view question);

// Step-by-step solve prompt whose final-answer marker matches the grading
// format.
std::string solve_prompt_text(std::string_view question, SolutionFormat format);

// Prompt pairing a question with the model's previous answer and asking for
// a compared, corrected solution. Throws UnknownTemplateVersion.
std::string selfcompare_prompt_text(std::string_view question, std::string_view prior_answer,
                                    const std::string& template_version);

}  // namespace mathforge
