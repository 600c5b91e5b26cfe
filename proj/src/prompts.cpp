#include "mathforge/prompts.hpp"

namespace mathforge {

namespace {

// Indexed by BoostOperator's enum order: Concretize, AddConstraints,
// Deepen, Rephrase.
constexpr const char* kBoostInstructions[4] = {
    "Rewrite the following math problem so that abstract or generic elements are replaced with "
    "concrete, specific ones (named people, real objects, explicit quantities). Keep it a "
    "well-posed math problem. Reply with the rewritten problem only.",

    "Rewrite the following math problem by adding exactly one extra condition or constraint that "
    "the solver must also take into account. Keep it a well-posed math problem. Reply with the "
    "rewritten problem only.",

    "Rewrite the following math problem so that solving it requires more reasoning steps, for "
    "example by chaining an additional computation onto the result. Keep it a well-posed math "
    "problem. Reply with the rewritten problem only.",

    "Rephrase the following math problem using different wording while keeping exactly the same "
    "meaning and the same final answer. Reply with the rephrased problem only.",
};

}  // namespace

std::string boost_instruction(int operator_index) {
    return kBoostInstructions[operator_index & 3];
}

std::string boost_prompt_text(int operator_index, std::string_view question) {
    return boost_instruction(operator_index) + std::string("\n\nProblem:\n") + std::string(question);
}

std::string solve_prompt_text(std::string_view question, SolutionFormat format) {
    std::string marker;
    switch (format) {
        case SolutionFormat::HashDelimited:
            marker = "End your solution with a final line of the form '#### <answer>'.";
            break;
        case SolutionFormat::Boxed:
            marker = "Put your final answer inside \\boxed{}.";
            break;
        case SolutionFormat::LastNumber:
            marker = "End your solution with the final numeric answer.";
            break;
    }
    return "Solve the following math problem step by step. " + marker + "\n\nProblem:\n" +
           std::string(question);
}

std::string selfcompare_prompt_text(std::string_view question, std::string_view prior_answer,
                                    const std::string& template_version) {
    if (template_version != kSelfCompareTemplateVersion)
        throw UnknownTemplateVersion(template_version);
    std::string out = "Below is a math problem together with an answer you previously gave.\n\n";
    out += "Problem:\n";
    out += question;
    out += "\n\nYour previous answer:\n";
    out += prior_answer;
    out +=
        "\n\nCompare your previous answer with the correct reasoning for this problem, point out "
        "any specific errors it contains, and then write the correct step-by-step solution.";
    return out;
}

}  // namespace mathforge
