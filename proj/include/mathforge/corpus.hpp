#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mathforge/grader.hpp"

namespace mathforge {

enum class Source { gsm8k, math, cmath, custom };
enum class Split { train, test, derived };
enum class Language { en, zh };

std::string to_string(Source s);
std::string to_string(Split s);
std::string to_string(Language s);
Source source_from_string(std::string_view s);
Split split_from_string(std::string_view s);
Language language_from_string(std::string_view s);

struct Problem {
    std::string id;
    Source source = Source::custom;
    Split split = Split::derived;
    Language language = Language::en;
    std::string subject;  // empty = absent
    std::string level;    // empty = absent
    std::string question;
    std::string reference_solution;
    std::optional<CanonicalAnswer> reference_answer;
};

struct Dataset {
    std::string name;
    Split split = Split::derived;
    std::vector<Problem> problems;

    const Problem* find(const std::string& id) const;
};

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedLine : public IngestError {
public:
    MalformedLine(std::size_t line_no, const std::string& detail)
        : IngestError("line " + std::to_string(line_no) + ": " + detail), line_no(line_no) {}
    std::size_t line_no;
};

class MissingAnswerDelimiter : public IngestError {
public:
    explicit MissingAnswerDelimiter(std::size_t line_no)
        : IngestError("line " + std::to_string(line_no) + ": answer lacks '####' delimiter"),
          line_no(line_no) {}
    std::size_t line_no;
};

class MissingBoxedAnswer : public IngestError {
public:
    explicit MissingBoxedAnswer(const std::string& id)
        : IngestError("problem " + id + ": solution has no boxed expression"), id(id) {}
    std::string id;
};

class NonNumericAnswer : public IngestError {
public:
    explicit NonNumericAnswer(const std::string& id)
        : IngestError("problem " + id + ": answer is not numeric"), id(id) {}
    std::string id;
};

// GSM8K JSONL: {"question", "answer"} with the final line "#### <answer>".
// Line numbers in errors are 1-based; ids are <source>-<split>-<0-based index>.
Dataset ingest_gsm8k(const std::filesystem::path& path, Split split);

// MATH records: {"problem", "solution", "level", "type"}; accepts a JSONL
// file or a directory tree of single-record .json files (sorted by path).
Dataset ingest_math(const std::filesystem::path& path, Split split);

// CMath JSONL: {"question", "golden"} (an "answer" field is also accepted).
// Answers must parse as Arabic-digit numerics.
Dataset ingest_cmath(const std::filesystem::path& path, Split split);

// Canonical internal JSONL, fixed field order:
// id, source, split, language, subject, level, question, reference_solution,
// reference_answer. UTF-8, LF, byte-stable across write/read/write.
Dataset read_canonical(const std::filesystem::path& path);
void write_canonical(const Dataset& ds, const std::filesystem::path& path);
std::string canonical_line(const Problem& p);
Problem problem_from_canonical_json(const ojson& j);

enum class ViolationKind { DuplicateId, EmptyId, EmptyQuestion, MissingReferenceAnswer };

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string problem_id;
};

// Every invariant violation in the dataset; empty iff valid.
std::vector<Violation> validate(const Dataset& ds);

struct CorpusStats {
    long long total = 0;
    std::map<std::string, long long> by_source;
    std::map<std::string, long long> by_split;
    std::map<std::string, long long> by_subject;   // non-empty subjects only
    std::map<std::string, long long> by_language;
    std::vector<std::string> nonstandard_subjects;  // outside the seven MATH subjects
    std::size_t min_question_length = 0;  // code points; 0 for an empty dataset
    std::size_t max_question_length = 0;
};

// The seven MATH benchmark subjects.
bool is_standard_math_subject(std::string_view subject);

CorpusStats stats(const Dataset& ds);
ojson stats_json(const CorpusStats& s);

}  // namespace mathforge
