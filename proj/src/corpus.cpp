#include "mathforge/corpus.hpp"

#include <algorithm>
#include <fstream>

#include "mathforge/text.hpp"

namespace mathforge {

namespace fs = std::filesystem;

std::string to_string(Source s) {
    switch (s) {
        case Source::gsm8k: return "gsm8k";
        case Source::math: return "math";
        case Source::cmath: return "cmath";
        case Source::custom: return "custom";
    }
    return "custom";
}

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::test: return "test";
        case Split::derived: return "derived";
    }
    return "derived";
}

std::string to_string(Language s) { return s == Language::en ? "en" : "zh"; }

Source source_from_string(std::string_view s) {
    if (s == "gsm8k") return Source::gsm8k;
    if (s == "math") return Source::math;
    if (s == "cmath") return Source::cmath;
    if (s == "custom") return Source::custom;
    throw IngestError("unknown source: " + std::string(s));
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    if (s == "derived") return Split::derived;
    throw IngestError("unknown split: " + std::string(s));
}

Language language_from_string(std::string_view s) {
    if (s == "en") return Language::en;
    if (s == "zh") return Language::zh;
    throw IngestError("unknown language: " + std::string(s));
}

const Problem* Dataset::find(const std::string& id) const {
    for (const auto& p : problems) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

ojson parse_line(const std::string& line, std::size_t line_no) {
    ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedLine(line_no, "not a JSON object");
    return j;
}

std::string require_string(const ojson& j, const char* field, std::size_t line_no) {
    if (!j.contains(field) || !j[field].is_string())
        throw MalformedLine(line_no, std::string("missing string field '") + field + "'");
    return j[field].get<std::string>();
}

std::string make_id(Source source, Split split, std::size_t index) {
    return to_string(source) + "-" + to_string(split) + "-" + std::to_string(index);
}

}  // namespace

Dataset ingest_gsm8k(const fs::path& path, Split split) {
    Dataset ds;
    ds.name = path.stem().string();
    ds.split = split;
    std::size_t index = 0;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j = parse_line(line, line_no);
        Problem p;
        p.id = make_id(Source::gsm8k, split, index);
        p.source = Source::gsm8k;
        p.split = split;
        p.language = Language::en;
        p.question = require_string(j, "question", line_no);
        p.reference_solution = require_string(j, "answer", line_no);
        auto answer = try_extract_final_answer(p.reference_solution, SolutionFormat::HashDelimited);
        if (!answer) throw MissingAnswerDelimiter(line_no);
        p.reference_answer = std::move(answer);
        ds.problems.push_back(std::move(p));
        ++index;
    }
    return ds;
}

namespace {

Problem math_record_to_problem(const ojson& j, const std::string& id, Split split, std::size_t line_no) {
    Problem p;
    p.id = id;
    p.source = Source::math;
    p.split = split;
    p.language = Language::en;
    p.question = require_string(j, "problem", line_no);
    p.reference_solution = require_string(j, "solution", line_no);
    if (j.contains("type") && j["type"].is_string()) p.subject = j["type"].get<std::string>();
    if (j.contains("level")) {
        if (j["level"].is_string()) p.level = j["level"].get<std::string>();
        else if (j["level"].is_number_integer()) p.level = std::to_string(j["level"].get<long long>());
    }
    auto answer = try_extract_final_answer(p.reference_solution, SolutionFormat::Boxed);
    if (!answer) throw MissingBoxedAnswer(id);
    p.reference_answer = std::move(answer);
    return p;
}

}  // namespace

Dataset ingest_math(const fs::path& path, Split split) {
    Dataset ds;
    ds.name = path.stem().string();
    ds.split = split;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });
        std::size_t index = 0;
        for (const auto& file : files) {
            std::ifstream in(file, std::ios::binary);
            ojson j = ojson::parse(in, nullptr, false);
            if (j.is_discarded() || !j.is_object())
                throw IngestError("not a JSON object: " + file.string());
            ds.problems.push_back(math_record_to_problem(j, make_id(Source::math, split, index), split, index + 1));
            ++index;
        }
        return ds;
    }
    std::size_t index = 0;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j = parse_line(line, line_no);
        ds.problems.push_back(math_record_to_problem(j, make_id(Source::math, split, index), split, line_no));
        ++index;
    }
    return ds;
}

Dataset ingest_cmath(const fs::path& path, Split split) {
    Dataset ds;
    ds.name = path.stem().string();
    ds.split = split;
    std::size_t index = 0;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j = parse_line(line, line_no);
        Problem p;
        p.id = make_id(Source::cmath, split, index);
        p.source = Source::cmath;
        p.split = split;
        p.language = Language::zh;
        p.question = require_string(j, "question", line_no);
        std::string golden;
        if (j.contains("golden") && j["golden"].is_string()) golden = j["golden"].get<std::string>();
        else if (j.contains("golden") && j["golden"].is_number()) golden = j["golden"].dump();
        else if (j.contains("answer") && j["answer"].is_string()) golden = j["answer"].get<std::string>();
        else throw MalformedLine(line_no, "missing 'golden' answer field");
        auto answer = try_normalize(golden);
        if (!answer || !answer->is_numeric()) throw NonNumericAnswer(p.id);
        p.reference_answer = std::move(answer);
        ds.problems.push_back(std::move(p));
        ++index;
    }
    return ds;
}

std::string canonical_line(const Problem& p) {
    ojson j;
    j["id"] = p.id;
    j["source"] = to_string(p.source);
    j["split"] = to_string(p.split);
    j["language"] = to_string(p.language);
    j["subject"] = p.subject;
    j["level"] = p.level;
    j["question"] = p.question;
    j["reference_solution"] = p.reference_solution;
    j["reference_answer"] = p.reference_answer ? p.reference_answer->str() : "";
    return j.dump();
}

Problem problem_from_canonical_json(const ojson& j) {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.source = source_from_string(j.at("source").get<std::string>());
    p.split = split_from_string(j.at("split").get<std::string>());
    p.language = language_from_string(j.at("language").get<std::string>());
    p.subject = j.value("subject", "");
    p.level = j.value("level", "");
    p.question = j.at("question").get<std::string>();
    p.reference_solution = j.value("reference_solution", "");
    std::string answer = j.value("reference_answer", "");
    if (!answer.empty()) p.reference_answer = normalize(answer);
    return p;
}

Dataset read_canonical(const fs::path& path) {
    Dataset ds;
    ds.name = path.stem().string();
    std::size_t line_no = 0;
    bool first = true;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j = parse_line(line, line_no);
        Problem p;
        try {
            p = problem_from_canonical_json(j);
        } catch (const ojson::exception& e) {
            throw MalformedLine(line_no, e.what());
        }
        if (first) {
            ds.split = p.split;
            first = false;
        } else if (p.split != ds.split) {
            throw MalformedLine(line_no, "mixed split values in one dataset file");
        }
        ds.problems.push_back(std::move(p));
    }
    return ds;
}

void write_canonical(const Dataset& ds, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write file: " + path.string());
    for (const auto& p : ds.problems) out << canonical_line(p) << "\n";
}

std::string to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DuplicateId: return "duplicate_id";
        case ViolationKind::EmptyId: return "empty_id";
        case ViolationKind::EmptyQuestion: return "empty_question";
        case ViolationKind::MissingReferenceAnswer: return "missing_reference_answer";
    }
    return "duplicate_id";
}

std::vector<Violation> validate(const Dataset& ds) {
    std::vector<Violation> out;
    std::map<std::string, int> seen;
    for (const auto& p : ds.problems) {
        if (p.id.empty()) out.push_back({ViolationKind::EmptyId, p.id});
        else if (++seen[p.id] >= 2) out.push_back({ViolationKind::DuplicateId, p.id});
        if (trim(p.question).empty()) out.push_back({ViolationKind::EmptyQuestion, p.id});
        if (!p.reference_answer) out.push_back({ViolationKind::MissingReferenceAnswer, p.id});
    }
    return out;
}

bool is_standard_math_subject(std::string_view subject) {
    static const char* kSubjects[] = {"Prealgebra",        "Algebra",
                                      "Number Theory",     "Counting & Probability",
                                      "Counting and Probability", "Geometry",
                                      "Intermediate Algebra", "Precalculus"};
    for (const char* s : kSubjects) {
        if (subject == s) return true;
    }
    return false;
}

CorpusStats stats(const Dataset& ds) {
    CorpusStats s;
    bool first = true;
    for (const auto& p : ds.problems) {
        ++s.total;
        ++s.by_source[to_string(p.source)];
        ++s.by_split[to_string(p.split)];
        ++s.by_language[to_string(p.language)];
        if (!p.subject.empty()) ++s.by_subject[p.subject];
        std::size_t len = utf8_length(p.question);
        if (first) {
            s.min_question_length = s.max_question_length = len;
            first = false;
        } else {
            s.min_question_length = std::min(s.min_question_length, len);
            s.max_question_length = std::max(s.max_question_length, len);
        }
    }
    for (const auto& [subject, n] : s.by_subject) {
        if (!is_standard_math_subject(subject)) s.nonstandard_subjects.push_back(subject);
    }
    return s;
}

ojson stats_json(const CorpusStats& s) {
    ojson j;
    j["total"] = s.total;
    j["by_source"] = s.by_source;
    j["by_split"] = s.by_split;
    j["by_subject"] = s.by_subject;
    j["by_language"] = s.by_language;
    j["nonstandard_subjects"] = s.nonstandard_subjects;
    j["min_question_length"] = s.min_question_length;
    j["max_question_length"] = s.max_question_length;
    return j;
}

}  // namespace mathforge
