#include <doctest.h>

#include <fstream>

#include "mathforge/evalharness.hpp"
#include "support.hpp"

using namespace mathforge;
using namespace mftest;

TEST_CASE("run_eval: 3-of-4 fixture gives 75.00 and persists completions") {
    Dataset ds = read_canonical(fixtures_dir() / "eval4.jsonl");
    BackendConfig bc = plain_config();
    Gateway gw(mock_from_script(fixtures_dir() / "mock_eval4.jsonl"), bc);

    EvalConfig cfg;
    EvalOutput out = run_eval(ds, cfg, gw);
    REQUIRE(out.report.results.size() == 4);
    CHECK(out.report.correct_count() == 3);
    CHECK(out.report.pass_at_1_display() == "75.00");
    CHECK(out.report.source == "gsm8k");
    CHECK(out.completions.size() == 4);  // exactly one completion per problem
    CHECK(gw.backend_calls() == 4);

    auto dir = temp_dir("eval");
    write_completions(out.completions, dir / "completions.jsonl");
    auto back = read_completions(dir / "completions.jsonl");
    REQUIRE(back.size() == 4);

    // offline regrade reproduces the identical report
    GradeReport re = regrade(back, ds, cfg.solution_format);
    CHECK(re.correct_count() == out.report.correct_count());
    CHECK(re.pass_at_1_display() == out.report.pass_at_1_display());
    REQUIRE(re.results.size() == out.report.results.size());
    for (std::size_t i = 0; i < re.results.size(); ++i) {
        CHECK(re.results[i].correct == out.report.results[i].correct);
        CHECK(re.results[i].problem_id == out.report.results[i].problem_id);
    }
}

TEST_CASE("run_eval: empty dataset raises EmptyResults") {
    Dataset empty;
    empty.name = "empty";
    Gateway gw(std::make_unique<ConstantBackend>("#### 1"), plain_config());
    CHECK_THROWS_AS(run_eval(empty, EvalConfig{}, gw), EmptyResults);
}

TEST_CASE("run_eval: max_problems caps the run") {
    Dataset ds = read_canonical(fixtures_dir() / "eval4.jsonl");
    Gateway gw(mock_from_script(fixtures_dir() / "mock_eval4.jsonl"), plain_config());
    EvalConfig cfg;
    cfg.max_problems = 2;
    EvalOutput out = run_eval(ds, cfg, gw);
    CHECK(out.completions.size() == 2);
    CHECK(out.report.results.size() == 2);

    EvalConfig bad;
    bad.max_problems = 0;
    CHECK_THROWS_AS(run_eval(ds, bad, gw), EvalError);
}

TEST_CASE("run_eval: per-problem backend failure is recorded, run continues") {
    Dataset ds = read_canonical(fixtures_dir() / "eval4.jsonl");
    auto dir = temp_dir("partial_mock");
    {
        std::ofstream f(dir / "script.jsonl");
        // only two of four problems have entries; the others error out
        f << R"({"match": {"contains": "Ava has 3 apples"}, "response": "#### 7"})" << "\n";
        f << R"({"match": {"contains": "Mia splits 24 grapes"}, "response": "#### 12"})" << "\n";
    }
    Gateway gw(mock_from_script(dir / "script.jsonl"), plain_config());
    EvalOutput out = run_eval(ds, EvalConfig{}, gw);
    REQUIRE(out.report.results.size() == 4);
    CHECK(out.report.correct_count() == 2);
    CHECK(out.completions[1].finish_reason == FinishReason::error);
    CHECK(out.report.results[1].failure == GradeFailure::NoAnswerFound);
}

TEST_CASE("regrade: unknown ids and empty input raise") {
    Dataset ds = read_canonical(fixtures_dir() / "eval4.jsonl");
    std::vector<CompletionRecord> completions;
    CHECK_THROWS_AS(regrade(completions, ds, SolutionFormat::HashDelimited), EmptyResults);

    CompletionRecord ghost;
    ghost.problem_id = "gsm8k-test-404";
    ghost.completion = "#### 7";
    completions.push_back(ghost);
    CHECK_THROWS_AS(regrade(completions, ds, SolutionFormat::HashDelimited), UnknownProblemId);
}

TEST_CASE("render_report: markdown columns mirror the benchmark table") {
    GradeReport report;
    report.name = "eval4";
    report.source = "gsm8k";
    for (int i = 0; i < 4; ++i) {
        GradeResult r;
        r.problem_id = "p" + std::to_string(i);
        r.reference = normalize("1");
        r.correct = i < 3;
        report.results.push_back(r);
    }

    std::string md = render_report(report, ReportStyle::markdown, "fixture-run");
    CHECK(md.find("75.00") != std::string::npos);
    CHECK(md.find("| GSM8K |") != std::string::npos);
    CHECK(md.find("| fixture-run |") != std::string::npos);
    // absent datasets render as "-"
    CHECK(md.find("| - | - |") != std::string::npos);

    std::string js = render_report(report, ReportStyle::json, "fixture-run");
    ojson parsed = ojson::parse(js);
    CHECK(parsed["run"] == "fixture-run");
    CHECK(parsed["reports"][0]["pass_at_1"] == "75.00");

    // multi-dataset run: one column per dataset present
    GradeReport cmath_report;
    cmath_report.name = "cmath";
    cmath_report.source = "cmath";
    GradeResult r;
    r.problem_id = "c0";
    r.reference = normalize("1");
    r.correct = true;
    cmath_report.results.push_back(r);
    std::string multi =
        render_report(std::vector<GradeReport>{report, cmath_report}, ReportStyle::markdown, "multi");
    CHECK(multi.find("75.00") != std::string::npos);
    CHECK(multi.find("100.00") != std::string::npos);
    CHECK(multi.find(" - ") != std::string::npos);  // MATH column stays empty
}

TEST_CASE("render_report is a pure function of the report") {
    GradeReport report;
    report.name = "x";
    report.source = "math";
    GradeResult r;
    r.problem_id = "p";
    r.reference = normalize("1");
    r.correct = true;
    report.results.push_back(r);
    CHECK(render_report(report, ReportStyle::markdown, "run") ==
          render_report(report, ReportStyle::markdown, "run"));
    CHECK(render_report(report, ReportStyle::json, "run") ==
          render_report(report, ReportStyle::json, "run"));
}
