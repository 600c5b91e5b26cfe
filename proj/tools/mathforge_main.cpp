// mathforge: build and evaluate math SFT datasets.
//
// Commands: ingest, stats, boost, selfcompare plan|collect|build, eval,
// regrade, grade, cache ls|clear. Data goes to stdout/files, logs to stderr.
// Exit codes: 0 success, 1 operational error, 2 validation failure,
// 3 graded-incorrect (grade only).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mathforge/booster.hpp"
#include "mathforge/corpus.hpp"
#include "mathforge/evalharness.hpp"
#include "mathforge/gateway.hpp"
#include "mathforge/grader.hpp"
#include "mathforge/manifest.hpp"
#include "mathforge/selfcompare.hpp"
#include "mathforge/sha256.hpp"
#include "mathforge/text.hpp"
#include "mathforge/version.hpp"

namespace fs = std::filesystem;
using namespace mathforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIncorrect = 3;

struct AppConfig {
    BackendConfig backend;
    BoostConfig boost;
    IncludePolicy include_policy = IncludePolicy::all;
    std::string selfcompare_template = kSelfCompareTemplateVersion;
    SolutionFormat selfcompare_format = SolutionFormat::HashDelimited;
    std::optional<int> selfcompare_k;
    EvalConfig eval;
    long long seed = 0;
    std::string config_digest;
};

AppConfig load_app_config(const std::string& config_path) {
    AppConfig app;
    if (config_path.empty()) {
        app.config_digest = sha256_hex("{}");
        return app;
    }
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    app.config_digest = sha256_hex(bytes);
    ojson j = ojson::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::runtime_error("config is not a JSON object: " + config_path);

    fs::path base_dir = fs::absolute(fs::path(config_path)).parent_path();
    if (j.contains("backend")) app.backend = backend_config_from_json(j["backend"], base_dir);
    if (j.contains("boost")) app.boost = boost_config_from_json(j["boost"]);
    if (j.contains("selfcompare")) {
        const ojson& sc = j["selfcompare"];
        if (sc.contains("include_policy"))
            app.include_policy = include_policy_from_string(sc["include_policy"].get<std::string>());
        app.selfcompare_template = sc.value("template_version", kSelfCompareTemplateVersion);
        if (sc.contains("solution_format"))
            app.selfcompare_format =
                solution_format_from_string(sc["solution_format"].get<std::string>());
        if (sc.contains("k")) app.selfcompare_k = sc["k"].get<int>();
    }
    if (j.contains("eval")) {
        const ojson& ev = j["eval"];
        if (ev.contains("solution_format"))
            app.eval.solution_format =
                solution_format_from_string(ev["solution_format"].get<std::string>());
        app.eval.temperature = ev.value("temperature", 0.0);
        if (ev.contains("max_problems") && !ev["max_problems"].is_null())
            app.eval.max_problems = ev["max_problems"].get<int>();
    }
    app.seed = j.value("seed", 0LL);
    return app;
}

Dataset ingest_by_source(const std::string& source, const fs::path& path, Split split) {
    if (source == "gsm8k") return ingest_gsm8k(path, split);
    if (source == "math") return ingest_math(path, split);
    if (source == "cmath") return ingest_cmath(path, split);
    if (source == "canonical") return read_canonical(path);
    throw IngestError("unknown source kind: " + source);
}

int report_violations(const std::vector<Violation>& violations) {
    for (const auto& v : violations) {
        std::cerr << "violation: " << to_string(v.kind) << " (problem " << v.problem_id << ")\n";
    }
    return kExitValidation;
}

// Shared command-line state collected by CLI11.
struct Args {
    std::string config_path;
    std::string source;
    std::string in_path;
    std::string split = "train";
    std::string out_path;
    std::string out_dir;
    std::string plan_path;
    std::string attempts_path;
    std::string completions_path;
    std::string completion_text;
    std::string completion_file;
    std::string reference;
    std::string format = "hash_delimited";
    std::string style = "markdown";
    std::string run_name;
    std::string cache_dir_override;
    std::optional<int> k;
    int round = 1;
    std::optional<long long> seed;
    std::optional<int> max_problems;
};

Gateway build_gateway(AppConfig& app, const Args& args) {
    if (!args.cache_dir_override.empty()) app.backend.cache_dir = args.cache_dir_override;
    return Gateway::from_config(app.backend);
}

long long effective_seed(const AppConfig& app, const Args& args) {
    return args.seed ? *args.seed : app.seed;
}

int cmd_ingest(const Args& args) {
    Split split = split_from_string(args.split);
    Dataset ds = ingest_by_source(args.source, args.in_path, split);
    auto violations = validate(ds);
    if (!violations.empty()) return report_violations(violations);

    RunManifest manifest("ingest", sha256_hex("{}"));
    manifest.add_input(args.in_path);
    fs::path out(args.out_path);
    fs::path manifest_path = out.string() + ".manifest.json";
    manifest.write(manifest_path);
    write_canonical(ds, out);
    manifest.add_output(out);
    manifest.finish(manifest_path);
    std::cerr << "ingested " << ds.problems.size() << " problems -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_stats(const Args& args) {
    Dataset ds = read_canonical(args.in_path);
    std::cout << stats_json(stats(ds)).dump(2) << "\n";
    return kExitOk;
}

int cmd_boost(const Args& args) {
    AppConfig app = load_app_config(args.config_path);
    app.boost.base_seed = effective_seed(app, args);
    Gateway gateway = build_gateway(app, args);
    Dataset ds = read_canonical(args.in_path);

    fs::path out_dir(args.out_dir);
    RunManifest manifest("boost", app.config_digest);
    manifest.add_input(args.in_path);
    fs::path manifest_path = out_dir / "manifest_boost.json";
    manifest.write(manifest_path);

    BoostOutput out = run_boost(ds, app.boost, gateway);
    write_boost_output(out, out_dir);
    manifest.add_output(out_dir / "boosted.jsonl");
    manifest.add_output(out_dir / "boost_records.jsonl");
    manifest.add_output(out_dir / "boost_manifest.json");
    manifest.finish(manifest_path);
    std::cerr << "boost: " << out.records.size() << " records, " << out.augmented.problems.size()
              << " verified -> " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_selfcompare_plan(const Args& args) {
    AppConfig app = load_app_config(args.config_path);
    Dataset ds = read_canonical(args.in_path);
    std::optional<int> k = args.k ? args.k : app.selfcompare_k;
    if (!k) throw std::runtime_error("k is required: pass --k or set selfcompare.k in the config");
    RoundPlan plan = make_partition(ds, *k, effective_seed(app, args));

    RunManifest manifest("selfcompare-plan", app.config_digest);
    manifest.add_input(args.in_path);
    fs::path out(args.out_path);
    fs::path manifest_path = out.string() + ".manifest.json";
    manifest.write(manifest_path);
    write_round_plan(plan, out);
    manifest.add_output(out);
    manifest.finish(manifest_path);
    std::cerr << "plan: k=" << plan.k << " over " << ds.problems.size() << " problems -> "
              << out.string() << "\n";
    return kExitOk;
}

int cmd_selfcompare_collect(const Args& args) {
    AppConfig app = load_app_config(args.config_path);
    Gateway gateway = build_gateway(app, args);
    Dataset ds = read_canonical(args.in_path);
    RoundPlan plan = read_round_plan(args.plan_path);
    auto sub = round_problems(ds, plan, args.round);
    auto attempts =
        collect_attempts(sub, args.round, gateway, app.selfcompare_format, effective_seed(app, args));

    RunManifest manifest("selfcompare-collect", app.config_digest);
    manifest.add_input(args.in_path);
    manifest.add_input(args.plan_path);
    fs::path out(args.out_path);
    fs::path manifest_path = out.string() + ".manifest.json";
    manifest.write(manifest_path);
    write_attempts(attempts, out);
    manifest.add_output(out);
    manifest.finish(manifest_path);
    std::cerr << "collected " << attempts.size() << " attempts for round " << args.round << "\n";
    return kExitOk;
}

int cmd_selfcompare_build(const Args& args) {
    AppConfig app = load_app_config(args.config_path);
    Gateway gateway = build_gateway(app, args);
    Dataset ds = read_canonical(args.in_path);
    RoundPlan plan = read_round_plan(args.plan_path);

    std::optional<std::vector<Attempt>> precollected;
    if (!args.attempts_path.empty()) precollected = read_attempts(args.attempts_path);

    fs::path out_dir(args.out_dir);
    RunManifest manifest("selfcompare-build", app.config_digest);
    manifest.add_input(args.in_path);
    manifest.add_input(args.plan_path);
    if (precollected) manifest.add_input(args.attempts_path);
    fs::path manifest_path = out_dir / ("manifest_selfcompare_build_" + std::to_string(args.round) + ".json");
    manifest.write(manifest_path);

    RoundOutput out = run_round(ds, plan, args.round, gateway, app.include_policy,
                                app.selfcompare_format, app.selfcompare_template,
                                effective_seed(app, args), precollected ? &*precollected : nullptr);
    write_round_output(out, args.round, out_dir);
    manifest.add_output(out_dir / ("sft_round_" + std::to_string(args.round) + ".jsonl"));
    manifest.add_output(out_dir / ("round_manifest_" + std::to_string(args.round) + ".json"));
    manifest.finish(manifest_path);
    std::cerr << "round " << args.round << ": " << out.examples.size() << " sft examples -> "
              << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_eval(const Args& args) {
    AppConfig app = load_app_config(args.config_path);
    Gateway gateway = build_gateway(app, args);
    Dataset ds = read_canonical(args.in_path);
    EvalConfig eval_config = app.eval;
    eval_config.base_seed = effective_seed(app, args);
    if (args.max_problems) eval_config.max_problems = args.max_problems;
    std::string run_name = args.run_name.empty() ? ds.name : args.run_name;

    fs::path out_dir(args.out_dir);
    RunManifest manifest("eval", app.config_digest);
    manifest.add_input(args.in_path);
    fs::path manifest_path = out_dir / "manifest_eval.json";
    manifest.write(manifest_path);

    EvalOutput out = run_eval(ds, eval_config, gateway);

    bool total_failure = !out.completions.empty();
    for (const auto& c : out.completions) {
        if (c.finish_reason != FinishReason::error) total_failure = false;
    }
    if (total_failure) {
        std::cerr << "error: backend failed for every problem\n";
        return kExitError;
    }

    write_completions(out.completions, out_dir / "completions.jsonl");
    std::string md = render_report(out.report, ReportStyle::markdown, run_name);
    std::string js = render_report(out.report, ReportStyle::json, run_name);
    {
        std::ofstream f(out_dir / "report.md", std::ios::binary);
        f << md;
    }
    {
        std::ofstream f(out_dir / "report.json", std::ios::binary);
        f << js;
    }
    manifest.add_output(out_dir / "completions.jsonl");
    manifest.add_output(out_dir / "report.md");
    manifest.add_output(out_dir / "report.json");
    manifest.finish(manifest_path);
    std::cout << md;
    return kExitOk;
}

int cmd_regrade(const Args& args) {
    Dataset ds = read_canonical(args.in_path);
    auto completions = read_completions(args.completions_path);
    GradeReport report = regrade(completions, ds, solution_format_from_string(args.format));
    std::string run_name = args.run_name.empty() ? ds.name : args.run_name;
    std::cout << render_report(report, ReportStyle::markdown, run_name);
    if (!args.out_dir.empty()) {
        fs::path out_dir(args.out_dir);
        RunManifest manifest("regrade", sha256_hex("{}"));
        manifest.add_input(args.completions_path);
        manifest.add_input(args.in_path);
        fs::path manifest_path = out_dir / "manifest_regrade.json";
        manifest.write(manifest_path);
        {
            std::ofstream f(out_dir / "report.json", std::ios::binary);
            f << render_report(report, ReportStyle::json, run_name);
        }
        manifest.add_output(out_dir / "report.json");
        manifest.finish(manifest_path);
    }
    return kExitOk;
}

int cmd_grade(const Args& args) {
    std::string completion = args.completion_text;
    if (!args.completion_file.empty()) {
        std::ifstream in(args.completion_file, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open completion file: " + args.completion_file);
        completion.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    CanonicalAnswer reference = normalize(args.reference);
    GradeResult result = grade_completion("adhoc", reference, completion,
                                          solution_format_from_string(args.format));
    std::cout << grade_result_json(result).dump(2) << "\n";
    if (result.correct) return kExitOk;
    if (result.failure && *result.failure == GradeFailure::NoAnswerFound) return kExitError;
    return kExitIncorrect;
}

fs::path cache_dir_from_args(const Args& args) {
    if (!args.cache_dir_override.empty()) return args.cache_dir_override;
    AppConfig app = load_app_config(args.config_path);
    if (app.backend.cache_dir.empty()) throw std::runtime_error("no cache directory configured");
    return app.backend.cache_dir;
}

int cmd_cache_ls(const Args& args) {
    fs::path dir = cache_dir_from_args(args);
    if (!fs::exists(dir)) return kExitOk;
    std::vector<std::pair<std::string, std::uintmax_t>> entries;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json")
            entries.emplace_back(e.path().stem().string(), e.file_size());
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& [key, size] : entries) std::cout << key << " " << size << "\n";
    std::cerr << entries.size() << " cache entries\n";
    return kExitOk;
}

int cmd_cache_clear(const Args& args) {
    fs::path dir = cache_dir_from_args(args);
    std::size_t removed = 0;
    if (fs::exists(dir)) {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file() && e.path().extension() == ".json") {
                fs::remove(e.path());
                ++removed;
            }
        }
    }
    std::cerr << "removed " << removed << " cache entries\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli("mathforge: math SFT dataset construction and pass@1 evaluation");
    cli.set_version_flag("--version", kVersion);
    cli.require_subcommand(1);

    Args args;

    auto add_seed = [&args](CLI::App* cmd) {
        cmd->add_option("--seed", args.seed, "override the config seed");
    };
    auto add_config = [&args](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "JSON config file");
    };
    auto add_cache_dir = [&args](CLI::App* cmd) {
        cmd->add_option("--cache-dir", args.cache_dir_override, "override the response cache directory");
    };

    CLI::App* ingest = cli.add_subcommand("ingest", "convert a benchmark file to canonical JSONL");
    ingest->add_option("--source", args.source, "gsm8k | math | cmath | canonical")->required();
    ingest->add_option("--in", args.in_path, "input file or directory")->required();
    ingest->add_option("--split", args.split, "train | test | derived");
    ingest->add_option("--out", args.out_path, "canonical JSONL output")->required();

    CLI::App* stats_cmd = cli.add_subcommand("stats", "print dataset statistics");
    stats_cmd->add_option("--in", args.in_path, "canonical JSONL dataset")->required();

    CLI::App* boost = cli.add_subcommand("boost", "augment questions and verify solutions");
    boost->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    boost->add_option("--out-dir", args.out_dir, "output directory")->required();
    add_config(boost);
    add_seed(boost);
    add_cache_dir(boost);

    CLI::App* sc = cli.add_subcommand("selfcompare", "self-compare SFT data construction");
    sc->require_subcommand(1);
    CLI::App* sc_plan = sc->add_subcommand("plan", "partition a dataset into k rounds");
    sc_plan->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    sc_plan->add_option("--k", args.k, "number of rounds (falls back to the config's selfcompare.k)");
    sc_plan->add_option("--out", args.out_path, "round plan JSON output")->required();
    add_config(sc_plan);
    add_seed(sc_plan);
    CLI::App* sc_collect = sc->add_subcommand("collect", "collect model attempts for one round");
    sc_collect->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    sc_collect->add_option("--plan", args.plan_path, "round plan JSON")->required();
    sc_collect->add_option("--round", args.round, "round number (1-based)")->required();
    sc_collect->add_option("--out", args.out_path, "attempts JSONL output")->required();
    add_config(sc_collect);
    add_seed(sc_collect);
    add_cache_dir(sc_collect);
    CLI::App* sc_build = sc->add_subcommand("build", "build the round's SFT dataset");
    sc_build->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    sc_build->add_option("--plan", args.plan_path, "round plan JSON")->required();
    sc_build->add_option("--round", args.round, "round number (1-based)")->required();
    sc_build->add_option("--attempts", args.attempts_path, "reuse previously collected attempts");
    sc_build->add_option("--out-dir", args.out_dir, "output directory")->required();
    add_config(sc_build);
    add_seed(sc_build);
    add_cache_dir(sc_build);

    CLI::App* eval_cmd = cli.add_subcommand("eval", "run a backend over a dataset and report pass@1");
    eval_cmd->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    eval_cmd->add_option("--out-dir", args.out_dir, "output directory")->required();
    eval_cmd->add_option("--max-problems", args.max_problems, "cap the number of problems");
    eval_cmd->add_option("--run-name", args.run_name, "label for the report row");
    add_config(eval_cmd);
    add_seed(eval_cmd);
    add_cache_dir(eval_cmd);

    CLI::App* regrade_cmd = cli.add_subcommand("regrade", "re-grade persisted completions offline");
    regrade_cmd->add_option("--completions", args.completions_path, "completions.jsonl")->required();
    regrade_cmd->add_option("--in", args.in_path, "canonical JSONL dataset")->required();
    regrade_cmd->add_option("--format", args.format, "hash_delimited | boxed | last_number");
    regrade_cmd->add_option("--run-name", args.run_name, "label for the report row");
    regrade_cmd->add_option("--out-dir", args.out_dir, "optional report output directory");

    CLI::App* grade_cmd = cli.add_subcommand("grade", "grade one completion against a reference");
    grade_cmd->add_option("--completion", args.completion_text, "completion text");
    grade_cmd->add_option("--completion-file", args.completion_file, "read completion from a file");
    grade_cmd->add_option("--reference", args.reference, "reference answer")->required();
    grade_cmd->add_option("--format", args.format, "hash_delimited | boxed | last_number");

    CLI::App* cache = cli.add_subcommand("cache", "inspect the response cache");
    cache->require_subcommand(1);
    CLI::App* cache_ls = cache->add_subcommand("ls", "list cache entries");
    add_config(cache_ls);
    add_cache_dir(cache_ls);
    CLI::App* cache_clear = cache->add_subcommand("clear", "delete all cache entries");
    add_config(cache_clear);
    add_cache_dir(cache_clear);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = cli.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*ingest) return cmd_ingest(args);
        if (*stats_cmd) return cmd_stats(args);
        if (*boost) return cmd_boost(args);
        if (*sc_plan) return cmd_selfcompare_plan(args);
        if (*sc_collect) return cmd_selfcompare_collect(args);
        if (*sc_build) return cmd_selfcompare_build(args);
        if (*eval_cmd) return cmd_eval(args);
        if (*regrade_cmd) return cmd_regrade(args);
        if (*grade_cmd) return cmd_grade(args);
        if (*cache_ls) return cmd_cache_ls(args);
        if (*cache_clear) return cmd_cache_clear(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    std::cerr << "error: no command\n";
    return kExitError;
}
