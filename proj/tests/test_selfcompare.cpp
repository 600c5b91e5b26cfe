#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "mathforge/selfcompare.hpp"
#include "support.hpp"

using namespace mathforge;
using namespace mftest;

namespace {

Dataset numbered_dataset(int n) {
    Dataset ds;
    ds.name = "numbered";
    ds.split = Split::train;
    for (int i = 0; i < n; ++i) {
        Problem p;
        p.id = "custom-train-" + std::to_string(i);
        p.source = Source::custom;
        p.split = Split::train;
        p.question = "Question number " + std::to_string(i) + "?";
        p.reference_solution = "Work.\n#### " + std::to_string(i);
        p.reference_answer = normalize(std::to_string(i));
        ds.problems.push_back(std::move(p));
    }
    return ds;
}

}  // namespace

TEST_CASE("make_partition: balanced slices, disjoint, covering, deterministic") {
    Dataset ds = numbered_dataset(10);
    RoundPlan plan = make_partition(ds, 3, 7);
    REQUIRE(plan.partition.size() == 3);
    CHECK(plan.partition[0].size() == 4);
    CHECK(plan.partition[1].size() == 3);
    CHECK(plan.partition[2].size() == 3);

    std::set<std::string> all;
    for (const auto& part : plan.partition) {
        for (const auto& id : part) CHECK(all.insert(id).second);  // disjoint
    }
    CHECK(all.size() == 10);

    RoundPlan again = make_partition(ds, 3, 7);
    CHECK(plan.partition == again.partition);
    RoundPlan other_seed = make_partition(ds, 3, 8);
    CHECK(plan.partition != other_seed.partition);

    RoundPlan single = make_partition(ds, 1, 0);
    CHECK(single.partition.size() == 1);
    CHECK(single.partition[0].size() == 10);

    CHECK_THROWS_AS(make_partition(ds, 11, 0), KTooLarge);
    CHECK_THROWS_AS(make_partition(ds, 0, 0), KZero);
}

TEST_CASE("round plan json roundtrip preserves the digest") {
    Dataset ds = numbered_dataset(9);
    RoundPlan plan = make_partition(ds, 3, 7);
    auto dir = temp_dir("plan");
    write_round_plan(plan, dir / "plan.json");
    RoundPlan back = read_round_plan(dir / "plan.json");
    CHECK(back.partition == plan.partition);
    CHECK(back.digest() == plan.digest());
}

TEST_CASE("collect_attempts grades as it goes") {
    Dataset ds = numbered_dataset(4);
    std::vector<const Problem*> sub;
    for (const auto& p : ds.problems) sub.push_back(&p);

    // correct for 0, 1, 3; wrong for 2; order follows the dataset
    auto backend = std::make_unique<SequenceBackend>(std::vector<BackendReply>{
        ok_reply("#### 0"), ok_reply("#### 1"), ok_reply("#### 99"), ok_reply("#### 3")});
    Gateway gw(std::move(backend), plain_config());

    auto attempts = collect_attempts(sub, 1, gw, SolutionFormat::HashDelimited, 0);
    REQUIRE(attempts.size() == 4);
    int correct = 0;
    for (const auto& a : attempts) correct += a.correct ? 1 : 0;
    CHECK(correct == 3);
    CHECK_FALSE(attempts[2].correct);
    CHECK(attempts[2].extracted->str() == "99");

    // prose without a marker is a valid incorrect attempt
    auto backend2 = std::make_unique<SequenceBackend>(std::vector<BackendReply>{
        ok_reply("I think the answer is around nine-ish")});
    Gateway gw2(std::move(backend2), plain_config());
    std::vector<const Problem*> one = {sub[0]};
    auto prose = collect_attempts(one, 1, gw2, SolutionFormat::HashDelimited, 0);
    REQUIRE(prose.size() == 1);
    CHECK_FALSE(prose[0].correct);
    CHECK_FALSE(prose[0].extracted);
}

TEST_CASE("build_selfcompare_prompt embeds question and prior answer verbatim") {
    Dataset ds = numbered_dataset(1);
    Attempt attempt;
    attempt.problem_id = ds.problems[0].id;
    attempt.round = 1;
    attempt.answer_text = "My previous try said\n#### 19";

    SelfComparePrompt p =
        build_selfcompare_prompt(ds.problems[0], attempt, kSelfCompareTemplateVersion);
    std::string rendered = p.render();
    CHECK(rendered.find(ds.problems[0].question) != std::string::npos);
    CHECK(rendered.find(attempt.answer_text) != std::string::npos);

    Attempt empty = attempt;
    empty.answer_text = "  \n ";
    CHECK_THROWS_AS(build_selfcompare_prompt(ds.problems[0], empty, kSelfCompareTemplateVersion),
                    EmptyPriorAnswer);

    CHECK_THROWS_AS(build_selfcompare_prompt(ds.problems[0], attempt, "selfcompare-v999"),
                    UnknownTemplateVersion);

    Attempt mismatched = attempt;
    mismatched.problem_id = "someone-else";
    CHECK_THROWS_AS(build_selfcompare_prompt(ds.problems[0], mismatched, kSelfCompareTemplateVersion),
                    SelfCompareError);
}

TEST_CASE("merge_with_origin concatenates, origin first, no drops") {
    auto mk = [](SftOrigin origin, int round, const std::string& id) {
        SftExample e;
        e.prompt = "p-" + id;
        e.target = "t-" + id;
        e.origin = origin;
        e.round = round;
        e.problem_id = id;
        return e;
    };
    std::vector<SftExample> base;
    for (int i = 0; i < 100; ++i) base.push_back(mk(SftOrigin::base, 0, "b" + std::to_string(i)));
    std::vector<SftExample> sc;
    for (int i = 0; i < 30; ++i) sc.push_back(mk(SftOrigin::selfcompare, 1, "s" + std::to_string(i)));

    auto merged = merge_with_origin(base, sc);
    REQUIRE(merged.size() == 130);
    for (int i = 0; i < 100; ++i) CHECK(merged[i].origin == SftOrigin::base);
    for (int i = 100; i < 130; ++i) CHECK(merged[i].origin == SftOrigin::selfcompare);

    CHECK(merge_with_origin(base, {}).size() == base.size());
    CHECK(merge_with_origin({}, sc).size() == sc.size());
}

TEST_CASE("run_round: counts per include policy, manifest, verbatim invariants") {
    Dataset ds = numbered_dataset(9);
    RoundPlan plan = make_partition(ds, 3, 7);

    SUBCASE("include all: base 9 + 3 = 12") {
        auto dir = temp_dir("round_all");
        std::ofstream f(dir / "script.jsonl");
        for (int i = 0; i < 9; ++i) {
            f << R"({"match": {"contains_all": ["Solve", "Question number )" << i
              << R"(?"]}, "response": "#### )" << i << R"("})" << "\n";
        }
        f.close();
        Gateway gw(mock_from_script(dir / "script.jsonl"), plain_config());
        RoundOutput out = run_round(ds, plan, 2, gw, IncludePolicy::all,
                                    SolutionFormat::HashDelimited, kSelfCompareTemplateVersion, 0);
        CHECK(out.attempts.size() == 3);
        CHECK(out.examples.size() == 12);

        int base_count = 0;
        for (const auto& e : out.examples) {
            if (e.origin == SftOrigin::base) {
                ++base_count;
                CHECK(e.round == 0);
            } else {
                CHECK(e.round == 2);
                const Problem* p = ds.find(e.problem_id);
                REQUIRE(p);
                CHECK(e.prompt.find(p->question) != std::string::npos);
                CHECK(e.target == p->reference_solution);
            }
        }
        CHECK(base_count == 9);
        CHECK(out.manifest["total_examples"] == 12);
        CHECK(out.manifest["selfcompare_examples"] == 3);

        write_round_output(out, 2, dir / "out");
        CHECK(fs::exists(dir / "out" / "sft_round_2.jsonl"));
        CHECK(fs::exists(dir / "out" / "round_manifest_2.json"));
    }

    SUBCASE("incorrect_only keeps only wrong attempts") {
        auto dir = temp_dir("round_wrong");
        // single-round plan so membership is the whole dataset
        RoundPlan whole = make_partition(ds, 1, 0);
        std::ofstream f2(dir / "script2.jsonl");
        for (int i = 0; i < 9; ++i) {
            int answer = (i == 4) ? 999 : i;
            f2 << R"({"match": {"contains_all": ["Solve", "Question number )" << i
               << R"(?"]}, "response": "#### )" << answer << R"("})" << "\n";
        }
        f2.close();
        Gateway gw(mock_from_script(dir / "script2.jsonl"), plain_config());
        RoundOutput out = run_round(ds, whole, 1, gw, IncludePolicy::incorrect_only,
                                    SolutionFormat::HashDelimited, kSelfCompareTemplateVersion, 0);
        CHECK(out.attempts.size() == 9);
        CHECK(out.examples.size() == 10);  // 9 base + 1 incorrect
        int sc_count = 0;
        for (const auto& e : out.examples) {
            if (e.origin == SftOrigin::selfcompare) {
                ++sc_count;
                CHECK(e.problem_id == "custom-train-4");
            }
        }
        CHECK(sc_count == 1);
    }

    SUBCASE("round out of range") {
        Gateway gw(std::make_unique<ConstantBackend>("#### 0"), plain_config());
        CHECK_THROWS_AS(run_round(ds, plan, 4, gw, IncludePolicy::all,
                                  SolutionFormat::HashDelimited, kSelfCompareTemplateVersion, 0),
                        RoundOutOfRange);
        CHECK_THROWS_AS(run_round(ds, plan, 0, gw, IncludePolicy::all,
                                  SolutionFormat::HashDelimited, kSelfCompareTemplateVersion, 0),
                        RoundOutOfRange);
    }
}

TEST_CASE("partition property: 1000 random triples") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 1 + static_cast<int>(rng() % 500);
        int k = 1 + static_cast<int>(rng() % n);
        long long seed = static_cast<long long>(rng());
        Dataset ds = numbered_dataset(n);

        RoundPlan plan = make_partition(ds, k, seed);
        REQUIRE(plan.partition.size() == static_cast<std::size_t>(k));

        std::set<std::string> all;
        std::size_t min_size = SIZE_MAX, max_size = 0, total = 0;
        for (const auto& part : plan.partition) {
            min_size = std::min(min_size, part.size());
            max_size = std::max(max_size, part.size());
            total += part.size();
            for (const auto& id : part) {
                if (!all.insert(id).second) FAIL("duplicate id across partitions");
            }
        }
        if (total != static_cast<std::size_t>(n)) FAIL("partition does not cover the dataset");
        if (max_size - min_size > 1) FAIL("partition sizes differ by more than 1");

        RoundPlan again = make_partition(ds, k, seed);
        if (plan.partition != again.partition) FAIL("partition is not deterministic");
    }
}

TEST_CASE("running every round with include_policy all covers the whole origin") {
    Dataset ds = numbered_dataset(9);
    RoundPlan plan = make_partition(ds, 3, 7);

    auto dir = temp_dir("round_union");
    std::ofstream f(dir / "script.jsonl");
    for (int i = 0; i < 9; ++i) {
        f << R"({"match": {"contains_all": ["Solve", "Question number )" << i
          << R"(?"]}, "response": "#### )" << i << R"("})" << "\n";
    }
    f.close();
    Gateway gw(mock_from_script(dir / "script.jsonl"), plain_config());

    std::set<std::string> covered;
    for (int r = 1; r <= plan.k; ++r) {
        RoundOutput out = run_round(ds, plan, r, gw, IncludePolicy::all,
                                    SolutionFormat::HashDelimited, kSelfCompareTemplateVersion, 0);
        for (const auto& e : out.examples) {
            if (e.origin == SftOrigin::selfcompare) covered.insert(e.problem_id);
        }
    }
    std::set<std::string> origin_ids;
    for (const auto& p : ds.problems) origin_ids.insert(p.id);
    CHECK(covered == origin_ids);
}

TEST_CASE("attempts file roundtrip") {
    auto dir = temp_dir("attempts");
    std::vector<Attempt> attempts;
    Attempt a;
    a.problem_id = "p1";
    a.round = 2;
    a.answer_text = "text with\nnewlines #### 7";
    a.extracted = normalize("7");
    a.correct = true;
    attempts.push_back(a);
    Attempt b;
    b.problem_id = "p2";
    b.round = 2;
    b.answer_text = "no answer marker";
    b.correct = false;
    attempts.push_back(b);

    write_attempts(attempts, dir / "attempts.jsonl");
    auto back = read_attempts(dir / "attempts.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].problem_id == "p1");
    CHECK(back[0].answer_text == attempts[0].answer_text);
    CHECK(back[0].correct);
    CHECK(back[0].extracted->str() == "7");
    CHECK_FALSE(back[1].extracted);
}
