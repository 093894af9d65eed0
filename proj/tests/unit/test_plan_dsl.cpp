// SPDX-License-Identifier: Apache-2.0
#include <relep/plan_dsl.hpp>
#include <relep/skill_library.hpp>

#include "test_doctest.hpp"

using namespace relep;

namespace
{

ParseResult parse(std::string_view text)
{
    return parsePlan(text, defaultLibrary());
}

DiagnosticKind firstKind(const ParseResult& result)
{
    REQUIRE_FALSE(result.ok());
    return result.diagnostics().front().kind;
}

} // namespace

TEST_CASE("gold plan parses into calls and a terminal")
{
    auto const result = parse("Navigate(fridge)\nPull(fridge door, backward)\nGrasp(water bottle)\nDone\n");
    REQUIRE(result.ok());
    auto const& plan = result.plan();
    REQUIRE(plan.steps.size() == 3);
    CHECK(plan.steps[1] == SkillCall { "Pull", { "fridge door", "backward" } });
    CHECK(plan.terminal == Terminal::Done);
}

TEST_CASE("bare terminals")
{
    CHECK(parse("Done").plan().isBareDone());
    CHECK(parse("Pending").plan().isBarePending());
    CHECK(parse("  # nothing to do\n\nDone\n\n").plan().isBareDone());
}

TEST_CASE("skill names match case-insensitively and keep library casing")
{
    auto const result = parse("navigate(kitchen)\neqa(what is on the table)\nDone");
    REQUIRE(result.ok());
    CHECK(result.plan().steps[0].skill == "Navigate");
    CHECK(result.plan().steps[1].skill == "EQA");
}

TEST_CASE("directions are lowercased")
{
    auto const result = parse("Push(chair, FORWARD)\nDone");
    REQUIRE(result.ok());
    CHECK(result.plan().steps[0].args[1] == "forward");
}

TEST_CASE("diagnostics carry the offending line")
{
    SUBCASE("missing terminal")
    {
        auto const result = parse("Navigate(fridge)\nGrasp(cup)");
        CHECK(firstKind(result) == DiagnosticKind::MissingTerminal);
    }
    SUBCASE("empty input")
    {
        auto const result = parse("");
        CHECK(firstKind(result) == DiagnosticKind::MissingTerminal);
        CHECK(result.diagnostics().front().line == 1);
    }
    SUBCASE("unknown skill")
    {
        auto const result = parse("Navigate(fridge)\nOpen(fridge)\nDone");
        CHECK(firstKind(result) == DiagnosticKind::UnknownSkill);
        CHECK(result.diagnostics().front().line == 2);
    }
    SUBCASE("arity")
    {
        CHECK(firstKind(parse("Put(cup, table)\nDone")) == DiagnosticKind::Arity);
        CHECK(firstKind(parse("Navigate()\nDone")) == DiagnosticKind::Arity);
    }
    SUBCASE("pull has no forward")
    {
        auto const result = parse("Pull(drawer, forward)\nDone");
        CHECK(firstKind(result) == DiagnosticKind::BadArgument);
    }
    SUBCASE("push has no backward")
    {
        CHECK(firstKind(parse("Push(drawer, backward)\nDone")) == DiagnosticKind::BadArgument);
    }
    SUBCASE("wait needs a count")
    {
        CHECK(firstKind(parse("Wait(soon)\nDone")) == DiagnosticKind::BadArgument);
        CHECK(parse("Wait(3)\nDone").ok());
    }
    SUBCASE("empty argument")
    {
        CHECK(firstKind(parse("Put(cup, , left)\nDone")) == DiagnosticKind::BadArgument);
    }
    SUBCASE("steps after a terminal")
    {
        auto const result = parse("Navigate(fridge)\nDone\nGrasp(cup)\nDone");
        CHECK(firstKind(result) == DiagnosticKind::TrailingContent);
        CHECK(result.diagnostics().front().line == 3);
    }
    SUBCASE("syntax")
    {
        CHECK(firstKind(parse("Navigate(fridge\nDone")) == DiagnosticKind::Syntax);
        CHECK(firstKind(parse("Navigate fridge\nDone")) == DiagnosticKind::Syntax);
        CHECK(firstKind(parse("Grasp(cup (red))\nDone")) == DiagnosticKind::Syntax);
    }
    SUBCASE("text after the call")
    {
        CHECK(firstKind(parse("Grasp(cup) carefully\nDone")) == DiagnosticKind::TrailingContent);
    }
}

TEST_CASE("failure results never carry a plan")
{
    auto const result = parse("Open(door)\nDone");
    CHECK_FALSE(result.ok());
    CHECK_THROWS(static_cast<void>(result.plan()));
    CHECK_THROWS(ParseResult::failure({}));
}

TEST_CASE("render is canonical and round-trips")
{
    auto const text = "navigate( fridge )\npull(fridge door,BACKWARD)\nDone";
    auto const plan = parse(text).plan();
    CHECK(renderPlan(plan) == "Navigate(fridge)\nPull(fridge door, backward)\nDone");
    CHECK(parse(renderPlan(plan)).plan() == plan);
    CHECK(renderPlan(Plan {}) == "Done");
}

TEST_CASE("suffix keeps the terminal")
{
    auto const plan = parse("Navigate(bedroom)\nPush(light switch, down)\nPending").plan();
    CHECK(plan.suffix(1).steps.size() == 1);
    CHECK(plan.suffix(1).terminal == Terminal::Pending);
    CHECK(plan.suffix(2).isBarePending());
    CHECK(plan.suffix(9).isBarePending());
}

TEST_CASE("equivalence ignores case, spacing and articles")
{
    auto const a = parse("Navigate(the Fridge)\nGrasp(a  water bottle)\nDone").plan();
    auto const b = parse("Navigate(fridge)\nGrasp(water bottle)\nDone").plan();
    CHECK(plansEquivalent(a, b));
    auto const c = parse("Navigate(fridge)\nGrasp(water bottle)\nPending").plan();
    CHECK_FALSE(plansEquivalent(a, c));
    CHECK(normalizeReference("  The   Red Cup ") == "red cup");
    CHECK(normalizeReference("the") == "the");
}

TEST_CASE("diagnostic formatting")
{
    auto const d = ParseDiagnostic { .line = 4, .kind = DiagnosticKind::Arity, .message = "Put takes 3 arguments" };
    CHECK(formatDiagnostic(d) == "line 4: arity: Put takes 3 arguments");
}
