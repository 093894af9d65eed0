// SPDX-License-Identifier: Apache-2.0
#include <relep/plan_dsl.hpp>
#include <relep/skill_library.hpp>
#include <relep/text.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace relep
{

Plan Plan::suffix(std::size_t count) const
{
    auto result = Plan { .steps = {}, .terminal = terminal };
    if (count < steps.size())
        result.steps.assign(steps.begin() + static_cast<std::ptrdiff_t>(count), steps.end());
    return result;
}

ParseResult ParseResult::success(Plan plan)
{
    auto result = ParseResult {};
    result._plan = std::move(plan);
    return result;
}

ParseResult ParseResult::failure(std::vector<ParseDiagnostic> diagnostics)
{
    if (diagnostics.empty())
        throw std::logic_error("ParseResult::failure requires at least one diagnostic");
    auto result = ParseResult {};
    result._diagnostics = std::move(diagnostics);
    return result;
}

const Plan& ParseResult::plan() const
{
    if (!_plan)
        throw std::logic_error("ParseResult holds diagnostics, not a plan");
    return *_plan;
}

std::string_view toString(Terminal terminal) noexcept
{
    return terminal == Terminal::Done ? "Done" : "Pending";
}

std::string_view toString(DiagnosticKind kind) noexcept
{
    switch (kind)
    {
        case DiagnosticKind::Syntax: return "syntax";
        case DiagnosticKind::UnknownSkill: return "unknown-skill";
        case DiagnosticKind::Arity: return "arity";
        case DiagnosticKind::BadArgument: return "bad-argument";
        case DiagnosticKind::MissingTerminal: return "missing-terminal";
        case DiagnosticKind::TrailingContent: return "trailing-content";
    }
    return "syntax";
}

namespace
{

struct SourceLine
{
    std::size_t number;
    std::string_view text; // trimmed
};

bool isIdentStart(char c)
{
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool isIdentChar(char c)
{
    return isIdentStart(c) || (c >= '0' && c <= '9');
}

std::optional<Terminal> terminalOf(std::string_view line)
{
    if (line == "Done")
        return Terminal::Done;
    if (line == "Pending")
        return Terminal::Pending;
    return std::nullopt;
}

bool isNonNegativeInteger(std::string_view text)
{
    if (text.empty() || text.size() > 9)
        return false;
    return std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Parses one `Name(arg, ...)` line; appends diagnostics and returns nullopt on error.
std::optional<SkillCall> parseCall(const SourceLine& line,
                                   const SkillLibrary& library,
                                   std::vector<ParseDiagnostic>& out)
{
    auto const text = line.text;
    auto report = [&](DiagnosticKind kind, std::string message) {
        out.push_back(ParseDiagnostic { .line = line.number, .kind = kind, .message = std::move(message) });
    };

    auto pos = std::size_t { 0 };
    if (!isIdentStart(text[0]))
    {
        report(DiagnosticKind::Syntax, fmt::format("expected a skill name, found '{}'", text));
        return std::nullopt;
    }
    while (pos < text.size() && isIdentChar(text[pos]))
        ++pos;
    auto const name = text.substr(0, pos);
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
        ++pos;

    if (pos >= text.size() || text[pos] != '(')
    {
        report(DiagnosticKind::Syntax, fmt::format("expected '(' after '{}'", name));
        return std::nullopt;
    }
    auto const open = pos;
    auto const close = text.find(')', open + 1);
    auto const nested = text.find('(', open + 1);
    if (close == std::string_view::npos)
    {
        report(DiagnosticKind::Syntax, "unbalanced parentheses: missing ')'");
        return std::nullopt;
    }
    if (nested != std::string_view::npos && nested < close)
    {
        report(DiagnosticKind::Syntax, "unbalanced parentheses: nested '(' inside an argument list");
        return std::nullopt;
    }
    auto const rest = trim(text.substr(close + 1));
    if (!rest.empty())
    {
        if (rest.find_first_of("()") != std::string_view::npos)
            report(DiagnosticKind::Syntax, "unbalanced parentheses after the argument list");
        else
            report(DiagnosticKind::TrailingContent, fmt::format("unexpected '{}' after ')'", rest));
        return std::nullopt;
    }

    auto const* spec = library.find(name);
    if (spec == nullptr)
    {
        report(DiagnosticKind::UnknownSkill, fmt::format("unknown skill '{}'", name));
        return std::nullopt;
    }

    auto call = SkillCall { .skill = spec->name, .args = {} };
    auto const inner = text.substr(open + 1, close - open - 1);
    if (!trim(inner).empty())
    {
        for (auto const piece: split(inner, ','))
            call.args.emplace_back(trim(piece));
    }

    if (call.args.size() != spec->arity())
    {
        report(DiagnosticKind::Arity,
               fmt::format("{} takes {} argument{}, got {}",
                           spec->signature(),
                           spec->arity(),
                           spec->arity() == 1 ? "" : "s",
                           call.args.size()));
        return std::nullopt;
    }

    auto ok = true;
    for (auto i = std::size_t { 0 }; i < call.args.size(); ++i)
    {
        auto& arg = call.args[i];
        auto const role = spec->argRoles[i];
        if (arg.empty())
        {
            report(DiagnosticKind::BadArgument, fmt::format("argument {} ({}) of {} is empty", i + 1, toString(role), spec->name));
            ok = false;
            continue;
        }
        if (role == ArgRole::Direction)
        {
            arg = toLower(arg);
            if (!spec->acceptsDirection(arg))
            {
                report(DiagnosticKind::BadArgument,
                       fmt::format("'{}' is not a {} direction; expected one of: {}",
                                   arg,
                                   spec->name,
                                   join(*spec->directionDomain, ", ")));
                ok = false;
            }
        }
        else if (role == ArgRole::Integer && !isNonNegativeInteger(arg))
        {
            report(DiagnosticKind::BadArgument,
                   fmt::format("'{}' is not a non-negative integer for {}", arg, spec->name));
            ok = false;
        }
    }
    if (!ok)
        return std::nullopt;
    return call;
}

} // namespace

ParseResult parsePlan(std::string_view text, const SkillLibrary& library)
{
    auto lines = std::vector<SourceLine> {};
    auto lineCount = std::size_t { 0 };
    for (auto raw: split(text, '\n'))
    {
        ++lineCount;
        auto const trimmed = trim(raw);
        if (trimmed.empty() || trimmed.front() == '#')
            continue;
        lines.push_back(SourceLine { .number = lineCount, .text = trimmed });
    }

    auto diagnostics = std::vector<ParseDiagnostic> {};
    if (lines.empty())
    {
        diagnostics.push_back(ParseDiagnostic {
            .line = lineCount == 0 ? 1 : lineCount,
            .kind = DiagnosticKind::MissingTerminal,
            .message = "plan is empty; expected a final 'Done' or 'Pending' line",
        });
        return ParseResult::failure(std::move(diagnostics));
    }

    auto plan = Plan {};
    auto const& last = lines.back();
    auto const terminal = terminalOf(last.text);
    if (terminal)
        plan.terminal = *terminal;

    auto const callCount = terminal ? lines.size() - 1 : lines.size();
    for (auto i = std::size_t { 0 }; i < callCount; ++i)
    {
        auto const& line = lines[i];
        if (terminalOf(line.text))
        {
            diagnostics.push_back(ParseDiagnostic {
                .line = lines[i + 1].number,
                .kind = DiagnosticKind::TrailingContent,
                .message = fmt::format("content after terminal '{}' on line {}", line.text, line.number),
            });
            continue;
        }
        if (auto call = parseCall(line, library, diagnostics))
            plan.steps.push_back(std::move(*call));
    }

    if (!terminal)
    {
        diagnostics.push_back(ParseDiagnostic {
            .line = last.number,
            .kind = DiagnosticKind::MissingTerminal,
            .message = "the last line must be 'Done' or 'Pending'",
        });
    }

    if (!diagnostics.empty())
        return ParseResult::failure(std::move(diagnostics));
    return ParseResult::success(std::move(plan));
}

std::string renderCall(const SkillCall& call)
{
    return fmt::format("{}({})", call.skill, join(call.args, ", "));
}

std::string renderPlan(const Plan& plan)
{
    auto out = std::string {};
    for (auto const& step: plan.steps)
    {
        out += renderCall(step);
        out += '\n';
    }
    out += toString(plan.terminal);
    return out;
}

std::string normalizeReference(std::string_view text)
{
    auto words = std::vector<std::string> {};
    for (auto const& word: splitWhitespace(toLower(text)))
    {
        if (word == "the" || word == "a" || word == "an")
            continue;
        words.push_back(word);
    }
    if (words.empty())
        return join(splitWhitespace(toLower(text)), " ");
    return join(words, " ");
}

bool callsEquivalent(const SkillCall& a, const SkillCall& b)
{
    if (toLower(a.skill) != toLower(b.skill) || a.args.size() != b.args.size())
        return false;
    for (auto i = std::size_t { 0 }; i < a.args.size(); ++i)
    {
        if (normalizeReference(a.args[i]) != normalizeReference(b.args[i]))
            return false;
    }
    return true;
}

bool plansEquivalent(const Plan& a, const Plan& b)
{
    if (a.terminal != b.terminal || a.steps.size() != b.steps.size())
        return false;
    return std::equal(a.steps.begin(), a.steps.end(), b.steps.begin(), callsEquivalent);
}

std::string formatDiagnostic(const ParseDiagnostic& diagnostic)
{
    return fmt::format("line {}: {}: {}", diagnostic.line, toString(diagnostic.kind), diagnostic.message);
}

} // namespace relep
