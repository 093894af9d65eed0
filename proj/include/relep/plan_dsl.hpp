// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace relep
{

class SkillLibrary;

/// One invocation of a library skill, e.g. `Pull(fridge door, backward)`.
struct SkillCall
{
    std::string skill;
    std::vector<std::string> args;

    bool operator==(const SkillCall&) const = default;
};

enum class Terminal
{
    Done,
    Pending,
};

/// A plan is an ordered list of skill calls closed by a terminal state.
/// A plan with no steps is legal ("bare Done" / "bare Pending").
struct Plan
{
    std::vector<SkillCall> steps;
    Terminal terminal = Terminal::Done;

    [[nodiscard]] bool isBare() const noexcept { return steps.empty(); }
    [[nodiscard]] bool isBareDone() const noexcept { return steps.empty() && terminal == Terminal::Done; }
    [[nodiscard]] bool isBarePending() const noexcept { return steps.empty() && terminal == Terminal::Pending; }

    /// The plan with its first `count` steps removed (terminal kept).
    [[nodiscard]] Plan suffix(std::size_t count) const;

    bool operator==(const Plan&) const = default;
};

enum class DiagnosticKind
{
    Syntax,
    UnknownSkill,
    Arity,
    BadArgument,
    MissingTerminal,
    TrailingContent,
};

struct ParseDiagnostic
{
    std::size_t line = 1; // 1-based
    DiagnosticKind kind = DiagnosticKind::Syntax;
    std::string message;

    bool operator==(const ParseDiagnostic&) const = default;
};

/// Either a plan or a non-empty list of diagnostics, never both.
class ParseResult
{
  public:
    static ParseResult success(Plan plan);
    static ParseResult failure(std::vector<ParseDiagnostic> diagnostics);

    [[nodiscard]] bool ok() const noexcept { return _plan.has_value(); }
    explicit operator bool() const noexcept { return ok(); }

    [[nodiscard]] const Plan& plan() const;
    [[nodiscard]] const std::vector<ParseDiagnostic>& diagnostics() const noexcept { return _diagnostics; }

  private:
    std::optional<Plan> _plan;
    std::vector<ParseDiagnostic> _diagnostics;
};

[[nodiscard]] std::string_view toString(Terminal terminal) noexcept;
[[nodiscard]] std::string_view toString(DiagnosticKind kind) noexcept;

/// Parses the line-oriented plan grammar:
///
///     # comment lines and blank lines are ignored
///     Navigate(fridge)
///     Pull(fridge door, backward)
///     Done
///
/// Skill names match the library case-insensitively and are returned in library casing.
/// Direction arguments are lowercased. The last meaningful line must be `Done` or `Pending`.
[[nodiscard]] ParseResult parsePlan(std::string_view text, const SkillLibrary& library);

/// Canonical text: one call per line, arguments joined by ", ", terminal last, no trailing newline.
[[nodiscard]] std::string renderPlan(const Plan& plan);
[[nodiscard]] std::string renderCall(const SkillCall& call);

/// Lowercase, collapse whitespace, drop the articles "the", "a", "an".
[[nodiscard]] std::string normalizeReference(std::string_view text);

[[nodiscard]] bool callsEquivalent(const SkillCall& a, const SkillCall& b);
[[nodiscard]] bool plansEquivalent(const Plan& a, const Plan& b);

[[nodiscard]] std::string formatDiagnostic(const ParseDiagnostic& diagnostic);

} // namespace relep
