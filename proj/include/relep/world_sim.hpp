// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <relep/plan_dsl.hpp>

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relep
{

enum class LocationKind
{
    Zone,
    Container,
    Hand,
};

struct Location
{
    LocationKind kind = LocationKind::Zone;
    std::string ref;       // zone id or container id; unused for hands
    std::size_t hand = 0;  // hand index when kind == Hand
    std::optional<std::string> support; // object it was put on
    std::optional<std::string> side;    // free-form label from Put

    static Location inZone(std::string zone) { return { LocationKind::Zone, std::move(zone), 0, {}, {} }; }
    static Location inContainer(std::string container) { return { LocationKind::Container, std::move(container), 0, {}, {} }; }
    static Location inHand(std::size_t index) { return { LocationKind::Hand, {}, index, {}, {} }; }

    bool operator==(const Location&) const = default;
};

/// What a Push/Pull in one direction does: set a binary state and/or a pose label on a target.
struct Transition
{
    std::optional<std::string> target; // defaults to the articulated object itself
    std::optional<std::string> state;  // one of open/closed/on/off/plugged/unplugged
    std::optional<std::string> pose;   // free label, e.g. "tucked under the table"

    bool operator==(const Transition&) const = default;
};

struct ObjectState
{
    std::string id;
    Location location;
    bool graspable = false;
    bool container = false;
    bool visibleWhenClosed = false;
    std::map<std::string, Transition> articulation; // direction -> transition
    std::set<std::string> states;
    std::optional<std::string> pose;

    [[nodiscard]] bool isClosed() const { return states.contains("closed"); }
    bool operator==(const ObjectState&) const = default;
};

struct WorldState
{
    std::vector<std::string> zones;
    std::map<std::string, ObjectState> objects;
    std::string robotZone;
    std::vector<std::optional<std::string>> robotHands;
    std::uint64_t clock = 0;
    std::map<std::string, std::string> zoneImages; // zone -> image file, when the scene has photos

    [[nodiscard]] int armCount() const noexcept { return static_cast<int>(robotHands.size()); }
    [[nodiscard]] bool hasZone(std::string_view zone) const;
    bool operator==(const WorldState&) const = default;
};

struct Observation
{
    std::size_t t = 0;
    std::string sceneText;
    std::optional<std::string> imageRef;

    bool operator==(const Observation&) const = default;
};

enum class FailureReason
{
    NotInZone,
    NotVisible,
    NoFreeHand,
    NotHolding,
    NotArticulableInDirection,
    UnknownObject,
    UnknownDestination,
    NotGraspable,
    SkillUnavailable,
};

[[nodiscard]] std::string_view toString(FailureReason reason) noexcept;
[[nodiscard]] std::optional<FailureReason> failureReasonFromString(std::string_view text);

struct SkillOutcome
{
    bool success = true;
    std::string worldDelta;
    std::optional<FailureReason> failureReason;
    std::optional<std::string> utterance; // Speak text or EQA answer

    static SkillOutcome ok(std::string delta) { return { true, std::move(delta), std::nullopt, std::nullopt }; }
    static SkillOutcome fail(FailureReason reason, std::string detail) { return { false, std::move(detail), reason, std::nullopt }; }

    bool operator==(const SkillOutcome&) const = default;
};

struct StepResult
{
    WorldState world;
    SkillOutcome outcome;
};

class SceneError: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Produces the answer for an EQA(query) call; empty means the outcome carries no answer.
using EqaResponder = std::function<std::string(std::string_view query)>;

/// Executes one skill against the world. Failures never throw and leave the world unchanged.
[[nodiscard]] StepResult applySkill(const WorldState& world, const SkillCall& call, const EqaResponder& eqa = {});

/// Deterministic textual rendering of what the robot sees from its zone.
[[nodiscard]] Observation observe(const WorldState& world, std::size_t t);

/// Resolves an argument to an object id (case/whitespace/article-insensitive).
[[nodiscard]] std::optional<std::string> resolveObject(const WorldState& world, std::string_view reference);
[[nodiscard]] std::optional<std::string> resolveZone(const WorldState& world, std::string_view reference);

/// Zone an object is effectively in (following containers and hands).
[[nodiscard]] std::string effectiveZone(const WorldState& world, const std::string& objectId);
[[nodiscard]] bool isVisible(const WorldState& world, const std::string& objectId);
[[nodiscard]] std::vector<std::string> contentsOf(const WorldState& world, const std::string& containerId);

/// Throws SceneError describing the first broken invariant.
void validateWorld(const WorldState& world);

[[nodiscard]] WorldState loadScene(const nlohmann::json& document);
[[nodiscard]] WorldState loadSceneFile(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json sceneToJson(const WorldState& world);

} // namespace relep
