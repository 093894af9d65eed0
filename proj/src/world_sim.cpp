// SPDX-License-Identifier: Apache-2.0
#include <relep/skill_library.hpp>
#include <relep/text.hpp>
#include <relep/world_sim.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <utility>

namespace relep
{

namespace
{

constexpr auto BinaryStatePairs = std::array<std::pair<std::string_view, std::string_view>, 3> { {
    { "open", "closed" },
    { "on", "off" },
    { "plugged", "unplugged" },
} };

std::optional<std::string_view> complementOf(std::string_view state)
{
    for (auto const& [a, b]: BinaryStatePairs)
    {
        if (state == a)
            return b;
        if (state == b)
            return a;
    }
    return std::nullopt;
}

bool isBinaryState(std::string_view state)
{
    return complementOf(state).has_value();
}

bool isArticulationDirection(std::string_view direction)
{
    auto const& library = defaultLibrary();
    return library.find("Push")->acceptsDirection(direction) || library.find("Pull")->acceptsDirection(direction);
}

bool isInsideSide(std::string_view side)
{
    auto const s = normalizeReference(side);
    return s == "inside" || s == "in" || s == "into";
}

// True when `ancestor` appears on the containment chain above `objectId`.
bool isInside(const WorldState& world, const std::string& objectId, const std::string& ancestor)
{
    auto current = objectId;
    for (auto depth = std::size_t { 0 }; depth <= world.objects.size(); ++depth)
    {
        auto const& object = world.objects.at(current);
        if (object.location.kind != LocationKind::Container)
            return false;
        if (object.location.ref == ancestor)
            return true;
        current = object.location.ref;
    }
    return false;
}

std::optional<std::size_t> handHolding(const WorldState& world, const std::string& objectId)
{
    for (auto i = std::size_t { 0 }; i < world.robotHands.size(); ++i)
    {
        if (world.robotHands[i] == objectId)
            return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> firstFreeHand(const WorldState& world)
{
    for (auto i = std::size_t { 0 }; i < world.robotHands.size(); ++i)
    {
        if (!world.robotHands[i])
            return i;
    }
    return std::nullopt;
}

std::string describeStates(const ObjectState& object)
{
    return object.states.empty() ? std::string("-") : join(object.states, ",");
}

void requireArgs(const SkillCall& call, std::size_t count)
{
    if (call.args.size() != count)
        throw std::invalid_argument(fmt::format("{} expects {} arguments, got {}", call.skill, count, call.args.size()));
}

StepResult unchanged(const WorldState& world, FailureReason reason, std::string detail)
{
    return StepResult { world, SkillOutcome::fail(reason, std::move(detail)) };
}

// Shared reachability check for skills that touch an object in the robot's zone.
std::optional<StepResult> requireReachable(const WorldState& world, const std::string& id)
{
    if (effectiveZone(world, id) != world.robotZone)
        return unchanged(world, FailureReason::NotInZone, fmt::format("'{}' is not in {}", id, world.robotZone));
    if (!isVisible(world, id))
        return unchanged(world, FailureReason::NotVisible, fmt::format("'{}' cannot be seen", id));
    return std::nullopt;
}

StepResult navigate(const WorldState& world, const SkillCall& call)
{
    requireArgs(call, 1);
    auto zone = resolveZone(world, call.args[0]);
    if (!zone)
    {
        if (auto object = resolveObject(world, call.args[0]))
            zone = effectiveZone(world, *object);
    }
    if (!zone)
        return unchanged(world, FailureReason::UnknownDestination, fmt::format("no destination '{}'", call.args[0]));

    auto next = world;
    auto const delta = next.robotZone == *zone ? fmt::format("robot stays in {}", *zone)
                                               : fmt::format("robot moves {} -> {}", next.robotZone, *zone);
    next.robotZone = *zone;
    return StepResult { std::move(next), SkillOutcome::ok(delta) };
}

StepResult detect(const WorldState& world, const SkillCall& call)
{
    requireArgs(call, 1);
    auto const id = resolveObject(world, call.args[0]);
    if (!id)
        return unchanged(world, FailureReason::UnknownObject, fmt::format("no object '{}'", call.args[0]));
    if (effectiveZone(world, *id) != world.robotZone || !isVisible(world, *id))
        return unchanged(world, FailureReason::NotVisible, fmt::format("'{}' is not visible from {}", *id, world.robotZone));
    return StepResult { world, SkillOutcome::ok(fmt::format("detected {}", *id)) };
}

StepResult grasp(const WorldState& world, const SkillCall& call)
{
    requireArgs(call, 1);
    auto const id = resolveObject(world, call.args[0]);
    if (!id)
        return unchanged(world, FailureReason::UnknownObject, fmt::format("no object '{}'", call.args[0]));
    if (handHolding(world, *id))
        return unchanged(world, FailureReason::NotGraspable, fmt::format("'{}' is already held", *id));
    if (auto failure = requireReachable(world, *id))
        return std::move(*failure);
    if (!world.objects.at(*id).graspable)
        return unchanged(world, FailureReason::NotGraspable, fmt::format("'{}' cannot be grasped", *id));
    auto const hand = firstFreeHand(world);
    if (!hand)
        return unchanged(world, FailureReason::NoFreeHand, "all hands are occupied");

    auto next = world;
    next.objects.at(*id).location = Location::inHand(*hand);
    next.robotHands[*hand] = *id;
    return StepResult { std::move(next), SkillOutcome::ok(fmt::format("hand {} holds {}", *hand + 1, *id)) };
}

StepResult put(const WorldState& world, const SkillCall& call)
{
    requireArgs(call, 3);
    auto const id = resolveObject(world, call.args[0]);
    if (!id)
        return unchanged(world, FailureReason::UnknownObject, fmt::format("no object '{}'", call.args[0]));
    auto const hand = handHolding(world, *id);
    if (!hand)
        return unchanged(world, FailureReason::NotHolding, fmt::format("not holding '{}'", *id));
    auto const side = call.args[2];

    auto next = world;
    auto& moved = next.objects.at(*id);
    next.robotHands[*hand].reset();

    if (auto const place = resolveObject(world, call.args[1]))
    {
        if (*place == *id || handHolding(world, *place) || isInside(world, *place, *id))
            return unchanged(world, FailureReason::NotVisible, fmt::format("cannot put '{}' on '{}'", *id, *place));
        if (auto failure = requireReachable(world, *place))
            return std::move(*failure);
        auto const& target = world.objects.at(*place);
        if (target.container && isInsideSide(side))
        {
            if (target.isClosed())
                return unchanged(world, FailureReason::NotVisible, fmt::format("'{}' is closed", *place));
            moved.location = Location::inContainer(*place);
            moved.location.side = side;
            return StepResult { std::move(next), SkillOutcome::ok(fmt::format("{} put into {}", *id, *place)) };
        }
        moved.location = Location::inZone(effectiveZone(world, *place));
        moved.location.support = *place;
        moved.location.side = side;
        return StepResult { std::move(next), SkillOutcome::ok(fmt::format("{} put on {} ({})", *id, *place, side)) };
    }
    if (auto const zone = resolveZone(world, call.args[1]))
    {
        if (*zone != world.robotZone)
            return unchanged(world, FailureReason::NotInZone, fmt::format("robot is not in {}", *zone));
        moved.location = Location::inZone(*zone);
        moved.location.side = side;
        return StepResult { std::move(next), SkillOutcome::ok(fmt::format("{} put down in {} ({})", *id, *zone, side)) };
    }
    return unchanged(world, FailureReason::UnknownObject, fmt::format("no place '{}'", call.args[1]));
}

StepResult articulate(const WorldState& world, const SkillCall& call)
{
    requireArgs(call, 2);
    auto const id = resolveObject(world, call.args[0]);
    if (!id)
        return unchanged(world, FailureReason::UnknownObject, fmt::format("no object '{}'", call.args[0]));
    if (auto failure = requireReachable(world, *id))
        return std::move(*failure);
    auto const direction = toLower(trim(call.args[1]));
    auto const& object = world.objects.at(*id);
    auto const it = object.articulation.find(direction);
    if (it == object.articulation.end())
        return unchanged(world,
                         FailureReason::NotArticulableInDirection,
                         fmt::format("{} on '{}' towards {} does nothing", call.skill, *id, direction));

    auto const& transition = it->second;
    auto next = world;
    auto const targetId = transition.target.value_or(*id);
    auto& target = next.objects.at(targetId);
    auto const before = describeStates(target);
    if (transition.state)
    {
        if (auto complement = complementOf(*transition.state))
            target.states.erase(std::string(*complement));
        target.states.insert(*transition.state);
    }
    if (transition.pose)
        target.pose = transition.pose;
    auto delta = fmt::format("{}: {} -> {}", targetId, before, describeStates(target));
    if (transition.pose)
        delta += fmt::format(" (pose: {})", *transition.pose);
    return StepResult { std::move(next), SkillOutcome::ok(std::move(delta)) };
}

} // namespace

std::string_view toString(FailureReason reason) noexcept
{
    switch (reason)
    {
        case FailureReason::NotInZone: return "not-in-zone";
        case FailureReason::NotVisible: return "not-visible";
        case FailureReason::NoFreeHand: return "no-free-hand";
        case FailureReason::NotHolding: return "not-holding";
        case FailureReason::NotArticulableInDirection: return "not-articulable-in-direction";
        case FailureReason::UnknownObject: return "unknown-object";
        case FailureReason::UnknownDestination: return "unknown-destination";
        case FailureReason::NotGraspable: return "not-graspable";
        case FailureReason::SkillUnavailable: return "skill-unavailable";
    }
    return "unknown-object";
}

std::optional<FailureReason> failureReasonFromString(std::string_view text)
{
    for (auto const reason: { FailureReason::NotInZone,
                              FailureReason::NotVisible,
                              FailureReason::NoFreeHand,
                              FailureReason::NotHolding,
                              FailureReason::NotArticulableInDirection,
                              FailureReason::UnknownObject,
                              FailureReason::UnknownDestination,
                              FailureReason::NotGraspable,
                              FailureReason::SkillUnavailable })
    {
        if (toString(reason) == text)
            return reason;
    }
    return std::nullopt;
}

bool WorldState::hasZone(std::string_view zone) const
{
    return std::find(zones.begin(), zones.end(), zone) != zones.end();
}

std::optional<std::string> resolveObject(const WorldState& world, std::string_view reference)
{
    if (auto it = world.objects.find(std::string(reference)); it != world.objects.end())
        return it->first;
    auto const wanted = normalizeReference(reference);
    for (auto const& [id, object]: world.objects)
    {
        if (normalizeReference(id) == wanted)
            return id;
    }
    return std::nullopt;
}

std::optional<std::string> resolveZone(const WorldState& world, std::string_view reference)
{
    auto const wanted = normalizeReference(reference);
    for (auto const& zone: world.zones)
    {
        if (normalizeReference(zone) == wanted)
            return zone;
    }
    return std::nullopt;
}

std::string effectiveZone(const WorldState& world, const std::string& objectId)
{
    auto current = objectId;
    for (auto depth = std::size_t { 0 }; depth <= world.objects.size(); ++depth)
    {
        auto const& location = world.objects.at(current).location;
        switch (location.kind)
        {
            case LocationKind::Zone: return location.ref;
            case LocationKind::Hand: return world.robotZone;
            case LocationKind::Container: current = location.ref; break;
        }
    }
    throw SceneError(fmt::format("containment cycle at '{}'", objectId));
}

bool isVisible(const WorldState& world, const std::string& objectId)
{
    auto current = objectId;
    for (auto depth = std::size_t { 0 }; depth <= world.objects.size(); ++depth)
    {
        auto const& location = world.objects.at(current).location;
        if (location.kind != LocationKind::Container)
            return true;
        auto const& holder = world.objects.at(location.ref);
        if (holder.isClosed() && !holder.visibleWhenClosed)
            return false;
        current = location.ref;
    }
    throw SceneError(fmt::format("containment cycle at '{}'", objectId));
}

std::vector<std::string> contentsOf(const WorldState& world, const std::string& containerId)
{
    auto contents = std::vector<std::string> {};
    for (auto const& [id, object]: world.objects)
    {
        if (object.location.kind == LocationKind::Container && object.location.ref == containerId)
            contents.push_back(id);
    }
    return contents;
}

StepResult applySkill(const WorldState& world, const SkillCall& call, const EqaResponder& eqa)
{
    auto const& skill = call.skill;
    if (iequals(skill, "Navigate"))
        return navigate(world, call);
    if (iequals(skill, "Detect"))
        return detect(world, call);
    if (iequals(skill, "Grasp"))
        return grasp(world, call);
    if (iequals(skill, "Put"))
        return put(world, call);
    if (iequals(skill, "Push") || iequals(skill, "Pull"))
        return articulate(world, call);
    if (iequals(skill, "Wait"))
    {
        requireArgs(call, 1);
        auto next = world;
        auto const seconds = std::stoull(call.args[0]);
        next.clock += seconds;
        return StepResult { std::move(next), SkillOutcome::ok(fmt::format("waited {} s", seconds)) };
    }
    if (iequals(skill, "Speak"))
    {
        requireArgs(call, 1);
        auto outcome = SkillOutcome::ok("spoke");
        outcome.utterance = call.args[0];
        return StepResult { world, std::move(outcome) };
    }
    if (iequals(skill, "EQA"))
    {
        requireArgs(call, 1);
        auto outcome = SkillOutcome::ok("answered");
        outcome.utterance = eqa ? eqa(call.args[0]) : std::string {};
        return StepResult { world, std::move(outcome) };
    }
    throw std::invalid_argument(fmt::format("skill '{}' has no world semantics", skill));
}

Observation observe(const WorldState& world, std::size_t t)
{
    auto text = std::string {};
    text += fmt::format("Robot location: {}\n", world.robotZone);
    text += fmt::format("Zones: {}\n", join(world.zones, ", "));
    text += "Visible objects:\n";
    auto any = false;
    for (auto const& [id, object]: world.objects)
    {
        if (object.location.kind == LocationKind::Hand)
            continue;
        if (effectiveZone(world, id) != world.robotZone || !isVisible(world, id))
            continue;
        auto attributes = std::vector<std::string>(object.states.begin(), object.states.end());
        if (object.pose)
            attributes.push_back(*object.pose);
        if (object.location.kind == LocationKind::Container)
            attributes.push_back(fmt::format("in {}", object.location.ref));
        if (object.location.support)
            attributes.push_back(fmt::format("on {}", *object.location.support));
        if (object.location.side)
            attributes.push_back(fmt::format("side {}", *object.location.side));
        text += attributes.empty() ? fmt::format("- {}\n", id) : fmt::format("- {} ({})\n", id, join(attributes, "; "));
        any = true;
    }
    if (!any)
        text += "- nothing\n";
    if (world.robotHands.empty())
        text += "Holding: nothing (no arms)";
    else
    {
        auto hands = std::vector<std::string> {};
        for (auto i = std::size_t { 0 }; i < world.robotHands.size(); ++i)
            hands.push_back(fmt::format("hand {}: {}", i + 1, world.robotHands[i].value_or("empty")));
        text += fmt::format("Holding: {}", join(hands, "; "));
    }

    auto observation = Observation { .t = t, .sceneText = std::move(text), .imageRef = std::nullopt };
    if (auto it = world.zoneImages.find(world.robotZone); it != world.zoneImages.end())
        observation.imageRef = it->second;
    return observation;
}

// --- validation and scene files ----------------------------------------------

void validateWorld(const WorldState& world)
{
    if (world.zones.empty())
        throw SceneError("scene has no zones");
    auto seenZones = std::set<std::string> {};
    for (auto const& zone: world.zones)
    {
        if (trim(zone).empty())
            throw SceneError("zone with empty name");
        if (!seenZones.insert(normalizeReference(zone)).second)
            throw SceneError(fmt::format("duplicate zone '{}'", zone));
    }
    if (!world.hasZone(world.robotZone))
        throw SceneError(fmt::format("robot zone '{}' is not a declared zone", world.robotZone));
    if (world.robotHands.size() > 2)
        throw SceneError("robot arm_count must be 0..2");

    auto seenIds = std::set<std::string> {};
    for (auto const& [id, object]: world.objects)
    {
        if (id != object.id)
            throw SceneError(fmt::format("object key '{}' does not match id '{}'", id, object.id));
        if (trim(id).empty())
            throw SceneError("object with empty id");
        if (!seenIds.insert(normalizeReference(id)).second)
            throw SceneError(fmt::format("duplicate object id '{}'", id));
        if (seenZones.contains(normalizeReference(id)))
            throw SceneError(fmt::format("object id '{}' collides with a zone name", id));

        auto const& location = object.location;
        switch (location.kind)
        {
            case LocationKind::Zone:
                if (!world.hasZone(location.ref))
                    throw SceneError(fmt::format("object '{}' is in unknown zone '{}'", id, location.ref));
                break;
            case LocationKind::Container:
            {
                auto const holder = world.objects.find(location.ref);
                if (holder == world.objects.end())
                    throw SceneError(fmt::format("object '{}' is inside unknown container '{}'", id, location.ref));
                if (!holder->second.container)
                    throw SceneError(fmt::format("object '{}' is inside '{}', which is not a container", id, location.ref));
                if (location.ref == id || isInside(world, location.ref, id))
                    throw SceneError(fmt::format("containment cycle through '{}'", id));
                break;
            }
            case LocationKind::Hand:
                if (location.hand >= world.robotHands.size() || world.robotHands[location.hand] != id)
                    throw SceneError(fmt::format("object '{}' claims hand {} but the robot does not hold it", id, location.hand + 1));
                break;
        }
        if (location.support && !world.objects.contains(*location.support))
            throw SceneError(fmt::format("object '{}' rests on unknown object '{}'", id, *location.support));

        for (auto const& state: object.states)
        {
            auto const complement = complementOf(state);
            if (!complement)
                throw SceneError(fmt::format("object '{}' has unknown state '{}'", id, state));
            if (object.states.contains(std::string(*complement)))
                throw SceneError(fmt::format("object '{}' is both {} and {}", id, state, *complement));
        }
        for (auto const& [direction, transition]: object.articulation)
        {
            if (!isArticulationDirection(direction))
                throw SceneError(fmt::format("object '{}': articulation direction '{}' is not a Push or Pull direction", id, direction));
            if (transition.target && !world.objects.contains(*transition.target))
                throw SceneError(fmt::format("object '{}': articulation targets unknown object '{}'", id, *transition.target));
            if (transition.state && !isBinaryState(*transition.state))
                throw SceneError(fmt::format("object '{}': articulation sets unknown state '{}'", id, *transition.state));
            if (!transition.state && !transition.pose)
                throw SceneError(fmt::format("object '{}': articulation '{}' has no effect", id, direction));
        }
    }
    for (auto i = std::size_t { 0 }; i < world.robotHands.size(); ++i)
    {
        auto const& held = world.robotHands[i];
        if (!held)
            continue;
        auto const it = world.objects.find(*held);
        if (it == world.objects.end())
            throw SceneError(fmt::format("robot hand {} holds unknown object '{}'", i + 1, *held));
        if (it->second.location != Location::inHand(i))
            throw SceneError(fmt::format("robot hand {} holds '{}' but the object is elsewhere", i + 1, *held));
    }
}

namespace
{

Transition transitionFromJson(const nlohmann::json& value)
{
    auto transition = Transition {};
    if (value.is_string())
    {
        auto const effect = value.get<std::string>();
        if (isBinaryState(effect))
            transition.state = effect;
        else
            transition.pose = effect;
        return transition;
    }
    if (!value.is_object())
        throw SceneError("articulation entries must be a string or an object");
    if (value.contains("target"))
        transition.target = value.at("target").get<std::string>();
    if (value.contains("state"))
        transition.state = value.at("state").get<std::string>();
    if (value.contains("pose"))
        transition.pose = value.at("pose").get<std::string>();
    return transition;
}

Location locationFromJson(const std::string& id, const nlohmann::json& value)
{
    if (!value.is_object())
        throw SceneError(fmt::format("object '{}': location must be an object", id));
    auto const places = value.count("zone") + value.count("container") + value.count("hand");
    if (places == 0)
        throw SceneError(fmt::format("object '{}' has no location", id));
    if (places > 1)
        throw SceneError(fmt::format("object '{}' is in two places", id));
    auto location = Location {};
    if (value.contains("zone"))
        location = Location::inZone(value.at("zone").get<std::string>());
    else if (value.contains("container"))
        location = Location::inContainer(value.at("container").get<std::string>());
    else
    {
        auto const hand = value.at("hand").get<int>();
        if (hand < 0)
            throw SceneError(fmt::format("object '{}': negative hand index", id));
        location = Location::inHand(static_cast<std::size_t>(hand));
    }
    if (value.contains("on"))
        location.support = value.at("on").get<std::string>();
    if (value.contains("side"))
        location.side = value.at("side").get<std::string>();
    return location;
}

WorldState parseScene(const nlohmann::json& document)
{
    if (!document.is_object())
        throw SceneError("scene document must be a JSON object");
    auto world = WorldState {};
    for (auto const& zone: document.at("zones"))
        world.zones.push_back(zone.get<std::string>());
    if (world.zones.empty())
        throw SceneError("scene has no zones");

    auto const& robot = document.at("robot");
    world.robotZone = robot.at("zone").get<std::string>();
    auto const arms = robot.at("arm_count").get<int>();
    if (arms < 0 || arms > 2)
        throw SceneError(fmt::format("robot arm_count must be 0..2, got {}", arms));
    world.robotHands.resize(static_cast<std::size_t>(arms));
    world.clock = robot.value("clock", std::uint64_t { 0 });

    auto declaredContents = std::vector<std::pair<std::string, std::string>> {};
    for (auto const& entry: document.at("objects"))
    {
        auto object = ObjectState {};
        object.id = entry.at("id").get<std::string>();
        object.location = locationFromJson(object.id, entry.at("location"));
        object.graspable = entry.value("graspable", false);
        object.visibleWhenClosed = entry.value("visible_when_closed", false);
        object.container = entry.value("container", false) || entry.contains("contents");
        if (entry.contains("pose"))
            object.pose = entry.at("pose").get<std::string>();
        for (auto const& state: entry.value("states", nlohmann::json::array()))
            object.states.insert(state.get<std::string>());
        auto const articulation = entry.value("articulation", nlohmann::json::object());
        for (auto const& [direction, effect]: articulation.items())
            object.articulation.emplace(direction, transitionFromJson(effect));
        for (auto const& item: entry.value("contents", nlohmann::json::array()))
            declaredContents.emplace_back(object.id, item.get<std::string>());

        if (object.location.kind == LocationKind::Hand)
        {
            if (object.location.hand >= world.robotHands.size())
                throw SceneError(fmt::format("object '{}' is in hand {} of a {}-armed robot", object.id, object.location.hand + 1, arms));
            if (world.robotHands[object.location.hand])
                throw SceneError(fmt::format("hand {} holds two objects", object.location.hand + 1));
            world.robotHands[object.location.hand] = object.id;
        }

        auto const id = object.id;
        if (!world.objects.emplace(id, std::move(object)).second)
            throw SceneError(fmt::format("duplicate object id '{}'", id));
    }

    for (auto const& [container, item]: declaredContents)
    {
        auto const it = world.objects.find(item);
        if (it == world.objects.end())
            throw SceneError(fmt::format("container '{}' lists unknown object '{}'", container, item));
        if (it->second.location.kind != LocationKind::Container || it->second.location.ref != container)
            throw SceneError(fmt::format("object '{}' is listed in '{}' but located elsewhere (two places)", item, container));
    }

    auto const images = document.value("images", nlohmann::json::object());
    for (auto const& [zone, image]: images.items())
        world.zoneImages.emplace(zone, image.get<std::string>());
    return world;
}

} // namespace

WorldState loadScene(const nlohmann::json& document)
{
    auto world = WorldState {};
    try
    {
        world = parseScene(document);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw SceneError(fmt::format("scene schema violation: {}", e.what()));
    }
    validateWorld(world);
    return world;
}

WorldState loadSceneFile(const std::filesystem::path& path)
{
    auto in = std::ifstream(path);
    if (!in)
        throw SceneError(fmt::format("cannot open scene file '{}'", path.string()));
    auto document = nlohmann::json::parse(in, nullptr, false);
    if (document.is_discarded())
        throw SceneError(fmt::format("scene file '{}' is not valid JSON", path.string()));
    auto world = loadScene(document);
    for (auto& [zone, image]: world.zoneImages)
    {
        auto imagePath = std::filesystem::path(image);
        if (imagePath.is_relative())
            image = (path.parent_path() / imagePath).string();
    }
    return world;
}

nlohmann::json sceneToJson(const WorldState& world)
{
    auto objects = nlohmann::json::array();
    for (auto const& [id, object]: world.objects)
    {
        auto location = nlohmann::json::object();
        switch (object.location.kind)
        {
            case LocationKind::Zone: location["zone"] = object.location.ref; break;
            case LocationKind::Container: location["container"] = object.location.ref; break;
            case LocationKind::Hand: location["hand"] = object.location.hand; break;
        }
        if (object.location.support)
            location["on"] = *object.location.support;
        if (object.location.side)
            location["side"] = *object.location.side;

        auto entry = nlohmann::json {
            { "id", id },
            { "location", location },
            { "graspable", object.graspable },
            { "container", object.container },
            { "visible_when_closed", object.visibleWhenClosed },
            { "states", object.states },
        };
        if (object.pose)
            entry["pose"] = *object.pose;
        if (!object.articulation.empty())
        {
            auto articulation = nlohmann::json::object();
            for (auto const& [direction, transition]: object.articulation)
            {
                auto effect = nlohmann::json::object();
                if (transition.target)
                    effect["target"] = *transition.target;
                if (transition.state)
                    effect["state"] = *transition.state;
                if (transition.pose)
                    effect["pose"] = *transition.pose;
                articulation[direction] = effect;
            }
            entry["articulation"] = articulation;
        }
        objects.push_back(std::move(entry));
    }
    auto document = nlohmann::json {
        { "zones", world.zones },
        { "robot", { { "zone", world.robotZone }, { "arm_count", world.robotHands.size() }, { "clock", world.clock } } },
        { "objects", objects },
    };
    if (!world.zoneImages.empty())
        document["images"] = world.zoneImages;
    return document;
}

} // namespace relep
