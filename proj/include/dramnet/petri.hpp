#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dramnet/command.hpp"
#include "dramnet/errors.hpp"

namespace dramnet {

enum class PlaceType : std::uint8_t {
    Active,      // one per bank, marked while a row is open
    PowerDown,   // one per rank (PDN)
    SelfRefresh, // one per rank (SREF)
    Aux,         // free-form places for window/bus constructions and generic nets
};

struct PlaceKind {
    PlaceType type = PlaceType::Aux;
    std::string aux_label; // only meaningful for Aux

    static PlaceKind active() { return {PlaceType::Active, {}}; }
    static PlaceKind power_down() { return {PlaceType::PowerDown, {}}; }
    static PlaceKind self_refresh() { return {PlaceType::SelfRefresh, {}}; }
    static PlaceKind aux(std::string label) { return {PlaceType::Aux, std::move(label)}; }

    friend bool operator==(const PlaceKind&, const PlaceKind&) = default;
    friend auto operator<=>(const PlaceKind&, const PlaceKind&) = default;

    std::string to_string() const {
        switch (type) {
        case PlaceType::Active: return "ACTIVE";
        case PlaceType::PowerDown: return "PDN";
        case PlaceType::SelfRefresh: return "SREF";
        case PlaceType::Aux: return "AUX(" + aux_label + ")";
        }
        return "?";
    }
};

// Arc payloads. Directions are enforced at add_arc():
//   Normal            place -> transition (consume) or transition -> place (produce)
//   Inhibitor         place -> transition; blocks while tokens >= weight
//   Reset             place -> transition; empties the place on firing
//   TimedInhibitor    place -> transition; blocks while enough tokens have
//                     age within [min_age, max_age] (evaluated by the timed
//                     layer only; the untimed layer treats it as satisfied)
//   Timing            transition -> transition; firing the source blocks the
//                     target for `delay` ticks (evaluated by the timed layer)
struct NormalArc {
    std::uint32_t weight = 1;
};
struct InhibitorArc {
    std::uint32_t weight = 1;
};
struct ResetArc {};
struct TimedInhibitorArc {
    TimeStamp min_age = 0;
    TimeStamp max_age = 0;
    std::uint32_t threshold = 1;
};
struct TimingArc {
    TimeStamp delay = 0;
    std::string name; // timing parameter name, empty for literal delays
};

using ArcKind = std::variant<NormalArc, InhibitorArc, ResetArc, TimedInhibitorArc, TimingArc>;

struct Place {
    PlaceKind kind;
    Coordinate coord;
    std::uint32_t initial_tokens = 0;
};

struct Transition {
    Command command = Command::ACT;
    Coordinate coord;

    TransitionLabel label() const { return {command, coord}; }
};

/// Token counts per place, indexed by the net's dense place order. Two
/// markings are equal iff their count vectors are equal; token ages are
/// session state of the timed layer, not part of the marking identity.
struct Marking {
    std::vector<std::uint32_t> counts;

    friend bool operator==(const Marking&, const Marking&) = default;
    friend auto operator<=>(const Marking&, const Marking&) = default;
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint32_t c : m.counts) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// A directed graph of places and transitions with typed arcs. Nodes get
/// dense ids in construction order; transition iteration order is
/// construction order, which is the determinism contract every analysis
/// relies on. After freeze() the structure is immutable except for timing
/// arcs, which do not affect the functional semantics.
class PetriNet {
public:
    using NodeId = std::uint32_t;
    using ArcId = std::uint32_t;

    struct ArcRecord {
        NodeId from = 0;
        NodeId to = 0;
        ArcKind kind;
    };

    struct TimingOut {
        NodeId target = 0;
        TimeStamp delay = 0;
        std::uint32_t arc = 0; // index into arcs()
    };

    struct TimedInhibitorIn {
        NodeId place = 0;
        TimeStamp min_age = 0;
        TimeStamp max_age = 0;
        std::uint32_t threshold = 1;
    };

    NodeId add_place(PlaceKind kind, Coordinate coord, std::uint32_t initial_tokens = 0) {
        require_building();
        auto key = std::pair(kind, coord);
        if (place_lookup_.contains(key))
            throw ConstructionError("duplicate place " + kind.to_string() + " (" +
                                    coord.to_string() + ")");
        NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(Node{Place{std::move(kind), coord, initial_tokens}});
        place_lookup_.emplace(std::pair(std::get<Place>(nodes_.back().payload).kind, coord), id);
        place_ids_.push_back(id);
        return id;
    }

    NodeId add_transition(Command cmd, Coordinate coord) {
        require_building();
        if (is_bank_level(cmd) != coord.is_bank_level())
            throw ConstructionError(std::string(to_string(cmd)) + " does not match coordinate " +
                                    coord.to_string() + " (rank/bank level mismatch)");
        auto key = std::pair(cmd, coord);
        if (transition_lookup_.contains(key))
            throw ConstructionError("duplicate transition " +
                                    TransitionLabel{cmd, coord}.to_string());
        NodeId id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(Node{Transition{cmd, coord}});
        transition_lookup_.emplace(key, id);
        transition_ids_.push_back(id);
        return id;
    }

    ArcId add_arc(NodeId from, NodeId to, ArcKind kind) {
        check_node(from);
        check_node(to);
        bool timing = std::holds_alternative<TimingArc>(kind);
        if (!timing)
            require_building();

        if (timing) {
            if (!is_transition(from) || !is_transition(to))
                throw ConstructionError("timing arcs connect transitions only");
        } else if (std::holds_alternative<NormalArc>(kind)) {
            if (is_place(from) == is_place(to))
                throw ConstructionError("normal arcs connect a place and a transition");
            if (std::get<NormalArc>(kind).weight == 0)
                throw ConstructionError("arc weight must be >= 1");
        } else {
            // Inhibitor, Reset and TimedInhibitor arcs run place -> transition.
            if (!is_place(from) || !is_transition(to))
                throw ConstructionError("arc kind requires place -> transition endpoints");
            if (auto* inhib = std::get_if<InhibitorArc>(&kind); inhib && inhib->weight == 0)
                throw ConstructionError("arc weight must be >= 1");
            if (auto* timed = std::get_if<TimedInhibitorArc>(&kind)) {
                if (timed->threshold == 0)
                    throw ConstructionError("timed inhibitor threshold must be >= 1");
                if (timed->min_age > timed->max_age)
                    throw ConstructionError("timed inhibitor age window must satisfy t1 <= t2");
            }
        }

        ArcId id = static_cast<ArcId>(arcs_.size());
        arcs_.push_back(ArcRecord{from, to, std::move(kind)});
        if (timing) {
            const auto& arc = std::get<TimingArc>(arcs_.back().kind);
            timing_out_[from].push_back(TimingOut{to, arc.delay, id});
        }
        return id;
    }

    /// Locks places, transitions and functional arcs, and compiles the
    /// per-transition firing views. Timing arcs may still be added.
    void freeze() {
        if (frozen_)
            throw ConstructionError("net is already frozen");
        frozen_ = true;
        place_offset_.assign(nodes_.size(), 0);
        for (std::uint32_t i = 0; i < place_ids_.size(); ++i)
            place_offset_[place_ids_[i]] = i;

        views_.assign(nodes_.size(), View{});
        for (const ArcRecord& arc : arcs_) {
            if (std::holds_alternative<TimingArc>(arc.kind))
                continue;
            if (const auto* normal = std::get_if<NormalArc>(&arc.kind)) {
                if (is_place(arc.from))
                    bump(views_[arc.to].consume, place_offset_[arc.from], normal->weight);
                else
                    bump(views_[arc.from].produce, place_offset_[arc.to], normal->weight);
            } else if (const auto* inhib = std::get_if<InhibitorArc>(&arc.kind)) {
                views_[arc.to].inhibitors.emplace_back(place_offset_[arc.from], inhib->weight);
            } else if (std::holds_alternative<ResetArc>(arc.kind)) {
                auto& resets = views_[arc.to].resets;
                std::uint32_t offset = place_offset_[arc.from];
                if (std::find(resets.begin(), resets.end(), offset) == resets.end())
                    resets.push_back(offset);
            } else if (const auto* timed = std::get_if<TimedInhibitorArc>(&arc.kind)) {
                views_[arc.to].timed_inhibitors.push_back(
                    TimedInhibitorIn{arc.from, timed->min_age, timed->max_age, timed->threshold});
            }
        }
    }

    bool frozen() const { return frozen_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t place_count() const { return place_ids_.size(); }
    std::size_t transition_count() const { return transition_ids_.size(); }
    std::size_t arc_count() const { return arcs_.size(); }

    bool is_place(NodeId id) const {
        return std::holds_alternative<Place>(nodes_.at(id).payload);
    }
    bool is_transition(NodeId id) const { return !is_place(id); }

    const Place& place(NodeId id) const { return std::get<Place>(nodes_.at(id).payload); }
    const Transition& transition(NodeId id) const {
        return std::get<Transition>(nodes_.at(id).payload);
    }

    std::span<const NodeId> places() const { return place_ids_; }
    std::span<const NodeId> transitions() const { return transition_ids_; }
    std::span<const ArcRecord> arcs() const { return arcs_; }

    std::optional<NodeId> find_place(const PlaceKind& kind, const Coordinate& coord) const {
        auto it = place_lookup_.find(std::pair(kind, coord));
        if (it == place_lookup_.end())
            return std::nullopt;
        return it->second;
    }

    std::optional<NodeId> find_transition(Command cmd, const Coordinate& coord) const {
        auto it = transition_lookup_.find(std::pair(cmd, coord));
        if (it == transition_lookup_.end())
            return std::nullopt;
        return it->second;
    }

    /// Dense index of a place within Marking::counts.
    std::uint32_t place_offset(NodeId id) const {
        require_frozen();
        if (!is_place(id))
            throw UsageError("node " + std::to_string(id) + " is not a place");
        return place_offset_[id];
    }

    std::uint32_t tokens(const Marking& m, NodeId place_id) const {
        return m.counts.at(place_offset(place_id));
    }

    Marking initial_marking() const {
        require_frozen();
        Marking m;
        m.counts.reserve(place_ids_.size());
        for (NodeId id : place_ids_)
            m.counts.push_back(place(id).initial_tokens);
        return m;
    }

    /// Functional enabledness: every consumed place holds enough tokens and
    /// every inhibitor place holds fewer than its arc weight. Reset arcs
    /// never condition firing; timed inhibitors are deferred to the timed
    /// layer.
    bool enabled(const Marking& m, NodeId t) const {
        const View& view = view_of(t);
        for (auto [offset, weight] : view.consume)
            if (m.counts[offset] < weight)
                return false;
        for (auto [offset, weight] : view.inhibitors)
            if (m.counts[offset] >= weight)
                return false;
        return true;
    }

    /// Fires t: consume, produce, then empty every reset-arc source. The
    /// input marking is left untouched.
    Marking fire(const Marking& m, NodeId t) const {
        if (!enabled(m, t))
            throw FiringError("transition " + transition(t).label().to_string() +
                              " is not enabled");
        const View& view = view_of(t);
        Marking out = m;
        for (auto [offset, weight] : view.consume)
            out.counts[offset] -= weight;
        for (auto [offset, weight] : view.produce)
            out.counts[offset] += weight;
        for (std::uint32_t offset : view.resets)
            out.counts[offset] = 0;
        return out;
    }

    /// All enabled transitions in construction order.
    std::vector<NodeId> enabled_set(const Marking& m) const {
        require_frozen();
        std::vector<NodeId> out;
        for (NodeId t : transition_ids_)
            if (enabled(m, t))
                out.push_back(t);
        return out;
    }

    std::span<const TimingOut> timing_out(NodeId t) const {
        auto it = timing_out_.find(t);
        if (it == timing_out_.end())
            return {};
        return it->second;
    }

    std::span<const TimedInhibitorIn> timed_inhibitors_in(NodeId t) const {
        return view_of(t).timed_inhibitors;
    }

    /// Places feeding at least one timed inhibitor arc; the timed layer
    /// tracks token ages for exactly these.
    std::vector<NodeId> age_tracked_places() const {
        require_frozen();
        std::vector<NodeId> out;
        for (const ArcRecord& arc : arcs_)
            if (std::holds_alternative<TimedInhibitorArc>(arc.kind))
                if (std::find(out.begin(), out.end(), arc.from) == out.end())
                    out.push_back(arc.from);
        return out;
    }

    /// Consume/produce/reset effect of a transition on a place, for callers
    /// that replay token ages alongside markings.
    struct PlaceEffect {
        std::uint32_t consumed = 0;
        std::uint32_t produced = 0;
        bool reset = false;
    };

    PlaceEffect place_effect(NodeId t, NodeId place_id) const {
        const View& view = view_of(t);
        std::uint32_t offset = place_offset(place_id);
        PlaceEffect effect;
        for (auto [o, w] : view.consume)
            if (o == offset)
                effect.consumed += w;
        for (auto [o, w] : view.produce)
            if (o == offset)
                effect.produced += w;
        effect.reset = std::find(view.resets.begin(), view.resets.end(), offset) != view.resets.end();
        return effect;
    }

private:
    struct Node {
        std::variant<Place, Transition> payload;
    };

    struct View {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> consume;    // (offset, weight)
        std::vector<std::pair<std::uint32_t, std::uint32_t>> produce;    // (offset, weight)
        std::vector<std::pair<std::uint32_t, std::uint32_t>> inhibitors; // (offset, weight)
        std::vector<std::uint32_t> resets;                               // offsets
        std::vector<TimedInhibitorIn> timed_inhibitors;
    };

    static void bump(std::vector<std::pair<std::uint32_t, std::uint32_t>>& entries,
                     std::uint32_t offset, std::uint32_t weight) {
        for (auto& [o, w] : entries)
            if (o == offset) {
                w += weight;
                return;
            }
        entries.emplace_back(offset, weight);
    }

    void require_building() const {
        if (frozen_)
            throw ConstructionError("net is frozen");
    }

    void require_frozen() const {
        if (!frozen_)
            throw UsageError("net must be frozen first");
    }

    void check_node(NodeId id) const {
        if (id >= nodes_.size())
            throw ConstructionError("unknown node id " + std::to_string(id));
    }

    const View& view_of(NodeId t) const {
        require_frozen();
        if (t >= nodes_.size())
            throw UsageError("unknown node id " + std::to_string(t));
        if (!is_transition(t))
            throw UsageError("node " + std::to_string(t) + " is a place, not a transition");
        return views_[t];
    }

    std::vector<Node> nodes_;
    std::vector<ArcRecord> arcs_;
    std::vector<NodeId> place_ids_;
    std::vector<NodeId> transition_ids_;
    std::map<std::pair<PlaceKind, Coordinate>, NodeId> place_lookup_;
    std::map<std::pair<Command, Coordinate>, NodeId> transition_lookup_;
    std::map<NodeId, std::vector<TimingOut>> timing_out_;
    std::vector<std::uint32_t> place_offset_;
    std::vector<View> views_;
    bool frozen_ = false;
};

} // namespace dramnet
