#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dramnet/errors.hpp"
#include "dramnet/petri.hpp"

namespace dramnet {

/// A sliding-window firing budget: at any instant, at most `max_in_window`
/// of the watched transitions may have fired within the trailing window
/// (now - window, now]. The half-open old edge makes a firing legal at
/// exactly oldest_birth + window, e.g. a fifth activate at t0 + tFAW.
struct WindowRule {
    std::string name;
    std::vector<PetriNet::NodeId> watched;
    std::uint32_t max_in_window = 1;
    TimeStamp window = 0;
};

/// Why a transition cannot fire at some instant.
struct TimingBlock {
    enum class Cause {
        Register, // a timing arc from an earlier firing still holds it
        Window,   // a window rule budget is exhausted
        TokenAge, // a timed inhibitor sees enough tokens in its age band
    };

    Cause cause = Cause::Register;
    std::string detail;
    TimeStamp allowed_at = 0; // earliest instant the transition becomes legal
};

/// Mutable timing state of one replay/simulation run over a frozen net:
/// per-transition earliest-allowed registers fed by timing arcs, firing
/// histories for window rules, and token birth times for the places feeding
/// timed inhibitor arcs. Functional enabledness is the net's business; this
/// class answers only "is it too early".
class TimedSession {
public:
    using NodeId = PetriNet::NodeId;

    TimedSession(const PetriNet& net, std::vector<WindowRule> rules)
        : net_(&net), rules_(std::move(rules)), registers_(net.node_count()) {
        if (!net.frozen())
            throw UsageError("timed sessions require a frozen net");
        for (const WindowRule& rule : rules_)
            for (NodeId t : rule.watched)
                if (!net.is_transition(t))
                    throw UsageError("window rule '" + rule.name + "' watches a non-transition");
        births_.resize(rules_.size());
        for (NodeId p : net.age_tracked_places()) {
            auto& ages = ages_[p];
            std::uint32_t initial = net.place(p).initial_tokens;
            for (std::uint32_t i = 0; i < initial; ++i)
                ages.push_back(0);
        }
    }

    TimeStamp last_time() const { return last_time_; }

    TimeStamp next_allowed(NodeId t) const { return reg(t).allowed_at; }

    bool timing_enabled(NodeId t, TimeStamp now) const {
        if (now < reg(t).allowed_at)
            return false;
        if (blocking_rule(t, now))
            return false;
        return blocking_age_arc(t, now) == nullptr;
    }

    /// First timing obstacle at `now`, checked register -> window -> token
    /// age, or nullopt if the instant is legal.
    std::optional<TimingBlock> blocking(NodeId t, TimeStamp now) const {
        const Register& r = reg(t);
        if (now < r.allowed_at) {
            std::string detail = r.source_name.empty() ? std::string("timing arc")
                                                       : r.source_name;
            detail += " after " + net_->transition(r.source).label().to_string() + " @ " +
                      std::to_string(r.set_at);
            return TimingBlock{TimingBlock::Cause::Register, std::move(detail), r.allowed_at};
        }
        if (auto rule_index = blocking_rule(t, now)) {
            const WindowRule& rule = rules_[*rule_index];
            // Legal once enough old firings slip out of the window; the
            // k-th newest must leave, where k = max_in_window.
            TimeStamp kth_newest = *(births_[*rule_index].end() - rule.max_in_window);
            return TimingBlock{TimingBlock::Cause::Window,
                               rule.name + " window (" + std::to_string(rule.window) + ")",
                               kth_newest + rule.window};
        }
        if (const auto* arc = blocking_age_arc(t, now)) {
            return TimingBlock{TimingBlock::Cause::TokenAge,
                               net_->place(arc->place).kind.to_string() + " tokens aged [" +
                                   std::to_string(arc->min_age) + ", " +
                                   std::to_string(arc->max_age) + "]",
                               earliest_fire_time(t, now)};
        }
        return std::nullopt;
    }

    /// Commits a firing at `now`: arms the registers of every timing
    /// successor, appends to window histories, and replays the token effect
    /// on age-tracked places (consume oldest first, produce with birth
    /// `now`, reset clears). Timestamps must not decrease across calls.
    void record_firing(NodeId t, TimeStamp now) {
        if (!net_->is_transition(t))
            throw UsageError("record_firing expects a transition id");
        if (now < last_time_)
            throw TimingError("firing at " + std::to_string(now) + " after time " +
                              std::to_string(last_time_));
        last_time_ = now;

        for (const auto& out : net_->timing_out(t)) {
            Register& r = registers_[out.target];
            TimeStamp allowed = now + out.delay;
            if (allowed > r.allowed_at) {
                const auto& arc = std::get<TimingArc>(net_->arcs()[out.arc].kind);
                r.allowed_at = allowed;
                r.source = t;
                r.source_name = arc.name;
                r.set_at = now;
            }
        }
        for (std::size_t i = 0; i < rules_.size(); ++i)
            if (watches(rules_[i], t))
                births_[i].push_back(now);
        for (auto& [place, ages] : ages_) {
            auto effect = net_->place_effect(t, place);
            for (std::uint32_t i = 0; i < effect.consumed && !ages.empty(); ++i)
                ages.pop_front();
            for (std::uint32_t i = 0; i < effect.produced; ++i)
                ages.push_back(now);
            if (effect.reset)
                ages.clear();
        }
    }

    /// Earliest instant >= from_now at which nothing in the timing layer
    /// blocks t. Only finitely many instants can change the verdict: the
    /// register deadline, window history entries aging out, and tokens
    /// entering or leaving an inhibitor age band.
    TimeStamp earliest_fire_time(NodeId t, TimeStamp from_now) const {
        std::vector<TimeStamp> candidates{from_now};
        candidates.push_back(reg(t).allowed_at);
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (!watches(rules_[i], t))
                continue;
            for (TimeStamp b : births_[i])
                candidates.push_back(b + rules_[i].window);
        }
        for (const auto& arc : net_->timed_inhibitors_in(t)) {
            auto it = ages_.find(arc.place);
            if (it == ages_.end())
                continue;
            for (TimeStamp b : it->second) {
                candidates.push_back(b + arc.min_age);
                candidates.push_back(b + arc.max_age + 1);
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        for (TimeStamp c : candidates)
            if (c >= from_now && timing_enabled(t, c))
                return c;
        throw TimingError("no legal firing instant for " +
                          net_->transition(t).label().to_string());
    }

    /// Birth times of the tokens currently in an age-tracked place.
    std::vector<TimeStamp> token_births(NodeId place) const {
        auto it = ages_.find(place);
        if (it == ages_.end())
            return {};
        return {it->second.begin(), it->second.end()};
    }

    std::span<const WindowRule> rules() const { return rules_; }

private:
    struct Register {
        TimeStamp allowed_at = 0;
        NodeId source = 0;
        std::string source_name;
        TimeStamp set_at = 0;
    };

    static bool watches(const WindowRule& rule, NodeId t) {
        return std::find(rule.watched.begin(), rule.watched.end(), t) != rule.watched.end();
    }

    std::optional<std::size_t> blocking_rule(NodeId t, TimeStamp now) const {
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (!watches(rules_[i], t))
                continue;
            if (count_in_window(births_[i], now, rules_[i].window) >= rules_[i].max_in_window)
                return i;
        }
        return std::nullopt;
    }

    const PetriNet::TimedInhibitorIn* blocking_age_arc(NodeId t, TimeStamp now) const {
        for (const auto& arc : net_->timed_inhibitors_in(t)) {
            auto it = ages_.find(arc.place);
            if (it == ages_.end())
                continue;
            if (count_in_age_band(it->second, now, arc.min_age, arc.max_age) >= arc.threshold)
                return &arc;
        }
        return nullptr;
    }

    static std::uint32_t count_in_window(const std::vector<TimeStamp>& history, TimeStamp now,
                                         TimeStamp window) {
        std::uint32_t count = 0;
        for (auto it = history.rbegin(); it != history.rend(); ++it) {
            if (*it > now)
                continue; // hypothetical instant before already-recorded firings
            if (now >= window && *it <= now - window)
                break; // sorted ascending: everything older is out too
            ++count;
        }
        return count;
    }

    static std::uint32_t count_in_age_band(const std::deque<TimeStamp>& births, TimeStamp now,
                                           TimeStamp min_age, TimeStamp max_age) {
        std::uint32_t count = 0;
        for (TimeStamp b : births) {
            if (b > now)
                continue;
            TimeStamp age = now - b;
            if (age >= min_age && age <= max_age)
                ++count;
        }
        return count;
    }

    const Register& reg(NodeId t) const {
        if (t >= registers_.size() || !net_->is_transition(t))
            throw UsageError("unknown transition id " + std::to_string(t));
        return registers_[t];
    }

    const PetriNet* net_;
    std::vector<WindowRule> rules_;
    std::vector<Register> registers_;           // indexed by node id
    std::vector<std::vector<TimeStamp>> births_; // one history per rule, ascending
    std::map<NodeId, std::deque<TimeStamp>> ages_;
    TimeStamp last_time_ = 0;
};

} // namespace dramnet
