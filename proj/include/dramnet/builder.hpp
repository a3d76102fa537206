#pragma once

#include <span>
#include <string>
#include <vector>

#include "dramnet/config.hpp"
#include "dramnet/petri.hpp"
#include "dramnet/timing.hpp"

namespace dramnet {

/// Builds the functional command net for a rank/bank hierarchy and freezes
/// it. Node order is the determinism contract: per rank, the PDN and SREF
/// places, then the six rank transitions (PREA, REFA, PDE, PDX, SRE, SRX),
/// then one ACTIVE place per bank, then the six bank transitions (ACT, PRE,
/// RD, RDA, WR, WRA) per bank.
///
/// Per-bank structure: ACT marks ACTIVE and is inhibited while it is
/// marked; RD/WR require and keep the mark; RDA/WRA consume it; PRE clears
/// it by reset (legal on an idle bank). Per rank: PREA resets every ACTIVE,
/// REFA and SRE are inhibited by every ACTIVE, PDE/SRE mark PDN/SREF, and
/// PDX/SRX consume them. A marked PDN inhibits every same-rank transition
/// except PDX; a marked SREF everything except SRX — those two rules are
/// the only source of PDN/SREF inhibitor arcs.
inline PetriNet build_protocol_net(const ProtocolConfig& config) {
    if (config.ranks == 0 || config.banks_per_rank == 0)
        throw ConfigError("hierarchy needs at least one rank and one bank");

    PetriNet net;
    for (std::uint32_t r = 0; r < config.ranks; ++r) {
        Coordinate rank = Coordinate::rank_level(r);
        auto pdn = net.add_place(PlaceKind::power_down(), rank);
        auto sref = net.add_place(PlaceKind::self_refresh(), rank);

        auto prea = net.add_transition(Command::PREA, rank);
        auto refa = net.add_transition(Command::REFA, rank);
        auto pde = net.add_transition(Command::PDE, rank);
        auto pdx = net.add_transition(Command::PDX, rank);
        auto sre = net.add_transition(Command::SRE, rank);
        auto srx = net.add_transition(Command::SRX, rank);

        net.add_arc(pde, pdn, NormalArc{});
        net.add_arc(pdn, pdx, NormalArc{});
        net.add_arc(sre, sref, NormalArc{});
        net.add_arc(sref, srx, NormalArc{});

        std::vector<PetriNet::NodeId> rank_transitions{prea, refa, pde, pdx, sre, srx};
        std::vector<PetriNet::NodeId> actives;
        for (std::uint32_t b = 0; b < config.banks_per_rank; ++b)
            actives.push_back(net.add_place(PlaceKind::active(), Coordinate::bank_level(r, b)));

        for (std::uint32_t b = 0; b < config.banks_per_rank; ++b) {
            Coordinate bank = Coordinate::bank_level(r, b);
            auto act = net.add_transition(Command::ACT, bank);
            auto pre = net.add_transition(Command::PRE, bank);
            auto rd = net.add_transition(Command::RD, bank);
            auto rda = net.add_transition(Command::RDA, bank);
            auto wr = net.add_transition(Command::WR, bank);
            auto wra = net.add_transition(Command::WRA, bank);

            net.add_arc(act, actives[b], NormalArc{});
            net.add_arc(actives[b], act, InhibitorArc{}); // one open row per bank
            net.add_arc(actives[b], pre, ResetArc{});
            net.add_arc(actives[b], rd, NormalArc{});
            net.add_arc(rd, actives[b], NormalArc{});
            net.add_arc(actives[b], rda, NormalArc{});
            net.add_arc(actives[b], wr, NormalArc{});
            net.add_arc(wr, actives[b], NormalArc{});
            net.add_arc(actives[b], wra, NormalArc{});

            for (auto t : {act, pre, rd, rda, wr, wra})
                rank_transitions.push_back(t);
        }

        for (auto active : actives) {
            net.add_arc(active, prea, ResetArc{});
            net.add_arc(active, refa, InhibitorArc{}); // refresh wants all banks closed
            net.add_arc(active, sre, InhibitorArc{});
        }

        // Frozen rank states: while powered down or self-refreshing, only
        // the matching exit command may fire.
        for (auto t : rank_transitions) {
            if (t != pdx)
                net.add_arc(pdn, t, InhibitorArc{});
            if (t != srx)
                net.add_arc(sref, t, InhibitorArc{});
        }
    }
    net.freeze();
    return net;
}

/// Expands the command timing table into timing arcs: every ordered pair of
/// transitions whose commands and coordinates a constraint covers gets one
/// arc. Returns the number of arcs added.
inline std::size_t apply_timing_constraints(PetriNet& net, const ProtocolConfig& config) {
    std::size_t added = 0;
    for (const CommandTimingConstraint& constraint : config.constraints) {
        for (PetriNet::NodeId f : net.transitions()) {
            const Transition& from = net.transition(f);
            if (std::find(constraint.from.begin(), constraint.from.end(), from.command) ==
                constraint.from.end())
                continue;
            for (PetriNet::NodeId t : net.transitions()) {
                const Transition& to = net.transition(t);
                if (std::find(constraint.to.begin(), constraint.to.end(), to.command) ==
                    constraint.to.end())
                    continue;
                if (!constraint.scope(from.coord, to.coord))
                    continue;
                net.add_arc(f, t, TimingArc{constraint.value, constraint.name});
                ++added;
            }
        }
    }
    return added;
}

/// Instantiates window specs against a built net: per_rank specs yield one
/// rule per rank over that rank's transitions, per_channel specs one rule
/// over everything. An empty command list watches every command.
inline std::vector<WindowRule> expand_window_rules(const PetriNet& net,
                                                   const ProtocolConfig& config) {
    std::vector<WindowRule> rules;
    for (const WindowSpec& spec : config.windows) {
        auto wants = [&](Command cmd) {
            return spec.commands.empty() ||
                   std::find(spec.commands.begin(), spec.commands.end(), cmd) !=
                       spec.commands.end();
        };
        if (spec.per_rank) {
            for (std::uint32_t r = 0; r < config.ranks; ++r) {
                WindowRule rule{spec.name + "@RA" + std::to_string(r), {}, spec.max_in_window,
                                spec.window};
                for (PetriNet::NodeId t : net.transitions())
                    if (net.transition(t).coord.rank == r && wants(net.transition(t).command))
                        rule.watched.push_back(t);
                if (!rule.watched.empty())
                    rules.push_back(std::move(rule));
            }
        } else {
            WindowRule rule{spec.name, {}, spec.max_in_window, spec.window};
            for (PetriNet::NodeId t : net.transitions())
                if (wants(net.transition(t).command))
                    rule.watched.push_back(t);
            if (!rule.watched.empty())
                rules.push_back(std::move(rule));
        }
    }
    return rules;
}

/// A protocol model ready for analysis and replay: the frozen net, the
/// config it came from, and the expanded window rules. `build` gives the
/// timed model, `untimed` skips the timing table (topology-only studies),
/// `adopt` wraps a hand-made net so the analyses and emitters work on
/// arbitrary nets too.
class DramNet {
public:
    static DramNet build(const ProtocolConfig& config) {
        DramNet model(build_protocol_net(config), config);
        model.timing_arcs_ = apply_timing_constraints(model.net_, config);
        model.rules_ = expand_window_rules(model.net_, config);
        model.timing_applied_ = true;
        return model;
    }

    static DramNet untimed(const ProtocolConfig& config) {
        return DramNet(build_protocol_net(config), config);
    }

    static DramNet adopt(PetriNet net, ProtocolConfig config = {},
                         std::vector<WindowRule> rules = {}) {
        if (!net.frozen())
            throw UsageError("adopt expects a frozen net");
        DramNet model(std::move(net), std::move(config));
        model.rules_ = std::move(rules);
        model.timing_applied_ = true;
        return model;
    }

    const PetriNet& net() const { return net_; }
    const ProtocolConfig& config() const { return config_; }
    std::span<const WindowRule> window_rules() const { return rules_; }
    bool timing_applied() const { return timing_applied_; }
    std::size_t timing_arc_count() const { return timing_arcs_; }

    TimedSession session() const { return TimedSession(net_, rules_); }

    /// Node id of a command transition; throws UsageError if the command
    /// and coordinate name nothing in this hierarchy.
    PetriNet::NodeId transition_id(Command cmd, const Coordinate& coord) const {
        auto id = net_.find_transition(cmd, coord);
        if (!id)
            throw UsageError("no transition " + TransitionLabel{cmd, coord}.to_string() +
                             " in this hierarchy");
        return *id;
    }

private:
    DramNet(PetriNet net, ProtocolConfig config)
        : net_(std::move(net)), config_(std::move(config)) {}

    PetriNet net_;
    ProtocolConfig config_;
    std::vector<WindowRule> rules_;
    std::size_t timing_arcs_ = 0;
    bool timing_applied_ = false;
};

} // namespace dramnet
