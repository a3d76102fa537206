#pragma once

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "dramnet/analysis.hpp"
#include "dramnet/builder.hpp"
#include "dramnet/petri.hpp"
#include "dramnet/verify.hpp"

namespace dramnet {

namespace detail {

/// DOT string literals need escaping for quotes and backslashes.
inline std::string dot_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

/// "ACTIVE(RA0BA0)", "PDN(RA0)" — the place rendering used in assertions.
inline std::string place_name(const Place& place) {
    return place.kind.to_string() + "(" + place.coord.to_string() + ")";
}

/// "RD(RA0BA0)" — the compact command rendering used in assertions.
inline std::string command_name(const Transition& t) {
    return std::string(to_string(t.command)) + "(" + t.coord.to_string() + ")";
}

} // namespace detail

/// Renders the net structure as DOT: places are circles carrying their
/// initial token count, transitions are boxes, and the arc kinds are told
/// apart by edge decoration — inhibitors end in a dot, resets in a double
/// arrowhead, timed inhibitors in a dot on a dashed edge, and timing arcs
/// are dashed with the delay as label.
inline std::string export_dot(const PetriNet& net) {
    std::string out = "digraph net {\n  rankdir=LR;\n";
    for (PetriNet::NodeId id = 0; id < net.node_count(); ++id) {
        if (net.is_place(id)) {
            const Place& place = net.place(id);
            out += "  n" + std::to_string(id) + " [shape=circle, label=\"" +
                   detail::dot_escape(place.kind.to_string() + " (" + place.coord.to_string() +
                                      ")\\ntokens=" + std::to_string(place.initial_tokens)) +
                   "\"];\n";
        } else {
            out += "  n" + std::to_string(id) + " [shape=box, label=\"" +
                   detail::dot_escape(net.transition(id).label().to_string()) + "\"];\n";
        }
    }
    for (const auto& arc : net.arcs()) {
        std::string attrs;
        if (const auto* normal = std::get_if<NormalArc>(&arc.kind)) {
            if (normal->weight > 1)
                attrs = " [label=\"" + std::to_string(normal->weight) + "\"]";
        } else if (const auto* inhibitor = std::get_if<InhibitorArc>(&arc.kind)) {
            attrs = " [arrowhead=odot";
            if (inhibitor->weight > 1)
                attrs += ", label=\"" + std::to_string(inhibitor->weight) + "\"";
            attrs += "]";
        } else if (std::holds_alternative<ResetArc>(arc.kind)) {
            attrs = " [arrowhead=normalnormal]";
        } else if (const auto* timed = std::get_if<TimedInhibitorArc>(&arc.kind)) {
            attrs = " [arrowhead=odot, style=dashed, label=\"[" +
                    std::to_string(timed->min_age) + "," + std::to_string(timed->max_age) +
                    "] x" + std::to_string(timed->threshold) + "\"]";
        } else if (const auto* timing = std::get_if<TimingArc>(&arc.kind)) {
            std::string label =
                timing->name.empty() ? std::to_string(timing->delay)
                                     : timing->name + "=" + std::to_string(timing->delay);
            attrs = " [style=dashed, label=\"" + detail::dot_escape(label) + "\"]";
        }
        out += "  n" + std::to_string(arc.from) + " -> n" + std::to_string(arc.to) + attrs +
               ";\n";
    }
    out += "}\n";
    return out;
}

/// Renders a state graph as DOT: one circle per reachable state (the
/// initial state double-rimmed), edges labeled with the fired command.
inline std::string export_dot(const PetriNet& net, const StateGraph& graph) {
    std::string out = "digraph states {\n  rankdir=LR;\n";
    for (std::size_t s = 0; s < graph.state_count(); ++s) {
        out += "  s" + std::to_string(s) + " [shape=circle";
        if (s == 0)
            out += ", peripheries=2";
        out += ", label=\"s" + std::to_string(s) + "\"];\n";
    }
    for (std::size_t s = 0; s < graph.state_count(); ++s)
        for (const StateGraph::Edge& edge : graph.edges[s])
            out += "  s" + std::to_string(s) + " -> s" + std::to_string(edge.target) +
                   " [label=\"" +
                   detail::dot_escape(net.transition(edge.transition).label().to_string()) +
                   "\"];\n";
    out += "}\n";
    return out;
}

/// One tab-separated row per timing arc, sorted by from-label, to-label,
/// name and value. Rows are never merged: two constraints covering the
/// same pair stay two rows.
inline std::string emit_constraint_table(const DramNet& model) {
    const PetriNet& net = model.net();
    using Row = std::tuple<TransitionLabel, TransitionLabel, std::string, TimeStamp>;
    std::vector<Row> rows;
    for (const auto& arc : net.arcs()) {
        const auto* timing = std::get_if<TimingArc>(&arc.kind);
        if (!timing)
            continue;
        std::string name = timing->name.empty() ? std::to_string(timing->delay) : timing->name;
        rows.emplace_back(net.transition(arc.from).label(), net.transition(arc.to).label(),
                          std::move(name), timing->delay);
    }
    std::sort(rows.begin(), rows.end());

    std::string out = "from_command\tfrom_coordinate\tto_command\tto_coordinate\ttiming\tvalue\n";
    for (const auto& [from, to, name, value] : rows) {
        out += std::string(to_string(from.command)) + "\t" + from.coord.to_string() + "\t" +
               std::string(to_string(to.command)) + "\t" + to.coord.to_string() + "\t" + name +
               "\t" + std::to_string(value) + "\n";
    }
    return out;
}

/// Toolchain-neutral assertion text, one clause per arc in arc order:
/// consuming a place asserts its occupancy when the command fires, an
/// inhibitor asserts emptiness, and a timing arc asserts the firing-time
/// difference. Reset arcs impose no precondition and emit nothing.
inline std::string emit_assertions(const DramNet& model) {
    const PetriNet& net = model.net();
    std::string out;
    for (const auto& arc : net.arcs()) {
        if (const auto* normal = std::get_if<NormalArc>(&arc.kind)) {
            if (!net.is_place(arc.from))
                continue; // produce arcs have no precondition
            out += "on " + detail::command_name(net.transition(arc.to)) + ": " +
                   detail::place_name(net.place(arc.from)) + " >= " +
                   std::to_string(normal->weight) + "\n";
        } else if (const auto* inhibitor = std::get_if<InhibitorArc>(&arc.kind)) {
            out += "on " + detail::command_name(net.transition(arc.to)) + ": " +
                   detail::place_name(net.place(arc.from)) + " < " +
                   std::to_string(inhibitor->weight) + "\n";
        } else if (const auto* timing = std::get_if<TimingArc>(&arc.kind)) {
            const Transition& from = net.transition(arc.from);
            const Transition& to = net.transition(arc.to);
            std::string bound =
                timing->name.empty() ? std::to_string(timing->delay) : timing->name;
            out += "t(" + std::string(to_string(to.command)) + " " + to.coord.to_string() +
                   ") - t(" + std::string(to_string(from.command)) + " " +
                   from.coord.to_string() + ") >= " + bound + "\n";
        }
    }
    return out;
}

/// Plain-text replay report: one line per violation, then a verdict line.
inline std::string render_report(const ReplayReport& report) {
    std::string out;
    for (const Violation& v : report.violations) {
        out += "[" + std::string(to_string(v.kind)) + "] command " + std::to_string(v.index) +
               " (" + v.command.to_string() + "): " + v.message + "\n";
    }
    out += report.ok() ? "ok: " + std::to_string(report.commands_checked) + " commands verified\n"
                       : "violations: " + std::to_string(report.violations.size()) + " of " +
                             std::to_string(report.commands_checked) + " commands\n";
    return out;
}

} // namespace dramnet
