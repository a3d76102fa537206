#pragma once

#include <istream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dramnet/builder.hpp"
#include "dramnet/petri.hpp"
#include "dramnet/timing.hpp"

namespace dramnet {

/// One scheduled command of a timed trace.
struct TimedCommand {
    TimeStamp time = 0;
    Command command = Command::ACT;
    Coordinate coord;

    std::string to_string() const {
        return std::to_string(time) + " " + std::string(dramnet::to_string(command)) + " " +
               coord.to_string();
    }
};

enum class ViolationKind {
    NotEnabled,      // the command is illegal in the current state
    TimingViolation, // a timing arc or token-age constraint holds it back
    WindowViolation, // a sliding-window budget is exhausted
    ParseError,      // the trace text itself is malformed
};

inline std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::NotEnabled: return "not-enabled";
    case ViolationKind::TimingViolation: return "timing-violation";
    case ViolationKind::WindowViolation: return "window-violation";
    case ViolationKind::ParseError: return "parse-error";
    }
    return "?";
}

struct Violation {
    ViolationKind kind = ViolationKind::NotEnabled;
    std::size_t index = 0; // 0-based position in the trace
    TimedCommand command;
    std::string message;
    TimeStamp allowed_at = 0; // earliest legal instant, for timing/window kinds
};

struct ReplayReport {
    std::vector<Violation> violations;
    std::size_t commands_checked = 0;
    Marking final_marking;

    bool ok() const { return violations.empty(); }
};

/// Parses trace text into timed commands. Accepted per line (after '#'
/// comments are stripped) are ';'-separated items of the form
///
///   [time] COMMAND [coordinate]
///
/// where the coordinate is "RA0", "RA0BA1" or the same in parentheses.
/// Bank-level commands require a bank coordinate; rank-level commands
/// default to rank 0 when the coordinate is omitted. Items without a time
/// are scheduled one tick after their predecessor (the first at 0), and an
/// explicit time may not run backwards.
inline std::vector<TimedCommand> parse_trace(std::istream& in) {
    std::vector<TimedCommand> trace;
    std::string raw;
    std::size_t line_no = 0;
    bool have_previous = false;
    TimeStamp previous = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        for (char& c : raw)
            if (c == '(' || c == ')')
                c = ' ';

        std::stringstream items(raw);
        std::string item;
        while (std::getline(items, item, ';')) {
            std::stringstream tokens(item);
            std::vector<std::string> words;
            std::string word;
            while (tokens >> word)
                words.push_back(word);
            if (words.empty())
                continue;

            std::size_t cursor = 0;
            std::optional<TimeStamp> explicit_time;
            if (auto number = detail::parse_unsigned(words[0])) {
                explicit_time = *number;
                ++cursor;
            }
            if (cursor >= words.size())
                throw TraceParseError(line_no, "expected a command after '" + words[0] + "'");

            auto cmd = parse_command(words[cursor]);
            if (!cmd)
                throw TraceParseError(line_no, "unknown command '" + words[cursor] + "'");
            ++cursor;

            std::optional<Coordinate> coord;
            if (cursor < words.size()) {
                coord = parse_coordinate(words[cursor]);
                if (!coord)
                    throw TraceParseError(line_no, "bad coordinate '" + words[cursor] + "'");
                ++cursor;
            }
            if (cursor < words.size())
                throw TraceParseError(line_no, "unexpected token '" + words[cursor] + "'");

            if (!coord) {
                if (is_bank_level(*cmd))
                    throw TraceParseError(line_no, std::string(to_string(*cmd)) +
                                                       " needs a bank coordinate");
                coord = Coordinate::rank_level(0);
            }
            if (is_bank_level(*cmd) != coord->is_bank_level())
                throw TraceParseError(line_no, std::string(to_string(*cmd)) + " takes a " +
                                                   (is_bank_level(*cmd) ? "bank" : "rank") +
                                                   " coordinate, got '" + coord->to_string() +
                                                   "'");

            TimeStamp time = explicit_time ? *explicit_time : (have_previous ? previous + 1 : 0);
            if (have_previous && time < previous)
                throw TraceParseError(line_no, "time " + std::to_string(time) +
                                                   " runs backwards (previous command at " +
                                                   std::to_string(previous) + ")");
            trace.push_back(TimedCommand{time, *cmd, *coord});
            previous = time;
            have_previous = true;
        }
    }
    return trace;
}

inline std::vector<TimedCommand> parse_trace(const std::string& text) {
    std::istringstream in(text);
    return parse_trace(in);
}

struct ReplayOptions {
    bool collect_all = false; // keep going past a violation, skipping the offender
};

/// Replays a timed trace against the model. Each command is checked
/// functionally first, then against the timing layer; the first failing
/// check names the violation kind. In collect_all mode an offending
/// command is skipped — it neither moves tokens nor arms registers — and
/// checking continues.
inline ReplayReport replay(const DramNet& model, std::span<const TimedCommand> trace,
                           const ReplayOptions& options = {}) {
    const PetriNet& net = model.net();
    TimedSession session = model.session();
    Marking marking = net.initial_marking();
    ReplayReport report;

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TimedCommand& cmd = trace[i];
        PetriNet::NodeId t = model.transition_id(cmd.command, cmd.coord);
        ++report.commands_checked;

        if (!net.enabled(marking, t)) {
            report.violations.push_back(
                Violation{ViolationKind::NotEnabled, i, cmd,
                          TransitionLabel{cmd.command, cmd.coord}.to_string() +
                              " is not enabled in the current state",
                          0});
            if (!options.collect_all)
                break;
            continue;
        }
        if (auto block = session.blocking(t, cmd.time)) {
            ViolationKind kind = block->cause == TimingBlock::Cause::Window
                                     ? ViolationKind::WindowViolation
                                     : ViolationKind::TimingViolation;
            report.violations.push_back(Violation{
                kind, i, cmd,
                TransitionLabel{cmd.command, cmd.coord}.to_string() + " at " +
                    std::to_string(cmd.time) + " blocked by " + block->detail +
                    "; earliest legal at " + std::to_string(block->allowed_at),
                block->allowed_at});
            if (!options.collect_all)
                break;
            continue;
        }
        marking = net.fire(marking, t);
        session.record_firing(t, cmd.time);
    }
    report.final_marking = std::move(marking);
    return report;
}

/// A legal trace that fires every transition of the hierarchy at least
/// once: per rank, each bank runs ACT-RD-WR-PRE-ACT-RDA-ACT-WRA, then the
/// rank itself runs PREA-REFA-PDE-PDX-SRE-SRX. Consecutive commands are
/// spaced by the largest timing or window value, which no constraint can
/// outlast.
inline std::vector<TimedCommand> coverage_feed(const ProtocolConfig& config) {
    TimeStamp gap = 1;
    for (const CommandTimingConstraint& c : config.constraints)
        gap = std::max(gap, c.value);
    for (const WindowSpec& w : config.windows)
        gap = std::max(gap, w.window);

    std::vector<TimedCommand> trace;
    auto push = [&](Command cmd, Coordinate coord) {
        trace.push_back(TimedCommand{trace.size() * gap, cmd, coord});
    };
    for (std::uint32_t r = 0; r < config.ranks; ++r) {
        for (std::uint32_t b = 0; b < config.banks_per_rank; ++b) {
            Coordinate bank = Coordinate::bank_level(r, b);
            for (Command cmd : {Command::ACT, Command::RD, Command::WR, Command::PRE,
                                Command::ACT, Command::RDA, Command::ACT, Command::WRA})
                push(cmd, bank);
        }
        Coordinate rank = Coordinate::rank_level(r);
        for (Command cmd : {Command::PREA, Command::REFA, Command::PDE, Command::PDX,
                            Command::SRE, Command::SRX})
            push(cmd, rank);
    }
    return trace;
}

struct ProbeReport {
    std::size_t probes = 0;
    std::size_t passed = 0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
};

/// Exercises every timing arc in isolation: for each pair of transitions
/// joined by timing arcs (strongest arc wins), firing the source at 0 must
/// block the target at delay-1 and admit it at exactly delay. Probes run
/// against the timing layer alone — window rules and token movement are
/// out of scope here — so arcs between functionally exclusive commands are
/// probed too.
inline ProbeReport run_probe_suite(const DramNet& model) {
    const PetriNet& net = model.net();
    ProbeReport report;

    std::map<std::pair<PetriNet::NodeId, PetriNet::NodeId>, TimeStamp> strongest;
    for (PetriNet::NodeId f : net.transitions())
        for (const auto& out : net.timing_out(f)) {
            auto [it, inserted] = strongest.try_emplace({f, out.target}, out.delay);
            if (!inserted)
                it->second = std::max(it->second, out.delay);
        }

    for (const auto& [pair, delay] : strongest) {
        auto label = [&](PetriNet::NodeId t) { return net.transition(t).label().to_string(); };
        TimedSession session(net, {});
        session.record_firing(pair.first, 0);

        if (delay > 0) {
            ++report.probes;
            if (session.timing_enabled(pair.second, delay - 1))
                report.failures.push_back(label(pair.second) + " at " +
                                          std::to_string(delay - 1) + " after " +
                                          label(pair.first) + " @0 was not flagged (delay " +
                                          std::to_string(delay) + ")");
            else
                ++report.passed;
        }
        ++report.probes;
        if (!session.timing_enabled(pair.second, delay))
            report.failures.push_back(label(pair.second) + " at " + std::to_string(delay) +
                                      " after " + label(pair.first) +
                                      " @0 was wrongly flagged (delay " + std::to_string(delay) +
                                      ")");
        else
            ++report.passed;
    }
    return report;
}

} // namespace dramnet
