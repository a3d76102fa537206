#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dramnet/command.hpp"
#include "dramnet/errors.hpp"

namespace dramnet {

/// Which (from, to) coordinate pairs a command timing constraint covers.
/// Rank-level coordinates carry no bank: intra_bank matches two rank-level
/// coordinates on the same rank but never mixes levels, and inter_bank
/// requires a bank on both sides.
class ScopePredicate {
public:
    enum class Kind { IntraBank, IntraRank, InterBank, AllPairs, Custom };

    static ScopePredicate intra_bank() { return ScopePredicate(Kind::IntraBank); }
    static ScopePredicate intra_rank() { return ScopePredicate(Kind::IntraRank); }
    static ScopePredicate inter_bank() { return ScopePredicate(Kind::InterBank); }
    static ScopePredicate all_pairs() { return ScopePredicate(Kind::AllPairs); }
    static ScopePredicate custom(std::function<bool(const Coordinate&, const Coordinate&)> fn) {
        ScopePredicate p(Kind::Custom);
        p.custom_ = std::move(fn);
        return p;
    }

    Kind kind() const { return kind_; }

    bool operator()(const Coordinate& from, const Coordinate& to) const {
        switch (kind_) {
        case Kind::IntraBank:
            return from.rank == to.rank && from.bank == to.bank;
        case Kind::IntraRank:
            return from.rank == to.rank;
        case Kind::InterBank:
            return from.rank == to.rank && from.bank && to.bank && *from.bank != *to.bank;
        case Kind::AllPairs:
            return true;
        case Kind::Custom:
            return custom_(from, to);
        }
        return false;
    }

    std::string to_string() const {
        switch (kind_) {
        case Kind::IntraBank: return "intra_bank";
        case Kind::IntraRank: return "intra_rank";
        case Kind::InterBank: return "inter_bank";
        case Kind::AllPairs: return "all_pairs";
        case Kind::Custom: return "custom";
        }
        return "?";
    }

private:
    explicit ScopePredicate(Kind kind) : kind_(kind) {}

    Kind kind_;
    std::function<bool(const Coordinate&, const Coordinate&)> custom_;
};

inline std::optional<ScopePredicate> parse_scope(std::string_view word) {
    if (word == "intra_bank") return ScopePredicate::intra_bank();
    if (word == "intra_rank") return ScopePredicate::intra_rank();
    if (word == "inter_bank") return ScopePredicate::inter_bank();
    if (word == "all_pairs") return ScopePredicate::all_pairs();
    return std::nullopt;
}

/// One row of the command timing table: every in-scope pair (f, t) with
/// f's command in `from` and t's command in `to` gets a timing arc of
/// `value` ticks. `name` is the timing parameter ("tRCD", ...) or the
/// decimal rendering of a literal delay.
struct CommandTimingConstraint {
    ScopePredicate scope = ScopePredicate::all_pairs();
    std::vector<Command> from;
    std::vector<Command> to;
    std::string name;
    TimeStamp value = 0;
};

/// Declarative form of a WindowRule before transition ids exist. An empty
/// command list means every command. per_rank expands to one rule per rank
/// watching that rank's transitions; per_channel to a single global rule.
struct WindowSpec {
    std::string name;
    std::vector<Command> commands;
    bool per_rank = true;
    std::uint32_t max_in_window = 1;
    std::string window_name;
    TimeStamp window = 0;
};

struct ProtocolConfig {
    std::string name;
    std::string time_unit = "cycles";
    std::uint32_t ranks = 1;
    std::uint32_t banks_per_rank = 1;
    std::map<std::string, TimeStamp> timings;
    std::vector<CommandTimingConstraint> constraints;
    std::vector<WindowSpec> windows;

    TimeStamp timing(const std::string& timing_name) const {
        auto it = timings.find(timing_name);
        if (it == timings.end())
            throw ConfigError("unknown timing parameter '" + timing_name + "'");
        return it->second;
    }
};

namespace detail {

inline std::string trim(std::string_view text) {
    std::size_t first = text.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    std::size_t last = text.find_last_not_of(" \t\r");
    return std::string(text.substr(first, last - first + 1));
}

/// Splits a constraint/window line into words, where a bracketed command
/// list "[ACT, PRE]" is one word (brackets kept, inner spaces dropped).
inline std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '[') {
            std::size_t close = line.find(']', i);
            if (close == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated '['");
            std::string field;
            for (std::size_t j = i; j <= close; ++j)
                if (!std::isspace(static_cast<unsigned char>(line[j])))
                    field += line[j];
            fields.push_back(std::move(field));
            i = close + 1;
        } else {
            std::size_t end = i;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end])) &&
                   line[end] != '[')
                ++end;
            fields.push_back(line.substr(i, end - i));
            i = end;
        }
    }
    return fields;
}

inline std::vector<Command> parse_command_list(const std::string& field, std::size_t line_no) {
    if (field.size() < 2 || field.front() != '[' || field.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": expected [CMD, ...], got '" +
                          field + "'");
    std::vector<Command> commands;
    std::string inner = field.substr(1, field.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty command in '" + field +
                              "'");
        auto cmd = parse_command(item);
        if (!cmd)
            throw ConfigError("line " + std::to_string(line_no) + ": unknown command '" + item +
                              "'");
        commands.push_back(*cmd);
    }
    if (commands.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty command list");
    return commands;
}

inline std::optional<TimeStamp> parse_unsigned(const std::string& text) {
    if (text.empty())
        return std::nullopt;
    TimeStamp value = 0;
    for (char c : text) {
        if (c < '0' || c > '9')
            return std::nullopt;
        value = value * 10 + static_cast<TimeStamp>(c - '0');
    }
    return value;
}

} // namespace detail

/// Parses the protocol description format:
///
///   [hierarchy]
///   name = two-bank
///   time_unit = cycles
///   ranks = 1
///   banks_per_rank = 2
///
///   [timings]
///   tRCD = 5
///
///   [constraints]
///   intra_bank [ACT] [RD, RDA, WR, WRA] tRCD
///
///   [windows]
///   faw [ACT] per_rank 4 tFAW
///
/// '#' starts a comment. Unknown sections, keys, scopes and commands are
/// rejected; timing names must be declared before use.
inline ProtocolConfig parse_config(std::istream& in) {
    ProtocolConfig config;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    bool saw_hierarchy = false;

    auto fail = [&](const std::string& message) -> ConfigError {
        return ConfigError("line " + std::to_string(line_no) + ": " + message);
    };

    auto resolve_timing = [&](const std::string& word) -> std::pair<std::string, TimeStamp> {
        if (auto literal = detail::parse_unsigned(word))
            return {word, *literal};
        auto it = config.timings.find(word);
        if (it == config.timings.end())
            throw fail("unknown timing parameter '" + word + "'");
        return {word, it->second};
    };

    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::string line = detail::trim(raw);
        if (line.empty())
            continue;

        if (line.front() == '[' && line.back() == ']') {
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "hierarchy" && section != "timings" && section != "constraints" &&
                section != "windows")
                throw fail("unknown section '" + section + "'");
            if (section == "hierarchy")
                saw_hierarchy = true;
            continue;
        }
        if (section.empty())
            throw fail("content before the first section header");

        if (section == "hierarchy" || section == "timings") {
            std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw fail("expected 'key = value'");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty() || value.empty())
                throw fail("expected 'key = value'");

            if (section == "hierarchy") {
                if (key == "name") {
                    config.name = value;
                } else if (key == "time_unit") {
                    config.time_unit = value;
                } else if (key == "ranks" || key == "banks_per_rank") {
                    auto number = detail::parse_unsigned(value);
                    if (!number || *number == 0 || *number > 0xffffffffull)
                        throw fail(key + " must be a positive integer");
                    (key == "ranks" ? config.ranks : config.banks_per_rank) =
                        static_cast<std::uint32_t>(*number);
                } else {
                    throw fail("unknown hierarchy key '" + key + "'");
                }
            } else {
                auto number = detail::parse_unsigned(value);
                if (!number)
                    throw fail("timing '" + key + "' must be a non-negative integer");
                if (!config.timings.emplace(key, *number).second)
                    throw fail("duplicate timing '" + key + "'");
            }
            continue;
        }

        auto fields = detail::split_fields(line, line_no);
        if (section == "constraints") {
            if (fields.size() != 4)
                throw fail("expected 'scope [FROM...] [TO...] timing'");
            auto scope = parse_scope(fields[0]);
            if (!scope)
                throw fail("unknown scope '" + fields[0] + "'");
            CommandTimingConstraint constraint;
            constraint.scope = *scope;
            constraint.from = detail::parse_command_list(fields[1], line_no);
            constraint.to = detail::parse_command_list(fields[2], line_no);
            std::tie(constraint.name, constraint.value) = resolve_timing(fields[3]);
            config.constraints.push_back(std::move(constraint));
        } else { // windows
            if (fields.size() != 5)
                throw fail("expected 'name [CMDS...|*] per_rank|per_channel count window'");
            WindowSpec spec;
            spec.name = fields[0];
            if (fields[1] != "*")
                spec.commands = detail::parse_command_list(fields[1], line_no);
            if (fields[2] == "per_rank")
                spec.per_rank = true;
            else if (fields[2] == "per_channel")
                spec.per_rank = false;
            else
                throw fail("expected per_rank or per_channel, got '" + fields[2] + "'");
            auto count = detail::parse_unsigned(fields[3]);
            if (!count || *count == 0 || *count > 0xffffffffull)
                throw fail("window count must be a positive integer");
            spec.max_in_window = static_cast<std::uint32_t>(*count);
            std::tie(spec.window_name, spec.window) = resolve_timing(fields[4]);
            if (spec.window == 0)
                throw fail("window length must be positive");
            config.windows.push_back(std::move(spec));
        }
    }

    if (!saw_hierarchy)
        throw ConfigError("missing [hierarchy] section");
    return config;
}

inline ProtocolConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ProtocolConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return parse_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace dramnet
