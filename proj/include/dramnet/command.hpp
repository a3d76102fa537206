#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dramnet {

/// Clock ticks; the protocol config declares the unit (cycles, ps, ...).
using TimeStamp = std::uint64_t;

/// The command vocabulary. ACT..WRA address a single bank, the rest an
/// entire rank.
enum class Command : std::uint8_t {
    ACT,
    PRE,
    RD,
    RDA,
    WR,
    WRA,
    PREA,
    REFA,
    PDE,
    PDX,
    SRE,
    SRX,
};

inline constexpr std::array<Command, 12> all_commands = {
    Command::ACT,  Command::PRE,  Command::RD,  Command::RDA,
    Command::WR,   Command::WRA,  Command::PREA, Command::REFA,
    Command::PDE,  Command::PDX,  Command::SRE, Command::SRX,
};

inline constexpr bool is_bank_level(Command cmd) {
    return static_cast<std::uint8_t>(cmd) <= static_cast<std::uint8_t>(Command::WRA);
}

inline constexpr std::string_view to_string(Command cmd) {
    constexpr std::array<std::string_view, 12> names = {
        "ACT", "PRE", "RD", "RDA", "WR", "WRA",
        "PREA", "REFA", "PDE", "PDX", "SRE", "SRX",
    };
    return names[static_cast<std::uint8_t>(cmd)];
}

inline std::optional<Command> parse_command(std::string_view text) {
    for (Command cmd : all_commands)
        if (to_string(cmd) == text)
            return cmd;
    return std::nullopt;
}

/// Position of a node in the rank/bank hierarchy. Rank-level nodes carry no
/// bank index.
struct Coordinate {
    std::uint32_t rank = 0;
    std::optional<std::uint32_t> bank;

    static constexpr Coordinate rank_level(std::uint32_t r) { return Coordinate{r, std::nullopt}; }
    static constexpr Coordinate bank_level(std::uint32_t r, std::uint32_t b) {
        return Coordinate{r, b};
    }

    bool is_bank_level() const { return bank.has_value(); }

    friend bool operator==(const Coordinate&, const Coordinate&) = default;
    friend auto operator<=>(const Coordinate&, const Coordinate&) = default;

    /// "RA0BA1" for bank-level, "RA0" for rank-level coordinates.
    std::string to_string() const {
        std::string out = "RA" + std::to_string(rank);
        if (bank)
            out += "BA" + std::to_string(*bank);
        return out;
    }
};

inline std::optional<Coordinate> parse_coordinate(std::string_view text) {
    auto read_index = [&](std::string_view prefix) -> std::optional<std::uint32_t> {
        if (text.substr(0, prefix.size()) != prefix)
            return std::nullopt;
        text.remove_prefix(prefix.size());
        if (text.empty() || text[0] < '0' || text[0] > '9')
            return std::nullopt;
        std::uint64_t value = 0;
        while (!text.empty() && text[0] >= '0' && text[0] <= '9') {
            value = value * 10 + static_cast<std::uint64_t>(text[0] - '0');
            if (value > 0xffffffffull)
                return std::nullopt;
            text.remove_prefix(1);
        }
        return static_cast<std::uint32_t>(value);
    };

    auto rank = read_index("RA");
    if (!rank)
        return std::nullopt;
    Coordinate coord = Coordinate::rank_level(*rank);
    if (!text.empty()) {
        auto bank = read_index("BA");
        if (!bank || !text.empty())
            return std::nullopt;
        coord.bank = *bank;
    }
    return coord;
}

/// A transition identified by what it does rather than by a node id; the
/// unit of trace rendering and of net comparison.
struct TransitionLabel {
    Command command = Command::ACT;
    Coordinate coord;

    friend bool operator==(const TransitionLabel&, const TransitionLabel&) = default;
    friend auto operator<=>(const TransitionLabel&, const TransitionLabel&) = default;

    /// "ACT (RA0BA0)" — the rendering used in traces and state graphs.
    std::string to_string() const {
        return std::string(dramnet::to_string(command)) + " (" + coord.to_string() + ")";
    }
};

} // namespace dramnet
