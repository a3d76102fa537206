#include <catch2/catch_amalgamated.hpp>

#include "dramnet/petri.hpp"

using namespace dramnet;

namespace {

// Two places gated by one transition each way, enough to exercise every
// arc kind.
struct SmallNet {
    PetriNet net;
    PetriNet::NodeId active, gate, act, pre, rd;

    SmallNet() {
        active = net.add_place(PlaceKind::active(), Coordinate::bank_level(0, 0));
        gate = net.add_place(PlaceKind::aux("gate"), Coordinate::rank_level(0), 1);
        act = net.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
        pre = net.add_transition(Command::PRE, Coordinate::bank_level(0, 0));
        rd = net.add_transition(Command::RD, Coordinate::bank_level(0, 0));
        net.add_arc(act, active, NormalArc{});
        net.add_arc(active, act, InhibitorArc{});
        net.add_arc(active, pre, ResetArc{});
        net.add_arc(active, rd, NormalArc{});
        net.add_arc(rd, active, NormalArc{});
        net.freeze();
    }
};

} // namespace

TEST_CASE("transition ids follow construction order") {
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("x"), Coordinate::rank_level(0));
    auto t1 = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    auto t2 = net.add_transition(Command::PDE, Coordinate::rank_level(0));
    net.add_arc(t1, p, NormalArc{});
    net.freeze();
    REQUIRE(net.transitions().size() == 2);
    CHECK(net.transitions()[0] == t1);
    CHECK(net.transitions()[1] == t2);
    CHECK(net.place_count() == 1);
    CHECK(net.is_place(p));
    CHECK(net.is_transition(t1));
}

TEST_CASE("duplicate nodes are rejected") {
    PetriNet net;
    net.add_place(PlaceKind::active(), Coordinate::bank_level(0, 0));
    CHECK_THROWS_AS(net.add_place(PlaceKind::active(), Coordinate::bank_level(0, 0)),
                    ConstructionError);
    net.add_place(PlaceKind::active(), Coordinate::bank_level(0, 1)); // other bank is fine

    net.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
    CHECK_THROWS_AS(net.add_transition(Command::ACT, Coordinate::bank_level(0, 0)),
                    ConstructionError);
    net.add_transition(Command::ACT, Coordinate::bank_level(0, 1));
}

TEST_CASE("command level must match coordinate level") {
    PetriNet net;
    CHECK_THROWS_AS(net.add_transition(Command::ACT, Coordinate::rank_level(0)),
                    ConstructionError);
    CHECK_THROWS_AS(net.add_transition(Command::PREA, Coordinate::bank_level(0, 0)),
                    ConstructionError);
}

TEST_CASE("arc endpoint and payload validation") {
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("p"), Coordinate::rank_level(0));
    auto q = net.add_place(PlaceKind::aux("q"), Coordinate::rank_level(0));
    auto t = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    auto u = net.add_transition(Command::REFA, Coordinate::rank_level(0));

    CHECK_THROWS_AS(net.add_arc(p, q, NormalArc{}), ConstructionError);      // place-place
    CHECK_THROWS_AS(net.add_arc(t, u, NormalArc{}), ConstructionError);      // transition-transition
    CHECK_THROWS_AS(net.add_arc(p, t, NormalArc{0}), ConstructionError);     // zero weight
    CHECK_THROWS_AS(net.add_arc(t, p, InhibitorArc{}), ConstructionError);   // wrong direction
    CHECK_THROWS_AS(net.add_arc(p, q, InhibitorArc{}), ConstructionError);
    CHECK_THROWS_AS(net.add_arc(p, t, InhibitorArc{0}), ConstructionError);
    CHECK_THROWS_AS(net.add_arc(t, p, ResetArc{}), ConstructionError);
    CHECK_THROWS_AS(net.add_arc(p, t, TimedInhibitorArc{5, 2, 1}), ConstructionError); // t1 > t2
    CHECK_THROWS_AS(net.add_arc(p, t, TimedInhibitorArc{0, 5, 0}), ConstructionError); // threshold 0
    CHECK_THROWS_AS(net.add_arc(p, t, TimingArc{3, "x"}), ConstructionError); // place endpoint
    CHECK_THROWS_AS(net.add_arc(99, t, NormalArc{}), ConstructionError);     // unknown node
    net.add_arc(p, t, TimedInhibitorArc{2, 5, 1});
    net.add_arc(p, t, ResetArc{});
    net.add_arc(t, u, TimingArc{3, "x"});
}

TEST_CASE("freeze locks structure but still accepts timing arcs") {
    SmallNet s;
    CHECK(s.net.frozen());
    CHECK_THROWS_AS(s.net.add_place(PlaceKind::aux("late"), Coordinate::rank_level(1)),
                    ConstructionError);
    CHECK_THROWS_AS(s.net.add_transition(Command::PREA, Coordinate::rank_level(1)),
                    ConstructionError);
    CHECK_THROWS_AS(s.net.add_arc(s.active, s.rd, NormalArc{}), ConstructionError);
    s.net.add_arc(s.act, s.rd, TimingArc{5, "tRCD"});
    REQUIRE(s.net.timing_out(s.act).size() == 1);
    CHECK(s.net.timing_out(s.act)[0].target == s.rd);
    CHECK(s.net.timing_out(s.act)[0].delay == 5);

    PetriNet never;
    never.add_place(PlaceKind::aux("x"), Coordinate::rank_level(0));
    CHECK_THROWS_AS(never.initial_marking(), UsageError);
    CHECK_THROWS_AS(never.enabled_set(Marking{}), UsageError);
}

TEST_CASE("double freeze is an error") {
    PetriNet net;
    net.freeze();
    CHECK_THROWS_AS(net.freeze(), ConstructionError);
}

TEST_CASE("enabledness: consumption and inhibition") {
    SmallNet s;
    Marking idle = s.net.initial_marking();
    CHECK(s.net.tokens(idle, s.active) == 0);
    CHECK(s.net.tokens(idle, s.gate) == 1);

    CHECK(s.net.enabled(idle, s.act));
    CHECK(s.net.enabled(idle, s.pre)); // reset arcs never gate firing
    CHECK_FALSE(s.net.enabled(idle, s.rd));

    Marking open = s.net.fire(idle, s.act);
    CHECK(s.net.tokens(open, s.active) == 1);
    CHECK_FALSE(s.net.enabled(open, s.act)); // inhibited by its own product
    CHECK(s.net.enabled(open, s.rd));
    CHECK(s.net.fire(open, s.rd) == open); // consume + produce is a no-op on counts
    CHECK(s.net.fire(open, s.pre) == idle);
}

TEST_CASE("firing a disabled transition is a hard error") {
    SmallNet s;
    Marking idle = s.net.initial_marking();
    CHECK_THROWS_AS(s.net.fire(idle, s.rd), FiringError);
    Marking open = s.net.fire(idle, s.act);
    CHECK_THROWS_AS(s.net.fire(open, s.act), FiringError);
}

TEST_CASE("asking transition questions about a place is API misuse") {
    SmallNet s;
    Marking idle = s.net.initial_marking();
    CHECK_THROWS_AS(s.net.enabled(idle, s.active), UsageError);
    CHECK_THROWS_AS(s.net.fire(idle, s.gate), UsageError);
    CHECK_THROWS_AS((void)s.net.place_offset(s.act), UsageError);
}

TEST_CASE("fire order: consume, produce, then reset") {
    // A transition that produces into a place it also resets must leave the
    // place empty — the reset is the last word.
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("wiped"), Coordinate::rank_level(0), 3);
    auto t = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    net.add_arc(t, p, NormalArc{2});
    net.add_arc(p, t, ResetArc{});
    net.freeze();
    Marking m = net.fire(net.initial_marking(), t);
    CHECK(net.tokens(m, p) == 0);
}

TEST_CASE("weighted consumption gates on the full weight") {
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("fuel"), Coordinate::rank_level(0), 3);
    auto t = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    net.add_arc(p, t, NormalArc{2});
    net.freeze();
    Marking m = net.initial_marking();
    m = net.fire(m, t);
    CHECK(net.tokens(m, p) == 1);
    CHECK_FALSE(net.enabled(m, t));
}

TEST_CASE("two normal arcs between the same pair sum their weights") {
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("fuel"), Coordinate::rank_level(0), 3);
    auto t = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    net.add_arc(p, t, NormalArc{1});
    net.add_arc(p, t, NormalArc{1});
    net.freeze();
    Marking m = net.fire(net.initial_marking(), t);
    CHECK(net.tokens(m, p) == 1);
}

TEST_CASE("molecule example: firing with weights 1,2 -> 2") {
    PetriNet net;
    auto p1 = net.add_place(PlaceKind::aux("p1"), Coordinate::rank_level(0), 2);
    auto p2 = net.add_place(PlaceKind::aux("p2"), Coordinate::rank_level(0), 2);
    auto p3 = net.add_place(PlaceKind::aux("p3"), Coordinate::rank_level(0), 0);
    auto t1 = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    net.add_arc(p1, t1, NormalArc{1});
    net.add_arc(p2, t1, NormalArc{2});
    net.add_arc(t1, p3, NormalArc{2});
    net.freeze();

    Marking before = net.initial_marking();
    REQUIRE(before.counts == std::vector<std::uint32_t>{2, 2, 0});
    Marking after = net.fire(before, t1);
    CHECK(after.counts == std::vector<std::uint32_t>{1, 0, 2});
    CHECK_FALSE(net.enabled(after, t1)); // p2 exhausted
}

TEST_CASE("enabled_set reports construction order") {
    SmallNet s;
    Marking open = s.net.fire(s.net.initial_marking(), s.act);
    auto enabled = s.net.enabled_set(open);
    REQUIRE(enabled == std::vector<PetriNet::NodeId>{s.pre, s.rd});
}

TEST_CASE("marking identity is counts only") {
    SmallNet s;
    Marking a = s.net.initial_marking();
    Marking b = s.net.fire(s.net.fire(a, s.act), s.pre); // round trip
    CHECK(a == b);
    CHECK(MarkingHash{}(a) == MarkingHash{}(b));
    Marking c = s.net.fire(a, s.act);
    CHECK(a != c);
}

TEST_CASE("lookups by kind and label") {
    SmallNet s;
    CHECK(s.net.find_place(PlaceKind::active(), Coordinate::bank_level(0, 0)) == s.active);
    CHECK(s.net.find_place(PlaceKind::aux("gate"), Coordinate::rank_level(0)) == s.gate);
    CHECK_FALSE(s.net.find_place(PlaceKind::aux("nope"), Coordinate::rank_level(0)).has_value());
    CHECK(s.net.find_transition(Command::ACT, Coordinate::bank_level(0, 0)) == s.act);
    CHECK_FALSE(s.net.find_transition(Command::WRA, Coordinate::bank_level(0, 0)).has_value());
}

TEST_CASE("place_effect reports consume/produce/reset per place") {
    SmallNet s;
    auto effect = s.net.place_effect(s.rd, s.active);
    CHECK(effect.consumed == 1);
    CHECK(effect.produced == 1);
    CHECK_FALSE(effect.reset);
    auto wipe = s.net.place_effect(s.pre, s.active);
    CHECK(wipe.consumed == 0);
    CHECK(wipe.reset);
    auto none = s.net.place_effect(s.act, s.gate);
    CHECK(none.consumed == 0);
    CHECK(none.produced == 0);
    CHECK_FALSE(none.reset);
}

TEST_CASE("age-tracked places are the timed-inhibitor sources") {
    PetriNet net;
    auto p = net.add_place(PlaceKind::aux("watched"), Coordinate::rank_level(0));
    auto q = net.add_place(PlaceKind::aux("plain"), Coordinate::rank_level(0));
    auto t = net.add_transition(Command::PREA, Coordinate::rank_level(0));
    net.add_arc(p, t, TimedInhibitorArc{0, 4, 1});
    net.add_arc(p, t, TimedInhibitorArc{9, 9, 2}); // second arc, same place
    net.add_arc(q, t, NormalArc{});
    net.freeze();
    CHECK(net.age_tracked_places() == std::vector<PetriNet::NodeId>{p});
    REQUIRE(net.timed_inhibitors_in(t).size() == 2);
    CHECK(net.timed_inhibitors_in(t)[1].threshold == 2);
}

TEST_CASE("labels render like traces") {
    CHECK(TransitionLabel{Command::ACT, Coordinate::bank_level(0, 0)}.to_string() ==
          "ACT (RA0BA0)");
    CHECK(TransitionLabel{Command::PREA, Coordinate::rank_level(2)}.to_string() == "PREA (RA2)");
    CHECK(Coordinate::bank_level(1, 3).to_string() == "RA1BA3");
    CHECK(parse_coordinate("RA1BA3") == Coordinate::bank_level(1, 3));
    CHECK(parse_coordinate("RA7") == Coordinate::rank_level(7));
    CHECK_FALSE(parse_coordinate("BA3").has_value());
    CHECK_FALSE(parse_coordinate("RA1BA").has_value());
    CHECK_FALSE(parse_coordinate("RA1BA3x").has_value());
    CHECK(parse_command("WRA") == Command::WRA);
    CHECK_FALSE(parse_command("NOP").has_value());
}
