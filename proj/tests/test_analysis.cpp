#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "dramnet/analysis.hpp"
#include "dramnet/builder.hpp"

using namespace dramnet;

namespace {

ProtocolConfig hierarchy_only(std::uint32_t ranks, std::uint32_t banks) {
    ProtocolConfig config;
    config.ranks = ranks;
    config.banks_per_rank = banks;
    return config;
}

PetriNet protocol_net(std::uint32_t ranks, std::uint32_t banks) {
    return build_protocol_net(hierarchy_only(ranks, banks));
}

std::uint32_t tokens_at(const PetriNet& net, const Marking& m, const PlaceKind& kind,
                        const Coordinate& coord) {
    return net.tokens(m, *net.find_place(kind, coord));
}

// One open/close bank cycle: ACT marks the row and is inhibited while it
// stays open; PRE closes it by reset. `with_inhibitor = false` drops the
// back-to-back ACT guard, a deliberately different behavior.
PetriNet toy_bank(bool with_inhibitor) {
    PetriNet net;
    auto row = net.add_place(PlaceKind::active(), Coordinate::bank_level(0, 0));
    auto act = net.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
    auto pre = net.add_transition(Command::PRE, Coordinate::bank_level(0, 0));
    net.add_arc(act, row, NormalArc{});
    if (with_inhibitor)
        net.add_arc(row, act, InhibitorArc{});
    net.add_arc(row, pre, ResetArc{});
    net.freeze();
    return net;
}

} // namespace

TEST_CASE("unrolling a two-bank rank finds nine states, the deepest three away") {
    PetriNet net = protocol_net(1, 2);
    StateGraph graph = unroll(net);

    CHECK(graph.state_count() == 9);
    CHECK(graph.k_min() == 3);
    CHECK(graph.depth == std::vector<std::uint32_t>{0, 1, 1, 1, 1, 2, 2, 2, 3});
    CHECK(graph.index_of(net.initial_marking()) == 0);
    CHECK_FALSE(graph.index_of(Marking{{9, 9, 9, 9}}).has_value());

    // Breadth-first discovery order: idle; power-down, self-refresh, bank 0
    // open, bank 1 open; then the pairings; finally power-down with both
    // banks open.
    auto rank = Coordinate::rank_level(0);
    auto b0 = Coordinate::bank_level(0, 0);
    auto b1 = Coordinate::bank_level(0, 1);
    CHECK(tokens_at(net, graph.states[1], PlaceKind::power_down(), rank) == 1);
    CHECK(tokens_at(net, graph.states[2], PlaceKind::self_refresh(), rank) == 1);
    CHECK(tokens_at(net, graph.states[3], PlaceKind::active(), b0) == 1);
    CHECK(tokens_at(net, graph.states[3], PlaceKind::active(), b1) == 0);
    CHECK(tokens_at(net, graph.states[4], PlaceKind::active(), b1) == 1);
    CHECK(tokens_at(net, graph.states[6], PlaceKind::active(), b0) == 1);
    CHECK(tokens_at(net, graph.states[6], PlaceKind::active(), b1) == 1);
    CHECK(tokens_at(net, graph.states[8], PlaceKind::power_down(), rank) == 1);
    CHECK(tokens_at(net, graph.states[8], PlaceKind::active(), b0) == 1);
    CHECK(tokens_at(net, graph.states[8], PlaceKind::active(), b1) == 1);

    // Out-degree histogram: five frozen-ish states with a single exit, the
    // idle state with eight commands, the one-bank-open states with nine,
    // and both-banks-open with twelve.
    std::map<std::size_t, int> histogram;
    for (const auto& out : graph.edges)
        ++histogram[out.size()];
    CHECK(histogram == std::map<std::size_t, int>{{1, 5}, {8, 1}, {9, 2}, {12, 1}});
}

TEST_CASE("reachable-state counts match the closed form") {
    for (std::uint32_t banks : {1u, 2u, 3u, 4u}) {
        INFO("banks=" << banks);
        StateGraph graph = unroll(protocol_net(1, banks));
        CHECK(BigCount(graph.state_count()) == state_count_formula(1, banks));
    }
    StateGraph two_ranks = unroll(protocol_net(2, 2));
    CHECK(two_ranks.state_count() == 81); // 9 per rank, independent
    CHECK(BigCount(two_ranks.state_count()) == state_count_formula(2, 2));

    CHECK(state_count_formula(1, 1) == 5);
    CHECK(state_count_formula(1, 8) == 513);
    CHECK(state_count_formula(1, 16) == 131073);
    CHECK(state_count_formula(2, 8) == 263169);
    CHECK(state_count_formula(4, 8) == 69257922561ull);
    // Far beyond any integer width: a 64-rank, 4-bank channel has 33^64
    // reachable states.
    CHECK(state_count_formula(64, 4).str() ==
          "15307072958184811420872246488959899899488864500972168001373202"
          "692974419469010486491951430830622721");
}

TEST_CASE("shortest-path depth grows with the hierarchy") {
    struct Case {
        std::uint32_t ranks, banks;
        std::uint32_t k_min;
    };
    for (Case c : {Case{1, 1, 2}, Case{1, 2, 3}, Case{1, 4, 5}, Case{2, 2, 6}}) {
        INFO("ranks=" << c.ranks << " banks=" << c.banks);
        CHECK(unroll(protocol_net(c.ranks, c.banks)).k_min() == c.k_min);
    }
}

TEST_CASE("unroll honors its state limit and reports progress") {
    PetriNet net = protocol_net(1, 2);
    try {
        unroll(net, UnrollOptions{4, 1});
        FAIL("expected BoundedExplorationError");
    } catch (const BoundedExplorationError& e) {
        CHECK(e.partial_count == 4);
        CHECK(std::string(e.what()).find("state limit 4") != std::string::npos);
    }

    PetriNet open;
    open.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
    CHECK_THROWS_AS(unroll(open), UsageError); // not frozen
}

TEST_CASE("unroll output is identical across thread counts") {
    PetriNet net = protocol_net(2, 3);
    StateGraph one = unroll(net, UnrollOptions{1ull << 24, 1});
    for (unsigned threads : {2u, 4u, 7u}) {
        StateGraph many = unroll(net, UnrollOptions{1ull << 24, threads});
        REQUIRE(many.state_count() == one.state_count());
        CHECK(many.states == one.states);
        CHECK(many.depth == one.depth);
        for (std::size_t s = 0; s < one.edges.size(); ++s) {
            REQUIRE(many.edges[s].size() == one.edges[s].size());
            for (std::size_t e = 0; e < one.edges[s].size(); ++e) {
                CHECK(many.edges[s][e].transition == one.edges[s][e].transition);
                CHECK(many.edges[s][e].target == one.edges[s][e].target);
            }
        }
    }
}

TEST_CASE("trace counts by dynamic programming match the known series") {
    StateGraph graph = unroll(protocol_net(1, 2));
    CHECK(count_traces(graph, 0) == 1); // the empty trace
    CHECK(count_traces(graph, 1) == 8);
    CHECK(count_traces(graph, 2) == 52);
    CHECK(count_traces(graph, 3) == 368);
    CHECK(count_traces(graph, 4) == 2664);
    CHECK(count_traces(graph, 5) == 19624);
    CHECK(count_traces(graph, 6) == 145926);
    CHECK(count_traces(graph, 7) == 1091106);
}

TEST_CASE("trace enumeration agrees with the counts and streams in order") {
    PetriNet net = protocol_net(1, 2);

    auto traces = enumerate_traces(net, TraceOptions{3, 1});
    CHECK(traces.size() == 368);
    CHECK(render_trace(net, traces.front()) == "PREA (RA0) ; PREA (RA0) ; PREA (RA0)");

    // Depth-first in construction order: the first transition changes
    // slowest, and within a block the continuations are ordered too.
    CHECK(render_trace(net, traces[1]) == "PREA (RA0) ; PREA (RA0) ; REFA (RA0)");
    std::set<std::string> rendered;
    for (const auto& trace : traces)
        rendered.insert(render_trace(net, trace));
    CHECK(rendered.size() == 368); // all distinct

    // The streaming interface emits the same sequences without buffering.
    std::vector<std::string> streamed;
    std::uint64_t emitted = enumerate_traces(net, TraceOptions{3, 1},
                                             [&](std::span<const PetriNet::NodeId> trace) {
                                                 streamed.push_back(render_trace(net, trace));
                                             });
    CHECK(emitted == 368);
    REQUIRE(streamed.size() == traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i)
        CHECK(streamed[i] == render_trace(net, traces[i]));

    CHECK(enumerate_traces(net, TraceOptions{0, 1}).empty());
    CHECK(enumerate_traces(net, TraceOptions{1, 1}).size() == 8);
}

TEST_CASE("trace enumeration is thread-count independent") {
    PetriNet net = protocol_net(1, 2);
    auto one = enumerate_traces(net, TraceOptions{4, 1});
    REQUIRE(one.size() == 2664);
    for (unsigned threads : {2u, 4u, 13u}) {
        auto many = enumerate_traces(net, TraceOptions{4, threads});
        CHECK(many == one);
    }
}

TEST_CASE("trace enumeration stops at its limit") {
    PetriNet net = protocol_net(1, 2);
    for (unsigned threads : {1u, 4u}) {
        INFO("threads=" << threads);
        try {
            enumerate_traces(net, TraceOptions{3, threads, 100});
            FAIL("expected BoundedExplorationError");
        } catch (const BoundedExplorationError& e) {
            CHECK(e.partial_count == 100);
        }
    }
}

TEST_CASE("known three-command sequences are all enumerated") {
    PetriNet net = protocol_net(1, 2);
    std::set<std::string> rendered;
    enumerate_traces(net, TraceOptions{3, 1}, [&](std::span<const PetriNet::NodeId> trace) {
        rendered.insert(render_trace(net, trace));
    });

    for (const char* expected : {
             "PREA (RA0) ; PREA (RA0) ; PREA (RA0)",
             "PREA (RA0) ; PRE (RA0BA1) ; SRE (RA0)",
             "ACT (RA0BA0) ; ACT (RA0BA1) ; WR (RA0BA0)",
             "SRE (RA0) ; SRX (RA0) ; PDE (RA0)",
             "ACT (RA0BA0) ; PREA (RA0) ; ACT (RA0BA0)",
             "ACT (RA0BA0) ; ACT (RA0BA1) ; PDE (RA0)",
         })
        CHECK(rendered.contains(expected));

    // And some impossible ones are not.
    for (const char* illegal : {
             "RD (RA0BA0) ; PREA (RA0) ; PREA (RA0)",   // read from a closed row
             "ACT (RA0BA0) ; ACT (RA0BA0) ; PREA (RA0)", // double activate
             "PDE (RA0) ; ACT (RA0BA0) ; PDX (RA0)",     // activate while powered down
         })
        CHECK_FALSE(rendered.contains(illegal));
}

TEST_CASE("label rendering joins with semicolons") {
    CHECK(render_labels({}) == "");
    std::vector<TransitionLabel> labels{
        {Command::ACT, Coordinate::bank_level(0, 0)},
        {Command::PREA, Coordinate::rank_level(0)},
    };
    CHECK(render_labels(labels) == "ACT (RA0BA0) ; PREA (RA0)");
}

TEST_CASE("a net is equivalent to itself, and a missing guard is caught") {
    PetriNet guarded = toy_bank(true);
    PetriNet unguarded = toy_bank(false);

    CHECK(equivalent(guarded, guarded, 6).equivalent);
    CHECK(equivalent(protocol_net(1, 2), protocol_net(1, 2), 4).equivalent);

    // Sequences of length 1 agree: both offer ACT and PRE.
    CHECK(equivalent(guarded, unguarded, 1).equivalent);

    auto report = equivalent(guarded, unguarded, 2);
    REQUIRE_FALSE(report.equivalent);
    CHECK(render_labels(report.witness) == "ACT (RA0BA0) ; ACT (RA0BA0)");

    // Deeper searches still return the shortest witness.
    auto deep = equivalent(guarded, unguarded, 6);
    REQUIRE_FALSE(deep.equivalent);
    CHECK(render_labels(deep.witness) == "ACT (RA0BA0) ; ACT (RA0BA0)");
}

TEST_CASE("equivalence checking rejects mismatched hierarchies") {
    CHECK_THROWS_AS(equivalent(protocol_net(1, 2), protocol_net(1, 4), 2), UsageError);
    CHECK_THROWS_AS(equivalent(protocol_net(1, 2), protocol_net(2, 2), 2), UsageError);

    PetriNet unfrozen;
    unfrozen.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
    CHECK_THROWS_AS(equivalent(unfrozen, toy_bank(true), 1), UsageError);
}

TEST_CASE("equivalence is behavioral, not structural") {
    // Same observable protocol, different internals: the reset-based PRE
    // versus a consume-based PRE that needs the token. They differ exactly
    // when PRE fires on an idle bank.
    PetriNet consume_pre;
    auto row = consume_pre.add_place(PlaceKind::active(), Coordinate::bank_level(0, 0));
    auto act = consume_pre.add_transition(Command::ACT, Coordinate::bank_level(0, 0));
    auto pre = consume_pre.add_transition(Command::PRE, Coordinate::bank_level(0, 0));
    consume_pre.add_arc(act, row, NormalArc{});
    consume_pre.add_arc(row, act, InhibitorArc{});
    consume_pre.add_arc(row, pre, NormalArc{});
    consume_pre.freeze();

    auto report = equivalent(toy_bank(true), consume_pre, 3);
    REQUIRE_FALSE(report.equivalent);
    // PRE on the idle bank: legal with a reset arc, not with a consume arc.
    CHECK(render_labels(report.witness) == "PRE (RA0BA0)");
}
