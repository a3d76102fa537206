#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dramnet/errors.hpp"
#include "dramnet/petri.hpp"

namespace dramnet {

using BigCount = boost::multiprecision::cpp_int;

/// The reachable behavior of a net: states in breadth-first discovery
/// order (the initial marking is state 0), per-state successor edges in
/// transition construction order, and the depth at which each state first
/// appears.
struct StateGraph {
    struct Edge {
        PetriNet::NodeId transition = 0;
        std::uint32_t target = 0;
    };

    std::vector<Marking> states;
    std::vector<std::vector<Edge>> edges;
    std::vector<std::uint32_t> depth;

    std::size_t state_count() const { return states.size(); }

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (const auto& out : edges)
            total += out.size();
        return total;
    }

    /// Fewest firings that reach the hardest-to-reach state.
    std::uint32_t k_min() const {
        std::uint32_t best = 0;
        for (std::uint32_t d : depth)
            best = std::max(best, d);
        return best;
    }

    std::optional<std::uint32_t> index_of(const Marking& m) const {
        for (std::uint32_t i = 0; i < states.size(); ++i)
            if (states[i] == m)
                return i;
        return std::nullopt;
    }
};

struct UnrollOptions {
    std::uint64_t state_limit = 1ull << 24;
    unsigned threads = 1;
};

/// Level-synchronous breadth-first exploration from the initial marking.
/// Successor computation is fanned out over contiguous frontier chunks and
/// merged back in frontier order, so state numbering and edge order are
/// identical for every thread count. Throws BoundedExplorationError when
/// the state count would exceed the limit.
inline StateGraph unroll(const PetriNet& net, const UnrollOptions& options = {}) {
    if (!net.frozen())
        throw UsageError("unroll expects a frozen net");

    StateGraph graph;
    std::unordered_map<Marking, std::uint32_t, MarkingHash> index;
    graph.states.push_back(net.initial_marking());
    graph.edges.emplace_back();
    graph.depth.push_back(0);
    index.emplace(graph.states[0], 0);

    using Successor = std::pair<PetriNet::NodeId, Marking>;
    std::vector<std::uint32_t> frontier{0};
    std::uint32_t level = 0;

    while (!frontier.empty()) {
        ++level;
        // successors[i] belongs to frontier[i]; chunks keep that order.
        std::vector<std::vector<Successor>> successors(frontier.size());
        auto expand = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const Marking& m = graph.states[frontier[i]];
                for (PetriNet::NodeId t : net.transitions())
                    if (net.enabled(m, t))
                        successors[i].emplace_back(t, net.fire(m, t));
            }
        };
        unsigned workers = std::max(1u, options.threads);
        if (workers == 1 || frontier.size() < 2 * workers) {
            expand(0, frontier.size());
        } else {
            std::vector<std::thread> pool;
            std::size_t chunk = (frontier.size() + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                std::size_t begin = std::min(frontier.size(), w * chunk);
                std::size_t end = std::min(frontier.size(), begin + chunk);
                if (begin < end)
                    pool.emplace_back(expand, begin, end);
            }
            for (auto& worker : pool)
                worker.join();
        }

        std::vector<std::uint32_t> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            for (auto& [t, marking] : successors[i]) {
                auto [it, inserted] = index.try_emplace(marking, 0);
                if (inserted) {
                    if (graph.states.size() >= options.state_limit)
                        throw BoundedExplorationError(
                            graph.states.size(),
                            "state limit " + std::to_string(options.state_limit) +
                                " reached during unroll");
                    it->second = static_cast<std::uint32_t>(graph.states.size());
                    graph.states.push_back(std::move(marking));
                    graph.edges.emplace_back();
                    graph.depth.push_back(level);
                    next.push_back(it->second);
                }
                graph.edges[frontier[i]].push_back(StateGraph::Edge{t, it->second});
            }
        }
        frontier = std::move(next);
    }
    return graph;
}

/// Closed form for the reachable-state count of a protocol net: per rank,
/// each bank is open or closed (2^B markings), doubled by power-down, plus
/// the self-refresh marking — all ranks independent.
inline BigCount state_count_formula(std::uint32_t ranks, std::uint32_t banks_per_rank) {
    BigCount per_rank = (BigCount(1) << (banks_per_rank + 1)) + 1;
    BigCount total = 1;
    for (std::uint32_t r = 0; r < ranks; ++r)
        total *= per_rank;
    return total;
}

/// Number of distinct length-k firing sequences from the initial state,
/// by dynamic programming over the state graph.
inline BigCount count_traces(const StateGraph& graph, unsigned k) {
    std::vector<BigCount> current(graph.state_count(), 0);
    current[0] = 1;
    for (unsigned step = 0; step < k; ++step) {
        std::vector<BigCount> next(graph.state_count(), 0);
        for (std::uint32_t s = 0; s < graph.state_count(); ++s) {
            if (current[s] == 0)
                continue;
            for (const StateGraph::Edge& edge : graph.edges[s])
                next[edge.target] += current[s];
        }
        current = std::move(next);
    }
    BigCount total = 0;
    for (const BigCount& c : current)
        total += c;
    return total;
}

struct TraceOptions {
    unsigned depth = 1;
    unsigned threads = 1;
    std::uint64_t trace_limit = 1ull << 24;
};

using TraceSink = std::function<void(std::span<const PetriNet::NodeId>)>;

namespace detail {

inline void trace_dfs(const PetriNet& net, const Marking& m, unsigned remaining,
                      std::vector<PetriNet::NodeId>& prefix, std::uint64_t limit,
                      std::uint64_t& emitted, const TraceSink& sink) {
    if (remaining == 0) {
        if (emitted >= limit)
            throw BoundedExplorationError(limit, "trace limit " + std::to_string(limit) +
                                                     " reached during enumeration");
        ++emitted;
        sink(prefix);
        return;
    }
    for (PetriNet::NodeId t : net.transitions()) {
        if (!net.enabled(m, t))
            continue;
        prefix.push_back(t);
        trace_dfs(net, net.fire(m, t), remaining - 1, prefix, limit, emitted, sink);
        prefix.pop_back();
    }
}

} // namespace detail

/// Streams every length-k firing sequence to the sink, depth-first in
/// transition construction order. With several threads the search is split
/// by first transition and the per-branch results are replayed to the sink
/// in order, so the emitted sequence is thread-count independent.
inline std::uint64_t enumerate_traces(const PetriNet& net, const TraceOptions& options,
                                      const TraceSink& sink) {
    if (!net.frozen())
        throw UsageError("enumerate_traces expects a frozen net");
    if (options.depth == 0)
        return 0;

    Marking initial = net.initial_marking();
    unsigned workers = std::max(1u, options.threads);
    std::uint64_t emitted = 0;
    std::vector<PetriNet::NodeId> prefix;

    if (workers == 1) {
        detail::trace_dfs(net, initial, options.depth, prefix, options.trace_limit, emitted,
                          sink);
        return emitted;
    }

    // One branch per enabled first transition, processed by a small pool;
    // each branch buffers its traces, and the buffers are drained in
    // transition order after the pool finishes.
    std::vector<PetriNet::NodeId> roots;
    for (PetriNet::NodeId t : net.transitions())
        if (net.enabled(initial, t))
            roots.push_back(t);

    std::vector<std::vector<std::vector<PetriNet::NodeId>>> buffers(roots.size());
    std::vector<std::uint8_t> overflow(roots.size(), 0);
    std::atomic<std::size_t> cursor{0};
    auto work = [&] {
        for (std::size_t i = cursor.fetch_add(1); i < roots.size(); i = cursor.fetch_add(1)) {
            std::vector<PetriNet::NodeId> local{roots[i]};
            std::uint64_t local_count = 0;
            auto buffer_sink = [&](std::span<const PetriNet::NodeId> trace) {
                buffers[i].emplace_back(trace.begin(), trace.end());
            };
            try {
                detail::trace_dfs(net, net.fire(initial, roots[i]), options.depth - 1, local,
                                  options.trace_limit, local_count, buffer_sink);
            } catch (const BoundedExplorationError&) {
                overflow[i] = 1; // a single branch already exceeds the cap
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, roots.size()); ++w)
        pool.emplace_back(work);
    for (auto& worker : pool)
        worker.join();

    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (overflow[i])
            throw BoundedExplorationError(options.trace_limit,
                                          "trace limit " + std::to_string(options.trace_limit) +
                                              " reached during enumeration");
        for (const auto& trace : buffers[i]) {
            if (emitted >= options.trace_limit)
                throw BoundedExplorationError(options.trace_limit,
                                              "trace limit " +
                                                  std::to_string(options.trace_limit) +
                                                  " reached during enumeration");
            ++emitted;
            sink(trace);
        }
    }
    return emitted;
}

/// Materializing convenience over the sink interface.
inline std::vector<std::vector<PetriNet::NodeId>> enumerate_traces(const PetriNet& net,
                                                                   const TraceOptions& options) {
    std::vector<std::vector<PetriNet::NodeId>> traces;
    enumerate_traces(net, options, [&](std::span<const PetriNet::NodeId> trace) {
        traces.emplace_back(trace.begin(), trace.end());
    });
    return traces;
}

/// "ACT (RA0BA0) ; ACT (RA0BA1) ; WR (RA0BA0)"
inline std::string render_trace(const PetriNet& net, std::span<const PetriNet::NodeId> trace) {
    std::string out;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i)
            out += " ; ";
        out += net.transition(trace[i]).label().to_string();
    }
    return out;
}

inline std::string render_labels(std::span<const TransitionLabel> labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i)
            out += " ; ";
        out += labels[i].to_string();
    }
    return out;
}

struct EquivalenceReport {
    bool equivalent = true;
    std::vector<TransitionLabel> witness; // shortest differing sequence, if any
};

/// Compares what two nets can do, up to `depth` firings: both must enable
/// the same command labels after every common firing sequence. The search
/// runs breadth-first over pairs of markings, so a reported witness is a
/// shortest one (ties broken by label order). Nets over different rank/bank
/// coordinate sets are a modeling error, not a behavioral difference.
inline EquivalenceReport equivalent(const PetriNet& a, const PetriNet& b, unsigned depth) {
    if (!a.frozen() || !b.frozen())
        throw UsageError("equivalence check expects frozen nets");

    auto coordinates = [](const PetriNet& net) {
        std::vector<Coordinate> coords;
        for (auto t : net.transitions())
            coords.push_back(net.transition(t).coord);
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        return coords;
    };
    if (coordinates(a) != coordinates(b))
        throw UsageError("nets describe different rank/bank hierarchies");

    std::map<TransitionLabel, PetriNet::NodeId> in_a, in_b;
    for (auto t : a.transitions())
        in_a.emplace(a.transition(t).label(), t);
    for (auto t : b.transitions())
        in_b.emplace(b.transition(t).label(), t);
    std::vector<TransitionLabel> labels;
    for (const auto& entry : in_a)
        labels.push_back(entry.first);
    for (const auto& entry : in_b)
        if (!in_a.contains(entry.first))
            labels.push_back(entry.first);
    std::sort(labels.begin(), labels.end());

    struct ProductState {
        Marking a;
        Marking b;
        std::uint32_t parent = 0;
        TransitionLabel via;
    };

    auto enables = [](const PetriNet& net, const std::map<TransitionLabel, PetriNet::NodeId>& map,
                      const Marking& m, const TransitionLabel& label) {
        auto it = map.find(label);
        return it != map.end() && net.enabled(m, it->second);
    };

    std::vector<ProductState> states{{a.initial_marking(), b.initial_marking(), 0, {}}};
    std::vector<std::uint32_t> state_depth{0};
    std::set<std::pair<Marking, Marking>> seen;
    seen.emplace(states[0].a, states[0].b);

    auto witness_of = [&](std::uint32_t state, const TransitionLabel& last) {
        std::vector<TransitionLabel> path{last};
        while (state != 0) {
            path.push_back(states[state].via);
            state = states[state].parent;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };

    for (std::uint32_t i = 0; i < states.size(); ++i) {
        // A state at depth d stands for a common prefix of d firings; its
        // label checks compare sequences of length d + 1, so depth-k states
        // need no processing at all.
        if (state_depth[i] >= depth)
            continue;
        for (const TransitionLabel& label : labels) {
            bool in_a_now = enables(a, in_a, states[i].a, label);
            bool in_b_now = enables(b, in_b, states[i].b, label);
            if (in_a_now != in_b_now)
                return {false, witness_of(i, label)};
            if (!in_a_now)
                continue;
            ProductState next{a.fire(states[i].a, in_a.at(label)),
                              b.fire(states[i].b, in_b.at(label)), i, label};
            // Breadth-first order makes the first visit the shallowest, so
            // a revisit never has more remaining depth to explore.
            if (!seen.emplace(next.a, next.b).second)
                continue;
            state_depth.push_back(state_depth[i] + 1);
            states.push_back(std::move(next));
        }
    }
    return {true, {}};
}

} // namespace dramnet
