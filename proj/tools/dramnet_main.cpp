// Command-line front end: build and inspect protocol nets, unroll state
// graphs, enumerate or count command traces, verify timed traces, run the
// timing probe suite, compare two configs, and emit DOT/table/assertion
// text. Exit codes: 0 clean, 1 violations or divergence, 2 usage or config
// errors.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dramnet/dramnet.hpp"

namespace {

using namespace dramnet;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw UsageError("cannot write '" + path + "'");
    out << content;
}

int cmd_build(const std::string& config_path, const std::string& dot_path) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::build(config);
    const PetriNet& net = model.net();
    std::cout << "hierarchy: " << config.name << " (" << config.ranks << " rank(s) x "
              << config.banks_per_rank << " bank(s))\n"
              << "places: " << net.place_count() << ", transitions: " << net.transition_count()
              << ", arcs: " << net.arc_count() - model.timing_arc_count()
              << ", timing arcs: " << model.timing_arc_count()
              << ", window rules: " << model.window_rules().size() << "\n";
    if (!dot_path.empty())
        write_file(dot_path, export_dot(net));
    return 0;
}

int cmd_unroll(const std::string& config_path, const std::string& dot_path, std::uint64_t limit,
               unsigned threads) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::untimed(config);
    StateGraph graph = unroll(model.net(), UnrollOptions{limit, threads});
    std::cout << "states: " << graph.state_count() << ", k_min: " << graph.k_min() << "\n";
    if (!dot_path.empty())
        write_file(dot_path, export_dot(model.net(), graph));
    return 0;
}

int cmd_traces(const std::string& config_path, unsigned k, bool count_only,
               const std::string& out_path, unsigned threads) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::untimed(config);
    if (count_only) {
        StateGraph graph = unroll(model.net());
        std::cout << count_traces(graph, k).str() << "\n";
        return 0;
    }
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file)
            throw UsageError("cannot write '" + out_path + "'");
        out = &file;
    }
    enumerate_traces(model.net(), TraceOptions{k, threads, 1ull << 24},
                     [&](std::span<const PetriNet::NodeId> trace) {
                         *out << render_trace(model.net(), trace) << "\n";
                     });
    return 0;
}

nlohmann::json violation_json(const Violation& v) {
    return {{"kind", std::string(to_string(v.kind))},
            {"index", v.index},
            {"time", v.command.time},
            {"command", std::string(to_string(v.command.command))},
            {"coordinate", v.command.coord.to_string()},
            {"message", v.message},
            {"allowed_at", v.allowed_at}};
}

int cmd_verify(const std::string& config_path, const std::string& trace_path, bool collect_all,
               bool json) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::build(config);

    std::ifstream in(trace_path);
    if (!in)
        throw UsageError("cannot open trace file '" + trace_path + "'");

    std::vector<TimedCommand> trace;
    try {
        trace = parse_trace(in);
    } catch (const TraceParseError& e) {
        if (json) {
            nlohmann::json report = {
                {"config", config.name},
                {"trace", trace_path},
                {"ok", false},
                {"commands", 0},
                {"violations",
                 {{{"kind", std::string(to_string(ViolationKind::ParseError))},
                   {"line", e.line},
                   {"message", e.what()}}}}};
            std::cout << report.dump(2) << "\n";
        } else {
            std::cout << "[" << to_string(ViolationKind::ParseError) << "] " << e.what() << "\n";
        }
        return 1;
    }

    ReplayReport report = replay(model, trace, ReplayOptions{collect_all});
    if (json) {
        nlohmann::json doc = {{"config", config.name},
                              {"trace", trace_path},
                              {"ok", report.ok()},
                              {"commands", report.commands_checked},
                              {"violations", nlohmann::json::array()}};
        for (const Violation& v : report.violations)
            doc["violations"].push_back(violation_json(v));
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << render_report(report);
    }
    return report.ok() ? 0 : 1;
}

int cmd_probe(const std::string& config_path) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::build(config);
    ProbeReport report = run_probe_suite(model);
    std::cout << "probes: " << report.probes << ", passed: " << report.passed << "\n";
    for (const std::string& failure : report.failures)
        std::cout << "failed: " << failure << "\n";
    return report.ok() ? 0 : 1;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, unsigned k) {
    DramNet a = DramNet::untimed(load_config(path_a));
    DramNet b = DramNet::untimed(load_config(path_b));
    EquivalenceReport report = equivalent(a.net(), b.net(), k);
    if (report.equivalent) {
        std::cout << "equivalent to depth " << k << "\n";
        return 0;
    }
    std::cout << "divergence: " << render_labels(report.witness) << "\n";
    return 1;
}

int cmd_emit(const std::string& config_path, const std::string& target) {
    ProtocolConfig config = load_config(config_path);
    DramNet model = DramNet::build(config);
    if (target == "dot-net") {
        std::cout << export_dot(model.net());
    } else if (target == "dot-stategraph") {
        std::cout << export_dot(model.net(), unroll(model.net()));
    } else if (target == "constraint-table") {
        std::cout << emit_constraint_table(model);
    } else if (target == "assertion-text") {
        std::cout << emit_assertions(model);
    } else {
        throw UsageError("unknown emission target '" + target + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Timed Petri net engine for DRAM command protocols"};
    app.require_subcommand(1);

    std::string config_path, config_path_b, trace_path, dot_path, out_path;
    std::string target;
    std::uint64_t limit = 1ull << 24;
    unsigned k = 1;
    unsigned threads = 1;
    bool count_only = false, collect_all = false, json = false;

    auto* build = app.add_subcommand("build", "Build a protocol net and print its shape");
    build->add_option("config", config_path, "protocol config file")->required();
    build->add_option("--dot", dot_path, "write the net as DOT to this file");

    auto* unroll_cmd = app.add_subcommand("unroll", "Explore the reachable state graph");
    unroll_cmd->add_option("config", config_path, "protocol config file")->required();
    unroll_cmd->add_option("--dot", dot_path, "write the state graph as DOT to this file");
    unroll_cmd->add_option("--limit", limit, "abort beyond this many states");
    unroll_cmd->add_option("--threads", threads, "worker threads (output is unaffected)");

    auto* traces = app.add_subcommand("traces", "Enumerate or count length-k command traces");
    traces->add_option("config", config_path, "protocol config file")->required();
    traces->add_option("-k", k, "trace length")->required()->check(CLI::PositiveNumber);
    traces->add_flag("--count-only", count_only, "print only the trace count");
    traces->add_option("--out", out_path, "write traces to this file instead of stdout");
    traces->add_option("--threads", threads, "worker threads (output is unaffected)");

    auto* verify = app.add_subcommand("verify", "Replay a timed command trace against the model");
    verify->add_option("config", config_path, "protocol config file")->required();
    verify->add_option("trace", trace_path, "trace file")->required();
    verify->add_flag("--collect-all", collect_all, "report every violation, not just the first");
    verify->add_flag("--json", json, "emit the report as JSON");

    auto* probe = app.add_subcommand("probe", "Probe every timing arc at and below its bound");
    probe->add_option("config", config_path, "protocol config file")->required();

    auto* compare = app.add_subcommand("compare", "Compare the behavior of two configs");
    compare->add_option("configA", config_path, "first protocol config")->required();
    compare->add_option("configB", config_path_b, "second protocol config")->required();
    compare->add_option("-k", k, "comparison depth")->required()->check(CLI::PositiveNumber);

    auto* emit = app.add_subcommand("emit", "Emit DOT, constraint table or assertion text");
    emit->add_option("config", config_path, "protocol config file")->required();
    emit->add_option("--target", target, "dot-net | dot-stategraph | constraint-table | assertion-text")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // 0 covers --help/--version
    }

    try {
        if (build->parsed())
            return cmd_build(config_path, dot_path);
        if (unroll_cmd->parsed())
            return cmd_unroll(config_path, dot_path, limit, threads);
        if (traces->parsed())
            return cmd_traces(config_path, k, count_only, out_path, threads);
        if (verify->parsed())
            return cmd_verify(config_path, trace_path, collect_all, json);
        if (probe->parsed())
            return cmd_probe(config_path);
        if (compare->parsed())
            return cmd_compare(config_path, config_path_b, k);
        if (emit->parsed())
            return cmd_emit(config_path, target);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
