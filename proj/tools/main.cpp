#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aggen/errors.hpp"
#include "aggen/expand.hpp"
#include "aggen/export.hpp"
#include "aggen/merge.hpp"
#include "aggen/netmodel.hpp"
#include "aggen/parallel.hpp"
#include "aggen/profile.hpp"
#include "aggen/scenario.hpp"
#include "aggen/transport.hpp"
#include "aggen/wire.hpp"

namespace {

constexpr const char* kEngineVersion = "aggen 0.1.0";

constexpr int kExitSpecError = 2;
constexpr int kExitWorkerError = 3;

struct GenerateArgs {
    std::string spec_path;
    std::string preset;
    int workers = 0; // 0 = sequential reference generator
    int threads = 1;
    std::uint64_t threshold = 0;
    std::string strategy = "sequential";
    std::string transport = "memory";
    std::string export_format;
    std::string out_path;
    std::string profile_path;
    bool predict_only = false;
    bool check_oracle = false;
    std::uint64_t seed = 0;
    bool seed_set = false;

    // Worker-process contract (socket mode): rank plus host:port per rank.
    int rank = -1;
    std::string endpoints;
};

aggen::NetworkSpec load_input(const GenerateArgs& args) {
    if (!args.spec_path.empty()) {
        return aggen::load_spec_file(args.spec_path);
    }
    aggen::Preset preset = aggen::parse_preset(args.preset, args.seed, args.seed_set);
    return aggen::build_preset(preset);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    out << content;
}

aggen::MergeOptions merge_options(const GenerateArgs& args) {
    aggen::MergeOptions merge;
    merge.strategy = aggen::parse_strategy(args.strategy);
    if (merge.strategy == aggen::MergeStrategy::None && !args.out_path.empty()) {
        std::filesystem::create_directories(args.out_path);
        merge.dump_dir = args.out_path;
    }
    return merge;
}

void write_manifest(const GenerateArgs& args, const aggen::PhaseProfile& profile,
                    std::uint64_t effective_threshold) {
    if (args.out_path.empty()) {
        return;
    }
    nlohmann::json doc;
    doc["engine"] = kEngineVersion;
    if (!args.spec_path.empty()) {
        doc["spec"] = {{"kind", "file"}, {"value", args.spec_path}};
    } else {
        doc["spec"] = {{"kind", "preset"}, {"value", args.preset}};
    }
    if (args.seed_set) {
        doc["seed"] = args.seed;
    }
    doc["workers"] = args.workers;
    doc["threads"] = args.threads;
    doc["threshold"] = effective_threshold;
    doc["strategy"] = args.strategy;
    doc["transport"] = args.transport;
    doc["export"] = {{"format", args.export_format}, {"out", args.out_path}};
    if (!args.profile_path.empty()) {
        doc["profile"] = args.profile_path;
    }
    doc["states"] = profile.states;
    doc["edges"] = profile.edges;
    write_file(args.out_path + ".manifest.json", doc.dump(2) + "\n");
}

void emit_outputs(const GenerateArgs& args, const aggen::AttackGraph& graph,
                  const aggen::NetworkSpec& spec) {
    if (args.export_format.empty()) {
        return;
    }
    std::string content;
    std::string default_name;
    if (args.export_format == "dot") {
        content = aggen::export_dot(graph, spec);
        default_name = "attack-graph.dot";
    } else if (args.export_format == "edges") {
        content = aggen::export_edges(graph);
        default_name = "attack-graph.edges";
    } else {
        content = aggen::export_summary(graph) + "\n";
        default_name.clear(); // summary already went to stdout
    }

    std::string path = args.out_path;
    if (path.empty()) {
        path = default_name;
    }
    if (!path.empty()) {
        write_file(path, content);
        std::cerr << "wrote " << path << "\n";
    }
}

int run_worker_process(const GenerateArgs& args) {
    aggen::NetworkSpec spec = load_input(args);

    aggen::EndpointTable table = aggen::EndpointTable::from_flag(args.endpoints);
    const int comm_sz = static_cast<int>(table.entries.size());
    if (args.rank < 0 || args.rank >= comm_sz) {
        throw aggen::TransportError("worker rank out of range of endpoint table");
    }

    aggen::SocketTransport transport(args.rank, comm_sz, table.entries[args.rank].port);
    transport.set_peers(table);

    aggen::WorkerConfig cfg;
    cfg.comm_sz = comm_sz;
    cfg.n_threads = args.threads;
    cfg.threshold_T = args.threshold;
    cfg.rank = args.rank;
    cfg.transport = aggen::TransportKind::Socket;
    cfg.merge = merge_options(args);

    aggen::worker_main(spec, cfg, transport);
    return 0;
}

std::vector<pid_t> spawn_workers(const GenerateArgs& args, const aggen::EndpointTable& table) {
    std::vector<std::string> base = {
        "/proc/self/exe", "generate",
        "--workers", std::to_string(args.workers),
        "--threads", std::to_string(args.threads),
        "--threshold", std::to_string(args.threshold),
        "--strategy", args.strategy,
        "--transport", "socket",
        "--endpoints", table.to_flag(),
    };
    if (!args.spec_path.empty()) {
        base.insert(base.end(), {"--spec", args.spec_path});
    } else {
        base.insert(base.end(), {"--preset", args.preset});
    }
    if (args.seed_set) {
        base.insert(base.end(), {"--seed", std::to_string(args.seed)});
    }
    if (!args.out_path.empty()) {
        base.insert(base.end(), {"--out", args.out_path});
    }

    std::vector<pid_t> children;
    for (int r = 1; r < args.workers; ++r) {
        std::vector<std::string> argv_s = base;
        argv_s.insert(argv_s.end(), {"--rank", std::to_string(r)});

        std::vector<char*> argv;
        argv.reserve(argv_s.size() + 1);
        for (auto& s : argv_s) {
            argv.push_back(s.data());
        }
        argv.push_back(nullptr);

        pid_t pid = ::fork();
        if (pid < 0) {
            throw aggen::WorkerError(r, "launch", "fork failed");
        }
        if (pid == 0) {
            ::execv("/proc/self/exe", argv.data());
            std::perror("execv");
            std::_Exit(127);
        }
        children.push_back(pid);
    }
    return children;
}

void reap_workers(std::vector<pid_t>& children, bool kill_first) {
    bool failed = false;
    int failed_rank = -1;
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (kill_first) {
            ::kill(children[i], SIGTERM);
        }
        int status = 0;
        ::waitpid(children[i], &status, 0);
        if (!kill_first && (!WIFEXITED(status) || WEXITSTATUS(status) != 0)) {
            failed = true;
            failed_rank = static_cast<int>(i) + 1;
        }
    }
    children.clear();
    if (failed) {
        throw aggen::WorkerError(failed_rank, "run", "worker process exited abnormally");
    }
}

// Socket transport pairs with the process-per-worker deployment: rank 0 is
// this process, ranks 1..N-1 are spawned children.
aggen::RunOutcome run_multiprocess(const GenerateArgs& args, const aggen::NetworkSpec& spec) {
    aggen::EndpointTable table;
    table.entries.push_back({"127.0.0.1", 0}); // rank 0 below
    for (int r = 1; r < args.workers; ++r) {
        table.entries.push_back({"127.0.0.1", aggen::probe_free_port()});
    }

    aggen::SocketTransport master(0, args.workers, 0);
    table.entries[0].port = master.port();
    master.set_peers(table);

    GenerateArgs child_args = args;
    std::vector<pid_t> children = spawn_workers(child_args, table);

    aggen::WorkerConfig cfg;
    cfg.comm_sz = args.workers;
    cfg.n_threads = args.threads;
    cfg.threshold_T = args.threshold;
    cfg.rank = 0;
    cfg.transport = aggen::TransportKind::Socket;
    cfg.merge = merge_options(args);

    aggen::RunOutcome outcome;
    try {
        aggen::WorkerOutcome worker = aggen::worker_main(spec, cfg, master);
        outcome.graph = std::move(worker.graph);
        outcome.profile = worker.profile;
    } catch (...) {
        reap_workers(children, /*kill_first=*/true);
        throw;
    }
    reap_workers(children, /*kill_first=*/false);
    return outcome;
}

int cmd_generate(GenerateArgs& args) {
    if (args.rank > 0) {
        return run_worker_process(args);
    }

    aggen::NetworkSpec spec = load_input(args);

    if (args.predict_only) {
        if (args.spec_path.empty()) {
            aggen::Preset preset = aggen::parse_preset(args.preset, args.seed, args.seed_set);
            if (preset.is_tree) {
                aggen::CountPrediction prediction = aggen::predict_counts(preset.tree);
                std::cout << "predicted states: " << aggen::format_with_commas(prediction.states)
                          << "\n";
                std::cout << "predicted edges: " << aggen::format_with_commas(prediction.edges)
                          << "\n";
                return 0;
            }
        }
        std::cerr << "error: unsupported scenario: prediction requires a tree preset "
                     "(paper-150 or tree:...)\n";
        return kExitSpecError;
    }

    aggen::ValidationReport report = aggen::validate_spec(spec);
    if (!report.ok()) {
        std::cerr << "spec validation failed:\n" << report.to_string();
        return kExitSpecError;
    }
    if (spec.exploits.empty()) {
        std::cerr << "warning: no exploits; the attack graph is the root state only\n";
    }

    aggen::RunOutcome outcome;
    const bool sequential = args.workers == 0;
    std::uint64_t threshold_used = args.threshold;
    if (sequential) {
        auto t0 = std::chrono::steady_clock::now();
        aggen::AttackGraph graph = aggen::generate_sequential(spec);
        auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        outcome.graph = std::move(graph);
        outcome.profile.phase1_total = elapsed.count();
        outcome.profile.total_time = elapsed.count();
        outcome.profile.states = outcome.graph->state_count();
        outcome.profile.edges = outcome.graph->edge_count();
    } else if (aggen::parse_transport(args.transport) == aggen::TransportKind::Socket) {
        outcome = run_multiprocess(args, spec);
        aggen::WorkerConfig cfg;
        cfg.comm_sz = args.workers;
        cfg.n_threads = args.threads;
        cfg.threshold_T = args.threshold;
        threshold_used = aggen::effective_threshold(cfg);
    } else {
        aggen::RunOptions options;
        options.comm_sz = args.workers;
        options.n_threads = args.threads;
        options.threshold = args.threshold;
        options.transport = aggen::TransportKind::Memory;
        options.merge = merge_options(args);
        outcome = aggen::run_parallel(spec, options);
        aggen::WorkerConfig cfg;
        cfg.comm_sz = args.workers;
        cfg.n_threads = args.threads;
        cfg.threshold_T = args.threshold;
        threshold_used = aggen::effective_threshold(cfg);
    }

    if (outcome.graph) {
        std::cout << aggen::export_summary(*outcome.graph) << "\n";
    } else {
        std::cerr << "partial graphs dumped per rank (strategy none); no merged graph\n";
    }
    std::cout << aggen::emit_profile_report(outcome.profile);

    if (!args.profile_path.empty()) {
        write_file(args.profile_path, aggen::emit_profile_report(outcome.profile));
    }

    if (args.check_oracle) {
        if (!outcome.graph) {
            std::cerr << "error: --check-oracle requires a merged graph (strategy != none)\n";
            return 1;
        }
        aggen::AttackGraph oracle = aggen::generate_sequential(spec);
        if (!aggen::canonical_equal(oracle, *outcome.graph)) {
            std::cerr << "oracle check FAILED: parallel output differs from sequential oracle\n";
            return 1;
        }
        std::cout << "oracle check: ok\n";
    }

    if (outcome.graph) {
        emit_outputs(args, *outcome.graph, spec);
    } else if (!args.export_format.empty()) {
        std::cerr << "error: --export requires a merged graph (strategy != none)\n";
        return 1;
    }
    write_manifest(args, outcome.profile, threshold_used);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attack-graph generation with single-machine cluster simulation"};
    app.require_subcommand(1);

    GenerateArgs args;
    CLI::App* generate = app.add_subcommand(
        "generate", "Generate an attack graph sequentially or with parallel workers");

    auto* spec_opt = generate->add_option("--spec", args.spec_path,
                                          "Network spec JSON file");
    auto* preset_opt = generate->add_option(
        "--preset", args.preset, "Built-in scenario: fig1 | paper-150 | tree:<S>x<W>:<vuln>[:<seed>]");
    spec_opt->excludes(preset_opt);

    generate->add_option("--workers", args.workers,
                         "Worker count (comm_sz); 0 runs the sequential reference generator")
        ->check(CLI::Range(0, 1024));
    generate->add_option("--threads", args.threads, "Threads per worker (n_threads)")
        ->check(CLI::Range(1, 1024));
    generate->add_option("--threshold", args.threshold,
                         "Phase-1 frontier threshold T (default 64*workers*threads)");
    generate->add_option("--strategy", args.strategy,
                         "Merge strategy: sequential|multi|pipeline|hier|none")
        ->check(CLI::IsMember({"sequential", "multi", "pipeline", "hier", "none"}));
    generate->add_option("--transport", args.transport,
                         "Worker transport: memory (threads) | socket (one process per worker)")
        ->check(CLI::IsMember({"memory", "socket"}));
    generate->add_option("--export", args.export_format, "Graph export format: dot|edges|summary")
        ->check(CLI::IsMember({"dot", "edges", "summary"}));
    generate->add_option("--out", args.out_path, "Export path (directory for strategy none)");
    generate->add_option("--profile", args.profile_path, "Write the phase-time report here");
    generate->add_flag("--predict-only", args.predict_only,
                       "Print predicted state/edge counts without generating");
    generate->add_flag("--check-oracle", args.check_oracle,
                       "Also run the sequential generator and compare");
    auto* seed_opt =
        generate->add_option("--seed", args.seed, "Seed for fractional vulnerability assignment");

    generate->add_option("--rank", args.rank, "Worker process rank (socket launch contract)")
        ->envname("AGGEN_RANK")
        ->group("");
    generate->add_option("--endpoints", args.endpoints, "host:port per rank, comma separated")
        ->envname("AGGEN_ENDPOINTS")
        ->group("");

    CLI11_PARSE(app, argc, argv);
    args.seed_set = seed_opt->count() > 0;

    if (args.spec_path.empty() && args.preset.empty()) {
        std::cerr << "error: provide --spec <file> or --preset <name>\n";
        return kExitSpecError;
    }

    try {
        return cmd_generate(args);
    } catch (const aggen::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSpecError;
    } catch (const aggen::WorkerError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitWorkerError;
    } catch (const aggen::TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitWorkerError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
