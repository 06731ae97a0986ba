// mindpres: command-line front end for the corpus -> train -> serve ->
// simulate pipeline.

#include <csignal>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <unistd.h>

#include "mindpres/classifiers.hpp"
#include "mindpres/corpus.hpp"
#include "mindpres/error.hpp"
#include "mindpres/evaluator.hpp"
#include "mindpres/prevention.hpp"
#include "mindpres/service.hpp"
#include "mindpres/simulator.hpp"
#include "mindpres/training.hpp"

using namespace mindpres;

namespace {

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
    if (!out.flush()) throw Error("write to " + path + " failed");
}

std::vector<ml::ModelKind> parse_kinds(const std::string& spec)
{
    if (spec == "all") return {ml::kAllKinds.begin(), ml::kAllKinds.end()};
    std::vector<ml::ModelKind> kinds;
    std::size_t start = 0;
    while (start <= spec.size()) {
        const auto comma = spec.find(',', start);
        const auto name = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        kinds.push_back(ml::kind_from_string(name));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return kinds;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mobile intrusion detection and prevention pipeline"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--out", out_path, "Output file (stdout when omitted)");
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for every random choice");
        sub->add_option("--out", out_path, "Output file (stdout when omitted)");
    };
    (void)seed_opt;

    // corpus generate
    auto* corpus_cmd = app.add_subcommand("corpus", "Synthetic labeled manifest corpus");
    corpus_cmd->require_subcommand(1);
    auto* gen_cmd = corpus_cmd->add_subcommand("generate", "Generate a corpus as JSONL");
    add_common(gen_cmd);
    std::size_t n_benign = 100, n_malicious = 100;
    double separation = 4.0;
    gen_cmd->add_option("--benign", n_benign, "Benign app count")->capture_default_str();
    gen_cmd->add_option("--malicious", n_malicious, "Malicious app count")->capture_default_str();
    gen_cmd->add_option("--separation", separation, "Dangerous-token inflation for malicious apps")
        ->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train classifiers and store the best model");
    add_common(train_cmd);
    std::string corpus_path, report_path, classifier = "all";
    double split = 0.8;
    std::size_t top_k = 64;
    train_cmd->add_option("--corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--split", split, "Training fraction")->capture_default_str();
    train_cmd->add_option("--classifier", classifier, "all or comma-separated kinds")->capture_default_str();
    train_cmd->add_option("--features", top_k, "Number of selected features")->capture_default_str();
    train_cmd->add_option("--report", report_path, "Evaluation report JSON");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a stored model on a corpus");
    add_common(eval_cmd);
    std::string model_path;
    double threshold = 0.5;
    bool whole_corpus = false;
    eval_cmd->add_option("--model", model_path, "Model bundle JSON")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--corpus", corpus_path, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--split", split, "Training fraction; the held-out part is evaluated")->capture_default_str();
    eval_cmd->add_flag("--all", whole_corpus, "Evaluate on every corpus entry");
    eval_cmd->add_option("--threshold", threshold, "Malicious score threshold")->capture_default_str();

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "Serve risk assessments over newline-delimited JSON");
    std::string listen = "127.0.0.1:7070";
    serve_cmd->add_option("--model", model_path, "Model bundle JSON")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--listen", listen, "host:port (port 0 picks a free port)")->capture_default_str();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Run a device scenario end to end");
    add_common(sim_cmd);
    std::string scenario_path, mode_name = "auto", audit_path, policy_path, remote;
    double prompt_timeout = 30.0;
    sim_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--model", model_path, "Model bundle JSON for offline assessment")->check(CLI::ExistingFile);
    sim_cmd->add_option("--evaluator", remote, "host:port of a running evaluator service");
    sim_cmd->add_option("--mode", mode_name, "auto or interactive")
        ->check(CLI::IsMember({"auto", "interactive"}))
        ->capture_default_str();
    sim_cmd->add_option("--audit", audit_path, "Append the audit trail to this JSONL file");
    sim_cmd->add_option("--policy", policy_path, "JSON list of override decisions")->check(CLI::ExistingFile);
    sim_cmd->add_option("--prompt-timeout", prompt_timeout, "Seconds before an unanswered prompt enforces")
        ->capture_default_str();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Detection throughput benchmark");
    add_common(bench_cmd);
    std::size_t bench_apps = 50;
    Tick bench_ticks = 2000;
    bench_cmd->add_option("--model", model_path, "Model bundle JSON")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--apps", bench_apps, "Simulated apps")->capture_default_str();
    bench_cmd->add_option("--ticks", bench_ticks, "Simulated ticks")->capture_default_str();

    // scenario
    auto* scen_cmd = app.add_subcommand("scenario", "Write a ready-made scenario");
    add_common(scen_cmd);
    std::string attack_name = "exfiltration";
    scen_cmd->add_option("--attack", attack_name, "exfiltration, beacon, root_abuse or none")
        ->check(CLI::IsMember({"exfiltration", "beacon", "root_abuse", "none"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen_cmd->parsed()) {
            auto profile = corpus::GenerationProfile::standard();
            profile.separation = separation;
            write_output(out_path, corpus::to_jsonl(corpus::generate(seed, n_benign, n_malicious, profile)));
        } else if (train_cmd->parsed()) {
            evaluator::TrainingOptions options;
            options.train_fraction = split;
            options.seed = seed;
            options.top_k = top_k;
            options.kinds = parse_kinds(classifier);
            const auto outcome = evaluator::train_and_select(corpus::load(corpus_path), options);
            if (out_path.empty()) throw ConfigError("train needs --out for the model bundle");
            evaluator::save_model(outcome.bundle, out_path);
            const auto report = evaluator::training_report_json(outcome).dump(2) + "\n";
            if (!report_path.empty()) write_output(report_path, report);
            else std::cout << report;
        } else if (eval_cmd->parsed()) {
            const auto bundle = evaluator::load_model(model_path);
            const auto corpus = corpus::load(corpus_path);
            std::vector<std::string> ids;
            if (whole_corpus) {
                for (const auto& e : corpus.entries) ids.push_back(e.manifest.app_id);
            } else {
                ids = corpus::split(corpus, split, seed).test_ids;
            }
            const auto data = ml::make_dataset(corpus::select(corpus, ids), bundle.model.vocab);
            const auto report = ml::evaluate(bundle.model, data, threshold);
            write_output(out_path, evaluator::report_to_json(report).dump(2) + "\n");
        } else if (serve_cmd->parsed()) {
            sigset_t signals;
            sigemptyset(&signals);
            sigaddset(&signals, SIGINT);
            sigaddset(&signals, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &signals, nullptr);

            evaluator::ModelStore store(std::make_shared<const evaluator::ModelBundle>(evaluator::load_model(model_path)));
            const auto [host, port] = evaluator::parse_endpoint(listen);
            evaluator::AssessmentServer server(store, host, port);
            server.start();
            std::cout << "listening on " << host << ":" << server.port() << std::endl;
            int sig = 0;
            sigwait(&signals, &sig);
            server.stop();
        } else if (sim_cmd->parsed()) {
            auto scenario = sim::Scenario::load(scenario_path);
            if (seed_opt->count() + sim_cmd->get_option("--seed")->count() > 0) scenario.seed = seed;

            std::unique_ptr<evaluator::Evaluator> evaluator;
            if (!remote.empty()) {
                const auto [host, port] = evaluator::parse_endpoint(remote);
                evaluator = std::make_unique<evaluator::RemoteEvaluator>(host, port);
            } else if (!model_path.empty()) {
                evaluator = std::make_unique<evaluator::LocalEvaluator>(
                    std::make_shared<const evaluator::ModelBundle>(evaluator::load_model(model_path)));
            } else {
                throw ConfigError("simulate needs --model or --evaluator");
            }

            sim::SimOptions options;
            options.mode = prevention::policy_mode_from_string(mode_name);
            if (!policy_path.empty()) options.policy_overrides = prevention::load_policy_file(policy_path);
            prevention::ConsolePrompter prompter(
                STDIN_FILENO, std::cerr,
                std::chrono::milliseconds(static_cast<long long>(prompt_timeout * 1000.0)));
            if (options.mode == prevention::PolicyMode::interactive) options.prompter = &prompter;
            std::optional<prevention::AuditLog> audit;
            if (!audit_path.empty()) {
                audit.emplace(prevention::AuditLog::open(audit_path));
                options.audit = &*audit;
            }
            const auto report = sim::run_scenario(scenario, *evaluator, options);
            write_output(out_path, report.to_json().dump(2) + "\n");
        } else if (bench_cmd->parsed()) {
            const auto bundle = std::make_shared<const evaluator::ModelBundle>(evaluator::load_model(model_path));
            auto scenario = sim::standard_scenario(sim::AttackKind::exfiltration, seed);
            scenario.duration = bench_ticks;
            scenario.device_schedule = {{0, bench_ticks, DeviceState::active}};
            const auto templ = scenario.apps.back();
            scenario.apps.clear();
            for (std::size_t i = 0; i < bench_apps; ++i) {
                auto app = templ;
                app.manifest.app_id = "bench-" + std::to_string(i);
                app.attack.reset();
                scenario.apps.push_back(std::move(app));
            }
            evaluator::LocalEvaluator local(bundle);
            const auto start = std::chrono::steady_clock::now();
            const auto report = sim::run_scenario(scenario, local);
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            Json j;
            j["apps"] = bench_apps;
            j["ticks"] = bench_ticks;
            j["events"] = report.flows.events_delivered;
            j["verdicts"] = report.verdicts.size();
            j["seconds"] = seconds;
            j["events_per_second"] = seconds > 0 ? static_cast<double>(report.flows.events_delivered) / seconds : 0.0;
            write_output(out_path, j.dump(2) + "\n");
        } else if (scen_cmd->parsed()) {
            std::optional<sim::AttackKind> kind;
            if (attack_name != "none") kind = sim::attack_kind_from_string(attack_name);
            write_output(out_path, sim::standard_scenario(kind, seed).to_json().dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
