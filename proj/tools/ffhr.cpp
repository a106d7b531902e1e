// Command-line driver: train / eval / gradcheck / synth subcommands over the
// core library. All heavy lifting lives in the library; this file only parses
// flags, wires files together, and maps errors to exit codes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffhr/config.hpp"
#include "ffhr/eval.hpp"
#include "ffhr/gradcheck.hpp"
#include "ffhr/train.hpp"

namespace fs = std::filesystem;
using namespace ffhr;

namespace {

RunConfig resolve_config(const std::string& config_path, const std::vector<std::string>& sets) {
    RunConfig cfg;
    std::vector<std::string> seen;
    if (!config_path.empty()) cfg = parse_config_file(config_path, &seen);
    apply_overrides(cfg, sets);
    for (const auto& ov : sets) seen.push_back(ov.substr(0, ov.find('=')));

    bool threads_explicit = false;
    for (std::string key : seen) {
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        if (key == "threads") threads_explicit = true;
    }
    if (!threads_explicit) {
        if (const char* env = std::getenv("FFHR_THREADS")) set_config_key(cfg, "threads", env);
    }
    return cfg;
}

TripleStore load_augmented(const std::string& data_dir) {
    if (data_dir.empty()) throw std::runtime_error("no data_dir configured");
    if (!fs::exists(data_dir))
        throw std::runtime_error("dataset directory not found: " + data_dir);
    return augment_reciprocal(load_dataset(data_dir));
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets) {
    RunConfig cfg = resolve_config(config_path, sets);
    cfg.validate();
    for (const std::string& field : cfg.train_config().off_grid_fields())
        std::cerr << "note: " << field << " is outside the reference search grid\n";

    const TripleStore store = load_augmented(cfg.data_dir);
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    std::ofstream resolved(out / "config.resolved.cfg");
    resolved << to_config_text(cfg);
    resolved.close();

    ModelParams params =
        ModelParams::init(cfg.model_config(), store.num_entities(), store.num_relations(), cfg.seed);
    std::ofstream metrics(out / "metrics.jsonl");
    const TrainResult result = train(std::move(params), store, cfg.train_config(), &metrics);
    metrics.close();
    save_checkpoint(result.best, store, out / "checkpoint.bin");

    std::cout << "trained " << result.epochs_run << " epochs; final loss "
              << result.loss_history.back();
    if (result.best_valid_mrr >= 0.0)
        std::cout << "; best valid MRR " << result.best_valid_mrr << " at epoch "
                  << result.best_epoch;
    std::cout << "\ncheckpoint: " << (out / "checkpoint.bin").string() << '\n';
    if (result.skipped_updates > 0)
        std::cerr << "warning: " << result.skipped_updates
                  << " parameter updates skipped due to non-finite gradients\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_dir, const std::string& split,
             bool per_relation, bool categories, const std::string& out_path) {
    const TripleStore store = load_augmented(data_dir);
    const ModelParams params = load_checkpoint_for(checkpoint, store);
    const Split sp = split_from_string(split);
    if (store.split(sp).empty()) throw std::runtime_error("split '" + split + "' is empty");

    const Adjacency adj = build_adjacency(store);
    const Scorer scorer(params, adj);
    const FilterIndex filter(store);
    const RankingReport report = evaluate_split(scorer, store, sp, filter);

    RelationBreakdown breakdown;
    const bool want_breakdown = per_relation || categories;
    if (want_breakdown) breakdown = relation_breakdown(scorer, store, sp, filter);

    print_report(std::cout, report, want_breakdown ? &breakdown : nullptr);
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot write report: " + out_path);
        os << report_to_json(report, want_breakdown ? &breakdown : nullptr) << '\n';
    }
    return 0;
}

int cmd_gradcheck(const std::string& config_path, const std::vector<std::string>& sets,
                  bool corrupt) {
    RunConfig cfg = resolve_config(config_path, sets);

    TripleStore store;
    if (cfg.data_dir.empty()) {
        // Built-in toy problem: a small tree with the configured architecture
        // at a dimension finite differencing can afford.
        cfg.dim = std::min<std::size_t>(cfg.dim, 8);
        store = augment_reciprocal(generate_synthetic_tree(4, 2, cfg.seed));
    } else {
        store = load_augmented(cfg.data_dir);
    }
    cfg.validate();

    ModelParams params =
        ModelParams::init(cfg.model_config(), store.num_entities(), store.num_relations(), cfg.seed);
    const Adjacency adj = build_adjacency(store);
    const std::size_t n = std::min<std::size_t>(cfg.batch_size, store.train.size());
    const std::vector<Triple> batch(store.train.begin(),
                                    store.train.begin() + static_cast<std::ptrdiff_t>(n));

    GradCheckOptions opts;
    if (corrupt) opts.corruption = 1.0;
    const GradReport report = gradcheck(params, adj, batch, cfg.reg_coeff, opts);
    print_gradcheck(std::cout, report);
    return report.pass() ? 0 : 1;
}

int cmd_synth(int depth, int branching, std::uint64_t seed, const std::string& out_dir) {
    const TripleStore store = generate_synthetic_tree(depth, branching, seed);
    fs::create_directories(out_dir);
    write_dataset(store, out_dir);
    std::cout << "wrote " << store.train.size() << " train / " << store.valid.size()
              << " valid / " << store.test.size() << " test triples to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic knowledge-graph completion toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;

    auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint + metrics");
    train_cmd->add_option("--config", config_path, "Flat key = value config file");
    train_cmd->add_option("--set", sets, "Override config keys (key=value)");

    std::string checkpoint, data_dir, split = "test", out_path;
    bool per_relation = false, categories = false;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint with filtered ranking");
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--data", data_dir, "Dataset directory")->required();
    eval_cmd->add_option("--split", split, "train | valid | test");
    eval_cmd->add_flag("--per-relation", per_relation, "Per-relation hits@10 and hierarchy score");
    eval_cmd->add_flag("--categories", categories, "1-1/1-N/N-1/N-N category breakdown");
    eval_cmd->add_option("--out", out_path, "Write the JSON report here");

    bool corrupt = false;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Compare tape gradients to finite differences");
    gc_cmd->add_option("--config", config_path, "Flat key = value config file");
    gc_cmd->add_option("--set", sets, "Override config keys (key=value)");
    gc_cmd->add_flag("--corrupt-gradient", corrupt, "Self-test: inject a wrong gradient")
        ->group("");  // hidden

    int depth = 3, branching = 2;
    std::uint64_t seed = 1;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic tree dataset");
    synth_cmd->add_option("--depth", depth, "Tree levels (>= 2)");
    synth_cmd->add_option("--branching", branching, "Children per node (>= 2)");
    synth_cmd->add_option("--seed", seed, "Split seed");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, sets);
        if (eval_cmd->parsed())
            return cmd_eval(checkpoint, data_dir, split, per_relation, categories, out_path);
        if (gc_cmd->parsed()) return cmd_gradcheck(config_path, sets, corrupt);
        if (synth_cmd->parsed()) return cmd_synth(depth, branching, seed, synth_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
