// dcycle command-line driver.

#include <dcycle/dcycle.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::vector<std::string> inputs;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string method = "both";
    std::string out;
    std::string stage;
    bool print_config = false;
    bool with_clean = false;
};

dcycle::Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return dcycle::Json::parse(ss.str());
    } catch (const dcycle::Json::exception& e) {
        throw UsageError("bad JSON in " + path + ": " + e.what());
    }
}

void require_inputs(const Options& o) {
    if (o.inputs.empty()) throw UsageError("no input traces given");
    for (const auto& p : o.inputs)
        if (!fs::is_regular_file(p)) throw UsageError("input not found: " + p);
}

int run_pipeline_cmd(const Options& o, dcycle::Stage default_stage) {
    dcycle::PipelineConfig cfg;
    try {
        if (!o.config_path.empty()) cfg = dcycle::config_from_json(load_json(o.config_path));
    } catch (const dcycle::ConfigError& e) {
        throw UsageError(e.what());
    }
    if (o.seed) cfg.seed = *o.seed;
    try {
        cfg.validate();
    } catch (const dcycle::ConfigError& e) {
        throw UsageError(e.what());
    }

    if (o.print_config) {
        std::cout << dcycle::to_json(cfg).dump(2) << '\n';
        return kExitOk;
    }

    const auto methods = dcycle::MethodSelection::parse(o.method);
    if (!methods) throw UsageError("unknown method '" + o.method + "'");
    dcycle::Stage last = default_stage;
    if (!o.stage.empty()) {
        const auto s = dcycle::parse_stage(o.stage);
        if (!s) throw UsageError("unknown stage '" + o.stage + "'");
        last = *s;
    }
    if (o.out.empty()) throw UsageError("--out is required");
    require_inputs(o);

    std::vector<dcycle::SpeedTrace> traces;
    try {
        for (const auto& p : o.inputs) traces.push_back(dcycle::read_trace(p));
    } catch (const dcycle::ParseError& e) {
        throw dcycle::StageError(dcycle::Stage::Clean, e.what());
    } catch (const dcycle::ValidationError& e) {
        throw dcycle::StageError(dcycle::Stage::Clean, e.what());
    }

    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw UsageError("cannot create " + o.out + ": " + ec.message());
    const dcycle::ArtifactWriter writer(o.out);
    dcycle::run_pipeline(traces, cfg, *methods, last, &writer);
    return kExitOk;
}

int synth_gen_cmd(const Options& o) {
    dcycle::GenConfig cfg = dcycle::GenConfig::fixture();
    try {
        if (!o.config_path.empty()) cfg = dcycle::gen_config_from_json(load_json(o.config_path));
        if (o.seed) cfg.seed = *o.seed;
        cfg.validate();
    } catch (const dcycle::ConfigError& e) {
        throw UsageError(e.what());
    }
    if (o.print_config) {
        std::cout << dcycle::to_json(cfg).dump(2) << '\n';
        return kExitOk;
    }
    if (o.out.empty()) throw UsageError("--out is required");

    const auto clean = dcycle::generate_clean_corpus(cfg);
    const auto dirty = dcycle::inject_anomalies(clean, cfg);
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw UsageError("cannot create " + o.out + ": " + ec.message());
    const dcycle::ArtifactWriter writer(o.out);
    writer.write(cfg.source_id + ".csv", dcycle::format_trace(dirty.trace));
    writer.write_json("ground_truth.json", dcycle::to_json(dirty.truth));
    writer.write_json("gen_config.json", dcycle::to_json(cfg));
    if (o.with_clean) {
        auto t = clean.trace;
        t.source_id = cfg.source_id + "_clean";
        writer.write(t.source_id + ".csv", dcycle::format_trace(t));
        writer.write_json("ground_truth_clean.json", dcycle::to_json(clean.truth));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driving cycle construction from 1 Hz speed traces"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool takes_inputs) {
        if (takes_inputs) sub->add_option("inputs", o.inputs, "Input trace CSV files");
        sub->add_option("--config", o.config_path, "JSON config file");
        sub->add_option("--seed", o.seed, "Seed override");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_flag("--print-config", o.print_config, "Print the effective config and exit");
    };

    struct StageCmd {
        const char* name;
        dcycle::Stage stage;
        const char* help;
    };
    const StageCmd stage_cmds[] = {
        {"clean", dcycle::Stage::Clean, "Clean raw traces"},
        {"segment", dcycle::Stage::Segment, "Clean and cut into micro-trips"},
        {"features", dcycle::Stage::Features, "Run through the feature table"},
        {"pca", dcycle::Stage::Pca, "Run through PCA"},
        {"cluster", dcycle::Stage::Cluster, "Run through clustering"},
        {"build", dcycle::Stage::Build, "Run through cycle synthesis"},
        {"evaluate", dcycle::Stage::Evaluate, "Run through evaluation"},
        {"run", dcycle::Stage::Evaluate, "Run every stage"},
    };
    std::vector<std::pair<CLI::App*, dcycle::Stage>> pipeline_subs;
    for (const auto& c : stage_cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        common(sub, true);
        sub->add_option("--method", o.method, "mean-shift, kmeans or both")
            ->check(CLI::IsMember({"mean-shift", "kmeans", "both"}));
        sub->add_option("--stage", o.stage, "Last stage to run")
            ->check(CLI::IsMember({"clean", "segment", "features", "pca", "cluster", "build",
                                   "evaluate"}));
        pipeline_subs.emplace_back(sub, c.stage);
    }
    auto* gen = app.add_subcommand("synth-gen", "Generate a synthetic corpus with ground truth");
    common(gen, false);
    gen->add_flag("--with-clean", o.with_clean, "Also write the anomaly-free trace");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return synth_gen_cmd(o);
        for (const auto& [sub, stage] : pipeline_subs)
            if (sub->parsed()) return run_pipeline_cmd(o, stage);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const dcycle::StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPipeline;
    } catch (const dcycle::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPipeline;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
