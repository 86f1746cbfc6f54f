// Command-line front end: extract, detect, bench, synth.
#include "shelfscan/config.hpp"
#include "shelfscan/error.hpp"
#include "shelfscan/evalkit.hpp"
#include "shelfscan/features.hpp"
#include "shelfscan/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace shelfscan;

namespace {

enum ExitCode {
    kOk = 0,
    kIoError = 2,
    kConfigError = 3,
    kInvalidInput = 4,
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

RunConfig config_from(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text << '\n';
    } else {
        write_text(out, text);
    }
}

void cmd_extract(const std::string& image, const std::string& out, const std::string& config) {
    const RunConfig cfg = config_from(config);
    const RasterImage img = read_image(image);
    const FeatureSet fs = extract_features(img, cfg.extractor, fs::path(image).stem().string());
    if (out.empty() || out == "-") {
        std::cout << features_to_json(fs) << '\n';
    } else {
        write_features(fs, out);
    }
}

void cmd_detect(const std::string& scene_path, const std::vector<std::string>& patterns, const std::string& config,
                const std::string& out, const std::string& debug_dir, const std::string& dump_config) {
    RunConfig cfg = config_from(config);
    if (!debug_dir.empty()) cfg.pipeline.debug_dir = debug_dir;
    if (!dump_config.empty()) write_text(dump_config, run_config_to_json(cfg));
    SceneContext scene = make_scene_context(fs::path(scene_path).stem().string(), read_image(scene_path), cfg.extractor);
    std::vector<ProductPatterns> products;
    for (const std::string& p : patterns) {
        products.push_back(prepare_product(fs::path(p).stem().string(), read_image(p), cfg));
    }
    const DetectionReport report = run_multi_product(scene, products, cfg);
    emit(out, report_to_json(report));
}

void cmd_bench(const std::string& suite_path, const std::string& config, const std::string& out_dir, bool quiet) {
    const SuiteSpec spec = suite_from_json(read_text(suite_path));
    const RunConfig cfg = config_from(config);
    const BenchResult r = run_suite(spec, cfg, [quiet](const SceneRow& row) {
        if (quiet) return;
        std::cerr << row.scene_id << ": " << row.matched << "/" << row.placements << " found, "
                  << row.false_positives << " false\n";
    });
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "scenes.csv", rows_to_csv(r.rows));
    write_text(fs::path(out_dir) / "metrics.json", bench_to_json(r));
    std::cout << "detection_rate " << r.metrics.detection_rate << " (phase 1 only " << r.phase1_metrics.detection_rate
              << ")\nfalse_detection_chance " << r.metrics.false_detection_chance << "\navg_false_detections "
              << r.metrics.avg_false_detections << "\n";
}

void cmd_synth(const std::string& suite_path, const std::string& out_dir, int index) {
    const SuiteSpec spec = suite_from_json(read_text(suite_path));
    const auto library = suite_library(spec);
    const auto distractors = suite_distractors(spec);
    const fs::path dir(out_dir);
    fs::create_directories(dir / "patterns");
    for (const NamedImage& p : library) write_png(p.image, dir / "patterns" / (p.id + ".png"));
    const int first = index >= 0 ? index : 0;
    const int last = index >= 0 ? index + 1 : spec.scenes;
    if (index >= spec.scenes) throw InvalidArgument("scene index out of range");
    for (int i = first; i < last; ++i) {
        const SuiteScene sc = make_suite_scene(spec, i, library, distractors);
        write_png(sc.image, dir / (sc.spec.scene_id + ".png"));
        write_text(dir / (sc.spec.scene_id + ".truth.json"), truth_to_json(sc.truth));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retail shelf product detection"};
    app.require_subcommand(1);

    std::string image, out, config, scene, debug_dir, dump_config, suite;
    std::vector<std::string> patterns;
    int index = -1;
    bool quiet = false;

    auto* extract = app.add_subcommand("extract", "Extract features from an image");
    extract->add_option("--image", image, "Input image (PNG or JPEG)")->required();
    extract->add_option("--out", out, "Feature file (default: stdout)");
    extract->add_option("--config", config, "Run configuration JSON");

    auto* detect = app.add_subcommand("detect", "Detect patterns in a scene");
    detect->add_option("--scene", scene, "Scene image")->required();
    detect->add_option("--pattern", patterns, "Pattern image, repeatable")->required();
    detect->add_option("--config", config, "Run configuration JSON");
    detect->add_option("--out", out, "Report file (default: stdout)");
    detect->add_option("--debug-dir", debug_dir, "Write vote images here");
    detect->add_option("--dump-config", dump_config, "Write the effective configuration here");

    auto* bench = app.add_subcommand("bench", "Run a synthetic benchmark suite");
    bench->add_option("--suite", suite, "Suite description JSON")->required();
    bench->add_option("--config", config, "Run configuration JSON");
    bench->add_option("--out", out, "Output directory for scenes.csv and metrics.json")->required();
    bench->add_flag("--quiet", quiet, "No per-scene progress");

    auto* synth = app.add_subcommand("synth", "Write suite scenes, truth and patterns");
    synth->add_option("--suite", suite, "Suite description JSON")->required();
    synth->add_option("--out", out, "Output directory")->required();
    synth->add_option("--index", index, "Only this scene");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*extract) cmd_extract(image, out, config);
        if (*detect) cmd_detect(scene, patterns, config, out, debug_dir, dump_config);
        if (*bench) cmd_bench(suite, config, out, quiet);
        if (*synth) cmd_synth(suite, out, index);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const ParseError& e) {
        std::cerr << "corrupt input: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
    return kOk;
}
