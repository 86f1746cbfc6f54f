#include "shelfscan/evalkit.hpp"
#include "shelfscan/features.hpp"
#include "shelfscan/pipeline.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace shelfscan;
namespace fs = std::filesystem;

#ifndef SHELFSCAN_CLI
#error "SHELFSCAN_CLI must name the command-line binary"
#endif

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(SHELFSCAN_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

struct Workdir {
    fs::path dir;
    explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

constexpr const char* kTinySuite = R"({
  "name": "tiny", "seed": 5, "scenes": 2, "width": 480, "height": 360, "products": 2,
  "placements_min": 1, "placements_max": 1, "scale_min": 0.9, "scale_max": 1.1,
  "rotation_min": -5, "rotation_max": 5, "distractors": 1
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("extract") {
    Workdir w("shelfscan_cli_extract");
    write_png(generate_product_art(8), w / "art.png");
    CHECK(run("extract --image " + (w / "art.png") + " --out " + (w / "art.json")) == 0);
    const FeatureSet fs = read_features(w / "art.json");
    CHECK(fs.size() > 20);
    CHECK(fs.source_id == "art");

    spit(w / "bad.png", "this is not an image");
    CHECK(run("extract --image " + (w / "bad.png") + " --out " + (w / "bad.json")) == 2);
    CHECK(run("extract --image " + (w / "missing.png")) == 2);

    write_png(RasterImage(64, 48, 3, 128), w / "flat.png");
    CHECK(run("extract --image " + (w / "flat.png") + " --out " + (w / "flat.json")) == 0);
    CHECK(read_features(w / "flat.json").empty());
}

TEST_CASE("detect") {
    Workdir w("shelfscan_cli_detect");
    const RasterImage art = generate_product_art(19);
    write_png(art, w / "product.png");
    write_png(generate_product_art(20), w / "other.png");
    SceneSpec spec;
    spec.width = 560;
    spec.height = 420;
    spec.seed = 2;
    spec.placements = 1;
    spec.rotation_min = -10;
    spec.rotation_max = 10;
    spec.noise_sigma = 6;
    const std::vector<NamedImage> lib{{"product", art}};
    write_png(generate_scene(spec, lib).first, w / "scene.png");
    spec.placements = 0;
    write_png(generate_scene(spec, lib).first, w / "empty.png");

    const std::string base = "detect --scene " + (w / "scene.png") + " --pattern " + (w / "product.png");
    CHECK(run(base + " --out " + (w / "r.json") + " --debug-dir " + (w / "dbg") + " --dump-config " +
              (w / "eff.json")) == 0);
    const DetectionReport r = report_from_json(slurp(w / "r.json"));
    CHECK(r.occurrences.size() >= 1);
    std::size_t pngs = 0;
    for (const auto& e : fs::directory_iterator(w.dir / "dbg")) pngs += e.path().extension() == ".png";
    // two size-cascade entries in phase 1 plus the scene pattern of phase 2
    CHECK(pngs == 3);

    // dumped configuration reproduces the report
    CHECK(run(base + " --config " + (w / "eff.json") + " --out " + (w / "r2.json")) == 0);
    CHECK(slurp(w / "r2.json") == slurp(w / "r.json"));

    CHECK(run("detect --scene " + (w / "scene.png") + " --pattern " + (w / "other.png") + " --out " +
              (w / "none.json")) == 0);
    CHECK(report_from_json(slurp(w / "none.json")).occurrences.empty());
    CHECK(run("detect --scene " + (w / "empty.png") + " --pattern " + (w / "product.png") + " --out " +
              (w / "none2.json")) == 0);
    CHECK(report_from_json(slurp(w / "none2.json")).occurrences.empty());

    spit(w / "badcfg.json", R"({"cascade": {"no_such_key": 1}})");
    CHECK(run(base + " --config " + (w / "badcfg.json")) == 3);
    spit(w / "broken.json", "{");
    CHECK(run(base + " --config " + (w / "broken.json")) == 3);
    CHECK(run(base + " --config " + (w / "absent.json")) == 2);
    CHECK(run("detect --scene " + (w / "nope.png") + " --pattern " + (w / "product.png")) == 2);
    CHECK(run("detect --scene " + (w / "scene.png")) != 0);
}

TEST_CASE("bench and synth") {
    Workdir w("shelfscan_cli_bench");
    spit(w / "suite.json", kTinySuite);
    spit(w / "exact.json", R"({"matching": {"index": {"checks": 0}}})");
    CHECK(run("bench --quiet --suite " + (w / "suite.json") + " --config " + (w / "exact.json") + " --out " +
              (w / "a")) == 0);
    CHECK(run("bench --quiet --suite " + (w / "suite.json") + " --config " + (w / "exact.json") + " --out " +
              (w / "b")) == 0);
    const std::string csv = slurp(w.dir / "a" / "scenes.csv");
    CHECK(csv == slurp(w.dir / "b" / "scenes.csv"));
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.rfind("scene_id,", 0) == 0);
    CHECK(fs::exists(w.dir / "a" / "metrics.json"));

    spit(w / "empty.json", R"({"scenes": 0})");
    CHECK(run("bench --quiet --suite " + (w / "empty.json") + " --out " + (w / "c")) == 3);
    CHECK_FALSE(fs::exists(w.dir / "c"));

    CHECK(run("synth --suite " + (w / "suite.json") + " --out " + (w / "s")) == 0);
    std::size_t scenes = 0, truths = 0;
    for (const auto& e : fs::directory_iterator(w.dir / "s")) {
        const std::string n = e.path().filename().string();
        truths += n.size() > 11 && n.substr(n.size() - 11) == ".truth.json";
        scenes += e.path().extension() == ".png";
    }
    CHECK(scenes == 2);
    CHECK(truths == 2);
    CHECK(fs::exists(w.dir / "s" / "patterns" / "product_00.png"));
}

}
