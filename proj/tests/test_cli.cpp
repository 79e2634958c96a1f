#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "evchain/saliency.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(EVCHAIN_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir(const std::string& name) {
  fs::path dir = fs::path(EVCHAIN_WORKDIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kFixtures = EVCHAIN_FIXTURES;
const std::string kFixtureArgs =
    "--conllu " + kFixtures + "/example1.conllu --events " + kFixtures + "/example1_events.jsonl";

std::string gen_small(const fs::path& dir, int n = 60) {
  const auto r = run("gen --out " + dir.string() + " --n " + std::to_string(n) + " --seed 1 --dim 8");
  REQUIRE(r.code == 0);
  return "--conllu " + (dir / "corpus.conllu").string() + " --events " + (dir / "events.jsonl").string() +
         " --embeddings " + (dir / "embeddings.txt").string();
}

}  // namespace

TEST_CASE("gen writes corpus, events and a manifest", "[cli][gen]") {
  const auto dir = workdir("gen");
  const auto r = run("gen --out " + dir.string() + " --n 100 --seed 1");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "corpus.conllu"));
  CHECK(fs::exists(dir / "events.jsonl"));
  CHECK(fs::exists(dir / "embeddings.txt"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "gen");
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["outputs"]["corpus.conllu"].get<std::string>().size() == 64);
  CHECK(manifest.dump().find("time") == std::string::npos);

  const auto again = workdir("gen_again");
  REQUIRE(run("gen --out " + again.string() + " --n 100 --seed 1").code == 0);
  CHECK(slurp(again / "manifest.json") == slurp(dir / "manifest.json"));
  CHECK(slurp(again / "corpus.conllu") == slurp(dir / "corpus.conllu"));
}

TEST_CASE("usage errors exit with code 2 and name the flag", "[cli]") {
  const auto dir = workdir("usage");
  const auto bad = run("gen --out " + dir.string() + " --n 10 --weights 0.5,0.5,0.5");
  CHECK(bad.code == 2);
  CHECK(bad.output.find("--weights") != std::string::npos);
  CHECK(run("gen --out " + dir.string() + " --weights 0.5,x,0.5").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("extract --mode diagonal --out x").code == 2);
  const auto pairing = run("train --model lstm --repr tree --out x " + kFixtureArgs + " --embeddings x");
  CHECK(pairing.code == 2);
  CHECK(pairing.output.find("tree representation") != std::string::npos);
  CHECK(run("--help").code == 0);
}

TEST_CASE("runtime errors exit with code 1", "[cli]") {
  const auto dir = workdir("runtime");
  CHECK(run("extract --conllu /nonexistent.conllu --events /nonexistent.jsonl --out " + (dir / "x").string()).code == 1);
  std::ofstream(dir / "bad.jsonl") << R"({"doc_id": "climate", "sent_id": "nope", "token_id": 1, "label": "FU"})" << "\n";
  const auto dangling =
      run("extract --conllu " + kFixtures + "/example1.conllu --events " + (dir / "bad.jsonl").string() + " --out " +
          (dir / "x").string());
  CHECK(dangling.code == 1);
  CHECK(dangling.output.find("dangling reference") != std::string::npos);
}

TEST_CASE("extract reproduces the example chain", "[cli][extract]") {
  const auto dir = workdir("extract");
  const auto out = dir / "chains.jsonl";
  const auto r = run("extract " + kFixtureArgs + " --mode chain --out " + out.string());
  REQUIRE(r.code == 0);
  const auto rec = nlohmann::json::parse(slurp(out));
  std::string joined;
  for (const auto& f : rec["forms"]) joined += (joined.empty() ? "" : " ") + f.get<std::string>();
  CHECK(joined == "will launch describing their protest");
  CHECK(r.output.find("mean_length 5.000000") != std::string::npos);
  CHECK(fs::exists(dir / "chains.jsonl.manifest.json"));

  const auto w = run("extract " + kFixtureArgs + " --mode window --half-width 0 --out " + out.string());
  REQUIRE(w.code == 0);
  const auto win = nlohmann::json::parse(slurp(out));
  CHECK(win["forms"] == nlohmann::json::array({"protest"}));
}

TEST_CASE("train, eval and saliency on a small corpus", "[cli][train]") {
  const auto dir = workdir("train");
  const auto data = gen_small(dir / "data");
  const auto ckpt = (dir / "model.ckpt").string();
  REQUIRE(run("train --model lstm --repr chain --epochs 0 --hidden 4 --seed 3 --out " + ckpt + " " + data).code == 0);
  const auto ckpt0 = slurp(ckpt);
  REQUIRE(run("train --model lstm --repr chain --epochs 0 --hidden 4 --seed 3 --out " + ckpt + " " + data).code == 0);
  CHECK(slurp(ckpt) == ckpt0);

  REQUIRE(run("train --model lstm --repr chain --epochs 2 --hidden 4 --seed 3 --out " + ckpt + " " + data).code == 0);
  CHECK(slurp(ckpt) != ckpt0);
  CHECK(fs::exists(ckpt + ".manifest.json"));

  const auto ev = run("eval --model " + ckpt + " --conllu " + (dir / "data/corpus.conllu").string() + " --events " +
                      (dir / "data/events.jsonl").string());
  REQUIRE(ev.code == 0);
  CHECK(ev.output.find("Model | PA") != std::string::npos);

  const auto sal_dir = dir / "heat";
  const auto sal = run("saliency --model " + ckpt + " --conllu " + (dir / "data/corpus.conllu").string() +
                       " --events " + (dir / "data/events.jsonl").string() + " --format csv --out " +
                       sal_dir.string());
  REQUIRE(sal.code == 0);
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(sal_dir)) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    // Chain length is 5 on every generated sentence.
    CHECK(evchain::parse_heatmap_csv(slurp(entry.path())).tokens.size() == 5);
  }
  CHECK(files == 60);
}

TEST_CASE("saliency of a zero model is all white", "[cli][saliency]") {
  const auto dir = workdir("zero");
  const auto data = gen_small(dir / "data", 10);
  const auto ckpt = dir / "model.ckpt";
  REQUIRE(run("train --model cnn --repr window --epochs 0 --hidden 4 --out " + ckpt.string() + " " + data).code == 0);
  // Zero every parameter value in the checkpoint.
  std::istringstream in(slurp(ckpt));
  std::string line, zeroed;
  while (std::getline(in, line)) {
    if (line.rfind("param ", 0) == 0) {
      std::istringstream ls(line);
      std::string kind, name, v;
      ls >> kind >> name;
      line = kind + " " + name;
      while (ls >> v) line += " 0";
    }
    zeroed += line + "\n";
  }
  std::ofstream(ckpt, std::ios::trunc) << zeroed;
  const auto out = dir / "heat";
  REQUIRE(run("saliency --model " + ckpt.string() + " --conllu " + (dir / "data/corpus.conllu").string() +
              " --events " + (dir / "data/events.jsonl").string() + " --format html --out " + out.string())
              .code == 0);
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    if (entry.path().extension() != ".html") continue;
    ++files;
    const auto html = slurp(entry.path());
    CHECK(html.find("rgb(255,255,255)") != std::string::npos);
    CHECK(html.find("data-intensity=\"0.000000\"") != std::string::npos);
    CHECK(html.find("data-intensity=\"1") == std::string::npos);
  }
  CHECK(files == 10);
}

TEST_CASE("cv reports fold sizes and compares representations", "[cli][cv]") {
  const auto dir = workdir("cv");
  const auto data = gen_small(dir / "data", 45);
  const auto out = dir / "run";
  const auto r = run("cv --model lstm --repr chain --repr window --folds 10 --epochs 1 --hidden 4 --jobs 2 --out " +
                     out.string() + " " + data);
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["fold_sizes"] == nlohmann::json::array({5, 5, 5, 5, 5, 4, 4, 4, 4, 4}));
  CHECK(report["runs"].size() == 2);
  CHECK(report["comparison"][1]["representation"] == "window");
  CHECK(fs::exists(out / "chain" / "fold_10.ckpt"));
  CHECK(fs::exists(out / "report.txt"));
  CHECK(r.output.find("window") != std::string::npos);
}

TEST_CASE("gradcheck passes for every family", "[cli][gradcheck]") {
  for (const char* model : {"lstm", "cnn", "treelstm"})
    for (int seed = 1; seed <= 5; ++seed) {
      const auto r = run(std::string("gradcheck --model ") + model + " --seed " + std::to_string(seed));
      INFO(r.output);
      CHECK(r.code == 0);
      CHECK(r.output.find("max_relative_error") != std::string::npos);
    }
}

TEST_CASE("data directory comes from the environment", "[cli]") {
  const auto dir = workdir("envdir");
  setenv("EVCHAIN_DATA_DIR", dir.string().c_str(), 1);
  const auto gen = run("gen --n 20 --seed 2 --dim 4");
  const auto ext = run("extract --mode chain --out " + (dir / "c.jsonl").string());
  unsetenv("EVCHAIN_DATA_DIR");
  CHECK(gen.code == 0);
  CHECK(fs::exists(dir / "corpus.conllu"));
  CHECK(ext.code == 0);
  CHECK(ext.output.find("mentions 20") != std::string::npos);
}
