#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "elastic/metrics.hpp"
#include "elastic/simulation.hpp"
#include "sample_file.hpp"

using namespace elastic;
using namespace elastic::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "elastic-kmeans");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("elastic_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  std::string str(const std::string& s) const { return (path_ / s).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  return out;
}

const std::vector<std::string> kFast = {"--restarts", "2", "--dp-slopes", "3", "--seed", "5"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
  args.insert(args.end(), kFast.begin(), kFast.end());
  return args;
}

std::string simulate_one(const TempDir& dir, const std::string& json) {
  write_text(dir / "cfg.json", json);
  const Run r = invoke({"simulate", "--config", dir.str("cfg.json"), "--out", dir.str("data")});
  REQUIRE(r.code == kExitOk);
  return lines(r.out).front();
}

}  // namespace

TEST_CASE("sample file round trip is lossless") {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(0.0, 1e3);
  const Grid grid = Grid::uniform(17);
  std::vector<Func> funcs;
  for (int i = 0; i < 5; ++i) {
    Eigen::MatrixXd v(17, 2);
    for (Eigen::Index r = 0; r < 17; ++r) {
      v(r, 0) = z(rng);
      v(r, 1) = z(rng) * 1e-300;
    }
    v(3, 0) = 0.1 + 0.2;
    v(4, 1) = -0.0;
    funcs.emplace_back(grid, v);
  }
  const FunctionSample sample(grid, funcs);
  const std::vector<int> labels{1, 2, 2, 7, 1};
  write_sample_file(dir / "a.csv", sample, &labels);
  const SampleFile back = read_sample_file(dir / "a.csv");
  REQUIRE(back.labels);
  CHECK(*back.labels == labels);
  CHECK(back.sample.grid == grid);
  for (int i = 0; i < 5; ++i) CHECK(back.sample.funcs[static_cast<std::size_t>(i)].values() == funcs[static_cast<std::size_t>(i)].values());
  write_sample_file(dir / "b.csv", back.sample, &*back.labels);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  SUBCASE("without labels") {
    write_sample_file(dir / "c.csv", sample);
    CHECK_FALSE(read_sample_file(dir / "c.csv").labels.has_value());
  }
}

TEST_CASE("sample file errors name the line") {
  TempDir dir;
  write_text(dir / "nohdr.csv", "0,0.5,1\n1,2,3\n");
  CHECK_THROWS_AS(read_sample_file(dir / "nohdr.csv"), InputError);
  write_text(dir / "short.csv", "# {\"version\":1,\"N\":2,\"T\":3,\"m\":1}\n0,0.5,1\n1,2,3\n");
  CHECK_THROWS_WITH_AS(read_sample_file(dir / "short.csv"), doctest::Contains("short.csv:4"), InputError);
  write_text(dir / "wide.csv", "# {\"version\":1,\"N\":1,\"T\":3,\"m\":1}\n0,0.5,1\n1,2,3,4\n");
  CHECK_THROWS_WITH_AS(read_sample_file(dir / "wide.csv"), doctest::Contains("wide.csv:3"), InputError);
  write_text(dir / "label.csv", "# {\"version\":1,\"N\":1,\"T\":3,\"m\":1,\"labels\":true}\n0,0.5,1\n1,2,3,0\n");
  CHECK_THROWS_AS(read_sample_file(dir / "label.csv"), InputError);
  write_text(dir / "nan.csv", "# {\"version\":1,\"N\":1,\"T\":3,\"m\":1}\n0,0.5,1\n1,x,3\n");
  CHECK_THROWS_AS(read_sample_file(dir / "nan.csv"), InputError);
  write_text(dir / "extra.csv", "# {\"version\":1,\"N\":1,\"T\":3,\"m\":1}\n0,0.5,1\n1,2,3\n1,2,3\n");
  CHECK_THROWS_AS(read_sample_file(dir / "extra.csv"), InputError);
}

TEST_CASE("simulate writes labelled, reproducible files") {
  TempDir dir;
  write_text(dir / "cfg.json",
             R"({"generator":"sim1","N":120,"tau":0.05,"K_star":2,"T":51,"replicates":2,"seed":7})");
  const Run a = invoke({"simulate", "--config", dir.str("cfg.json"), "--out", dir.str("a")});
  const Run b = invoke({"simulate", "--config", dir.str("cfg.json"), "--out", dir.str("b")});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  const fs::path name = "sim1_N120_tau0.05_K2_rep0.csv";
  CHECK(fs::exists(dir / "a" / "sim1_N120_tau0.05_K2_rep1.csv"));
  CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  const SampleFile f = read_sample_file(dir / "a" / name);
  CHECK(f.sample.size() == 120);
  REQUIRE(f.labels);
  for (int l : *f.labels) CHECK((l == 1 || l == 2));

  SUBCASE("file content equals the generator with seed + replicate") {
    const LabeledSample ls = generate_sim1({120, 0.05, 2, 51, 8});
    const SampleFile g = read_sample_file(dir / "a" / "sim1_N120_tau0.05_K2_rep1.csv");
    for (std::size_t i = 0; i < 120; ++i) CHECK(g.sample.funcs[i].values() == ls.sample.funcs[i].values());
  }
  SUBCASE("sim2 emits two-dimensional functions") {
    write_text(dir / "cfg2.json", R"({"generator":"sim2","N":9,"tau":0.1,"K_star":3,"T":31})");
    REQUIRE(invoke({"simulate", "--config", dir.str("cfg2.json"), "--out", dir.str("c")}).code == kExitOk);
    CHECK(read_sample_file(dir / "c" / "sim2_N9_tau0.1_K3_rep0.csv").sample.dims() == 2);
  }
}

TEST_CASE("configuration and input errors map to exit codes") {
  TempDir dir;
  CHECK(invoke({"cluster", "--input", dir.str("missing.csv"), "--k", "2", "--out", dir.str("o")}).code == kExitInputError);
  CHECK(invoke({"cluster", "--bogus"}).code == kExitConfigError);
  CHECK(invoke({}).code == kExitConfigError);
  write_text(dir / "bad.json", "{not json");
  CHECK(invoke({"simulate", "--config", dir.str("bad.json"), "--out", dir.str("o")}).code == kExitConfigError);
  write_text(dir / "unknown.json", R"({"generator":"sim3"})");
  CHECK(invoke({"simulate", "--config", dir.str("unknown.json"), "--out", dir.str("o")}).code == kExitConfigError);
  write_text(dir / "key.json", R"({"replicate":3})");
  CHECK(invoke({"simulate", "--config", dir.str("key.json"), "--out", dir.str("o")}).code == kExitConfigError);
  const std::string file = simulate_one(dir, R"({"N":10,"T":31,"K_star":2})");
  CHECK(invoke({"cluster", "--input", file, "--k", "2", "--out", dir.str("o"), "--epsilon", "0"}).code == kExitConfigError);
  CHECK(invoke({"cluster", "--input", file, "--k", "11", "--out", dir.str("o")}).code == kExitInputError);
  CHECK(invoke({"select-k", "--input", file, "--kmax", "11", "--out", dir.str("o")}).code == kExitConfigError);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("cluster writes the full result bundle") {
  TempDir dir;
  const std::string file = simulate_one(dir, R"({"N":24,"T":41,"K_star":2,"tau":0.05,"seed":3})");
  const Run r = invoke(with_fast({"cluster", "--input", file, "--k", "2", "--out", dir.str("res"), "--emit-ari"}));
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("ARI 1\n") != std::string::npos);
  for (const char* f : {"labels.csv", "templates.csv", "template_srvfs.csv", "warpings.csv", "aligned.csv",
                        "aligned_srvfs.csv", "cost_trace.csv", "distances.csv", "band_input.csv", "band_input.svg",
                        "band_cluster1.csv", "band_cluster2.svg", "summary.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "res" / f), f);
  }
  const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "res" / "summary.json"));
  CHECK(summary["ari"].get<double>() == 1.0);
  CHECK(summary["converged"].get<bool>());
  const SampleFile aligned = read_sample_file(dir / "res" / "aligned.csv");
  CHECK(aligned.sample.size() == 24);
  CHECK(read_sample_file(dir / "res" / "templates.csv").sample.size() == 2);
  const auto trace = lines(slurp(dir / "res" / "cost_trace.csv"));
  CHECK(trace.size() == summary["iterations"].get<std::size_t>() + 1);

  SUBCASE("reruns with the same seed are identical") {
    REQUIRE(invoke(with_fast({"cluster", "--input", file, "--k", "2", "--out", dir.str("again")})).code == kExitOk);
    CHECK(slurp(dir / "res" / "labels.csv") == slurp(dir / "again" / "labels.csv"));
    CHECK(slurp(dir / "res" / "warpings.csv") == slurp(dir / "again" / "warpings.csv"));
  }
  SUBCASE("thread count does not change the result") {
    auto args = with_fast({"cluster", "--input", file, "--k", "2", "--out", dir.str("mt"), "--threads", "3"});
    REQUIRE(invoke(args).code == kExitOk);
    CHECK(slurp(dir / "res" / "aligned.csv") == slurp(dir / "mt" / "aligned.csv"));
  }
  SUBCASE("hitting the iteration cap returns the non-convergence code") {
    const Run capped =
        invoke(with_fast({"cluster", "--input", file, "--k", "2", "--out", dir.str("cap"), "--max-iter", "1"}));
    const auto s = nlohmann::json::parse(slurp(dir / "cap" / "summary.json"));
    CHECK(capped.code == (s["converged"].get<bool>() ? kExitOk : kExitNotConverged));
    CHECK_FALSE(s["converged"].get<bool>());
  }
  SUBCASE("K = 1 gives multiple alignment output") {
    REQUIRE(invoke(with_fast({"cluster", "--input", file, "--k", "1", "--out", dir.str("one")})).code == kExitOk);
    CHECK(fs::exists(dir / "one" / "band_cluster1.svg"));
    CHECK_FALSE(fs::exists(dir / "one" / "band_cluster2.csv"));
  }
  SUBCASE("--emit-ari without labels is an input error") {
    write_sample_file(dir / "plain.csv", read_sample_file(file).sample);
    CHECK(invoke({"cluster", "--input", dir.str("plain.csv"), "--k", "2", "--out", dir.str("x"), "--emit-ari"}).code ==
          kExitInputError);
  }
}

TEST_CASE("select-k report and penalty column") {
  TempDir dir;
  const std::string file = simulate_one(dir, R"({"N":20,"T":41,"K_star":2,"tau":0.05,"seed":2})");
  const Run r = invoke(with_fast({"select-k", "--input", file, "--kmax", "3", "--out", dir.str("sk")}));
  REQUIRE(r.code == kExitOk);
  const nlohmann::json rep = nlohmann::json::parse(slurp(dir / "sk" / "report.json"));
  CHECK(r.out.find("chosen_K " + std::to_string(rep["chosen_K"].get<int>())) != std::string::npos);
  const auto rows = lines(slurp(dir / "sk" / "bic.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "K,bic,loglik,penalty,d,variance_floored");
  const double log_n = std::log(20.0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    const double k = std::stod(cells[0]);
    const double d = std::stod(cells[4]);
    CHECK(std::stod(cells[3]) == doctest::Approx(log_n * (2.0 * d + 1.0) * k - log_n).epsilon(1e-12));
    CHECK(std::stod(cells[1]) == doctest::Approx(-2.0 * std::stod(cells[2]) + std::stod(cells[3])).epsilon(1e-12));
  }
  CHECK(fs::exists(dir / "sk" / "chosen" / "labels.csv"));

  SUBCASE("kmax = 1 chooses one cluster") {
    const Run one = invoke(with_fast({"select-k", "--input", file, "--kmax", "1", "--out", dir.str("one")}));
    CHECK(one.code == kExitOk);
    CHECK(one.out.find("chosen_K 1") != std::string::npos);
  }
}

TEST_CASE("replicate tables") {
  TempDir dir;
  write_text(dir / "grid.json",
             R"({"generator":"sim1","N":24,"tau":0.05,"K_star":2,"T":41,"replicates":1,"seed":4,"select_k":true,"kmax":2})");
  const Run r = invoke(with_fast({"replicate", "--config", dir.str("grid.json"), "--out", dir.str("rep")}));
  REQUIRE(r.code == kExitOk);
  const auto table = lines(slurp(dir / "rep" / "table.csv"));
  REQUIRE(table.size() == 4);
  for (std::size_t i = 1; i < table.size(); ++i) CHECK(split(table[i])[6] == "0");
  const auto wide = lines(slurp(dir / "rep" / "table_wide.csv"));
  CHECK(wide[0] == "N,tau,K_star,(a),(c),(d)");
  const auto sel = lines(slurp(dir / "rep" / "selection.csv"));
  REQUIRE(sel.size() == 2);
  CHECK(split(sel[1])[4] == "1");

  SUBCASE("cell values equal single cluster and select-k runs on the same seed") {
    write_text(dir / "cfg.json", R"({"generator":"sim1","N":24,"tau":0.05,"K_star":2,"T":41,"seed":4})");
    REQUIRE(invoke({"simulate", "--config", dir.str("cfg.json"), "--out", dir.str("data")}).code == kExitOk);
    const std::string file = dir.str("data/sim1_N24_tau0.05_K2_rep0.csv");
    std::vector<std::string> args = {"cluster", "--input", file, "--k", "2", "--out", dir.str("c"), "--emit-ari",
                                     "--restarts", "2", "--dp-slopes", "3", "--seed", "4"};
    const Run c = invoke(args);
    REQUIRE(c.code == kExitOk);
    std::string elastic_ari;
    for (const auto& row : lines(slurp(dir / "rep" / "replicates.csv"))) {
      const auto cells = split(row);
      if (cells.size() > 7 && cells[6] == "elastic") elastic_ari = cells[7];
    }
    CHECK(c.out.find("ARI " + elastic_ari + "\n") != std::string::npos);
    const Run s = invoke({"select-k", "--input", file, "--kmax", "2", "--out", dir.str("s"), "--restarts", "2",
                       "--dp-slopes", "3", "--seed", "4"});
    REQUIRE(s.code == kExitOk);
    const std::string chosen = lines(s.out).front().substr(9);
    CHECK(split(sel[1])[8 + std::stoi(chosen) - 1] == "1");
  }
}

TEST_CASE("summarize bands") {
  TempDir dir;
  SUBCASE("identical functions give a zero-width band") {
    const Grid g = Grid::uniform(21);
    Eigen::MatrixXd v(21, 1);
    for (Eigen::Index i = 0; i < 21; ++i) v(i, 0) = std::sin(static_cast<double>(i));
    write_sample_file(dir / "same.csv", FunctionSample(g, {Func(g, v), Func(g, v), Func(g, v)}));
    REQUIRE(invoke({"summarize", "--input", dir.str("same.csv"), "--out", dir.str("s")}).code == kExitOk);
    const auto s = nlohmann::json::parse(slurp(dir / "s" / "summary.json"));
    CHECK(s["groups"][0]["max_width"].get<double>() == 0.0);
  }
  SUBCASE("alignment narrows a misaligned single-peak sample") {
    const std::string file = simulate_one(dir, R"({"N":30,"T":51,"K_star":1,"tau":0.05,"seed":9})");
    REQUIRE(invoke({"summarize", "--input", file, "--out", dir.str("raw")}).code == kExitOk);
    REQUIRE(invoke(with_fast({"cluster", "--input", file, "--k", "1", "--out", dir.str("al")})).code == kExitOk);
    REQUIRE(invoke({"summarize", "--input", dir.str("al/aligned.csv"), "--out", dir.str("als")}).code == kExitOk);
    const double raw = nlohmann::json::parse(slurp(dir / "raw" / "summary.json"))["groups"][0]["max_width"];
    const double al = nlohmann::json::parse(slurp(dir / "als" / "summary.json"))["groups"][0]["max_width"];
    CHECK(al < raw);
  }
  SUBCASE("two-dimensional input draws one panel per dimension") {
    write_text(dir / "cfg.json", R"({"generator":"sim2","N":12,"tau":0.1,"K_star":2,"T":31})");
    REQUIRE(invoke({"simulate", "--config", dir.str("cfg.json"), "--out", dir.str("d")}).code == kExitOk);
    REQUIRE(invoke({"summarize", "--input", dir.str("d/sim2_N12_tau0.1_K2_rep0.csv"), "--out", dir.str("m2")}).code ==
            kExitOk);
    const std::string svg = slurp(dir / "m2" / "band_all.svg");
    CHECK(svg.find("data-dim=\"1\"") != std::string::npos);
    CHECK(svg.find("data-dim=\"2\"") != std::string::npos);
    CHECK(svg.find("data-dim=\"3\"") == std::string::npos);
    CHECK(fs::exists(dir / "m2" / "band_group2.csv"));
    const auto band = lines(slurp(dir / "m2" / "band_all.csv"));
    CHECK(band.size() == 1 + 2 * 31);
  }
}

TEST_CASE("distance matrix") {
  TempDir dir;
  const std::string file = simulate_one(dir, R"({"N":6,"T":31,"K_star":2,"seed":1})");
  REQUIRE(invoke({"distance", "--input", file, "--out", dir.str("d.csv"), "--dp-slopes", "3"}).code == kExitOk);
  const auto rows = lines(slurp(dir / "d.csv"));
  REQUIRE(rows.size() == 6);
  std::vector<std::vector<double>> m;
  for (const auto& row : rows) m.push_back(parse_row(row, "d.csv"));
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(m[i][i] == 0.0);
    for (std::size_t j = 0; j < 6; ++j) CHECK(m[i][j] == m[j][i]);
  }
  REQUIRE(invoke({"distance", "--input", file, "--out", dir.str("a.csv"), "--dp-slopes", "3", "--asymmetric-distance"})
              .code == kExitOk);
  const auto arows = lines(slurp(dir / "a.csv"));
  for (std::size_t i = 0; i < 6; ++i) {
    const auto a = parse_row(arows[i], "a.csv");
    for (std::size_t j = 0; j < 6; ++j) CHECK(m[i][j] <= a[j] + 1e-15);
  }
}

TEST_CASE("import converts wide CSV") {
  TempDir dir;
  write_text(dir / "w.csv", "time,a,b,c\n0,5,10,20\n1,2,3,4,2\n2,2,2,1,1\n");
  const Run r = invoke({"import", "--input", dir.str("w.csv"), "--out", dir.str("s.csv"), "--skip-header", "--time-row",
                     "--labels"});
  REQUIRE(r.code == kExitOk);
  const SampleFile f = read_sample_file(dir / "s.csv");
  CHECK(f.sample.grid.points() == std::vector<double>{0.0, 0.25, 0.5, 1.0});
  CHECK(*f.labels == std::vector<int>{2, 1});
  CHECK(f.sample.funcs[1].values()(3, 0) == 1.0);

  SUBCASE("vector-valued rows") {
    write_text(dir / "v.csv", "1,2,3,4,5,6\n6,5,4,3,2,1\n");
    REQUIRE(invoke({"import", "--input", dir.str("v.csv"), "--out", dir.str("v2.csv"), "--dims", "2"}).code == kExitOk);
    const SampleFile v = read_sample_file(dir / "v2.csv");
    CHECK(v.sample.dims() == 2);
    CHECK(v.sample.funcs[0].values()(0, 1) == 4.0);
  }
  SUBCASE("ragged rows are rejected") {
    write_text(dir / "r.csv", "1,2,3\n1,2\n");
    CHECK(invoke({"import", "--input", dir.str("r.csv"), "--out", dir.str("r2.csv")}).code == kExitInputError);
  }
  SUBCASE("resampling onto a uniform grid") {
    REQUIRE(invoke({"import", "--input", dir.str("w.csv"), "--out", dir.str("g.csv"), "--skip-header", "--time-row",
                 "--labels", "--grid-size", "5"})
                .code == kExitOk);
    const SampleFile g = read_sample_file(dir / "g.csv");
    CHECK(g.sample.grid.size() == 5);
    CHECK(g.sample.funcs[0].values()(3, 0) == doctest::Approx(3.5));
  }
}
