#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elastic/clustering.hpp"
#include "elastic/metrics.hpp"
#include "elastic/model_selection.hpp"
#include "elastic/parallel.hpp"
#include "experiment.hpp"
#include "plot.hpp"
#include "sample_file.hpp"

namespace elastic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::size_t grid_size = 0;
  std::size_t stride = 1;
  int slopes = 7;
  std::size_t restarts = 10;
  double epsilon = 1e-3;
  std::size_t max_iter = 50;
  double rho = 0.95;
  std::size_t kmax = 6;
  unsigned threads = 1;
  bool symmetric = true;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Master seed for restarts")->capture_default_str();
  app->add_option("--grid-size", c.grid_size, "Resample inputs onto a uniform grid of this size (0 keeps the input grid)")
      ->capture_default_str();
  app->add_option("--dp-stride", c.stride, "DP lattice stride in grid points")->capture_default_str();
  app->add_option("--dp-slopes", c.slopes, "Largest step component of the DP slope set")->capture_default_str();
  app->add_option("--restarts", c.restarts, "Random restarts of elastic k-means")->capture_default_str();
  app->add_option("--epsilon", c.epsilon, "Relative template-change stopping threshold")->capture_default_str();
  app->add_option("--max-iter", c.max_iter, "Iteration cap")->capture_default_str();
  app->add_option("--rho", c.rho, "Explained-variance fraction for the BIC dimension")->capture_default_str();
  app->add_option("--kmax", c.kmax, "Largest K tried by select-k")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  app->add_flag("--symmetric-distance,!--asymmetric-distance", c.symmetric,
                "Symmetrize pairwise amplitude distances by the smaller direction");
}

void validate(const Common& c) {
  if (c.grid_size != 0 && c.grid_size < 3) throw ConfigError("--grid-size must be 0 or at least 3");
  if (c.stride < 1) throw ConfigError("--dp-stride must be at least 1");
  if (c.slopes < 1) throw ConfigError("--dp-slopes must be at least 1");
  if (c.restarts < 1) throw ConfigError("--restarts must be at least 1");
  if (!(c.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
  if (c.max_iter < 1) throw ConfigError("--max-iter must be at least 1");
  if (!(c.rho > 0.0 && c.rho < 1.0)) throw ConfigError("--rho must lie in (0, 1)");
  if (c.kmax < 1) throw ConfigError("--kmax must be at least 1");
}

KmeansConfig kmeans_config(const Common& c, std::size_t k) {
  KmeansConfig config;
  config.k = k;
  config.n_restarts = c.restarts;
  config.max_iter = c.max_iter;
  config.epsilon = c.epsilon;
  config.dp = DpConfig{c.stride, c.slopes, c.threads};
  config.seed = c.seed;
  return config;
}

SampleFile load(const std::string& path, const Common& c) {
  SampleFile file = read_sample_file(path);
  if (c.grid_size != 0 && c.grid_size != file.sample.grid.size()) {
    const Grid grid = Grid::uniform(c.grid_size);
    std::vector<Func> funcs;
    funcs.reserve(file.sample.size());
    for (const auto& f : file.sample.funcs) funcs.push_back(resample(f, grid));
    file.sample = FunctionSample(grid, std::move(funcs));
  }
  return file;
}

std::vector<int> zero_based(const std::vector<int>& labels) {
  // Stored labels are arbitrary positive integers; map them to 0..G-1 in sorted order.
  std::map<int, int> index;
  for (int l : labels) index.emplace(l, 0);
  int next = 0;
  for (auto& [l, i] : index) i = next++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(index[l]);
  return out;
}

std::vector<int> one_based(const std::vector<int>& labels) {
  std::vector<int> out(labels);
  for (int& l : out) ++l;
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

FunctionSample srvf_sample(const std::vector<Srvf>& qs) {
  std::vector<Func> funcs;
  funcs.reserve(qs.size());
  for (const auto& q : qs) funcs.emplace_back(q.grid(), q.values());
  return FunctionSample(qs.front().grid(), std::move(funcs));
}

FunctionSample warping_sample(const std::vector<Warping>& ws) {
  std::vector<Func> funcs;
  funcs.reserve(ws.size());
  for (const auto& w : ws) funcs.emplace_back(w.grid(), Eigen::MatrixXd(w.gamma()));
  return FunctionSample(ws.front().grid(), std::move(funcs));
}

void write_band(const fs::path& dir, const std::string& stem, const std::vector<Func>& funcs, double n_sd,
                const std::string& title) {
  if (funcs.size() < 2) return;  // no standard deviation for a single function
  const PointwiseBand band = pointwise_band(funcs, n_sd);
  write_band_csv(dir / (stem + ".csv"), band);
  write_band_svg(dir / (stem + ".svg"), band, funcs, title);
}

json settings_json(const Common& c) {
  return {{"seed", c.seed},         {"dp_stride", c.stride}, {"dp_slopes", c.slopes},
          {"restarts", c.restarts}, {"epsilon", c.epsilon},  {"max_iter", c.max_iter}};
}

// Infinite or NaN values are not representable in JSON; write null instead.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_clustering(const fs::path& dir, const FunctionSample& sample, const ClusteringResult& r,
                      const std::optional<std::vector<int>>& truth) {
  make_dir(dir);
  {
    std::ofstream out = open_out(dir / "labels.csv");
    out << "index,label,distance" << (truth ? ",true_label" : "") << '\n';
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double d = l2_distance(r.templates[static_cast<std::size_t>(r.labels[i])], r.aligned_srvfs[i]);
      out << i << ',' << r.labels[i] + 1 << ',' << format_double(d);
      if (truth) out << ',' << (*truth)[i];
      out << '\n';
    }
  }
  const std::vector<int> labels = one_based(r.labels);
  write_sample_file(dir / "templates.csv", FunctionSample(sample.grid, r.template_funcs));
  write_sample_file(dir / "template_srvfs.csv", srvf_sample(r.templates));
  write_sample_file(dir / "warpings.csv", warping_sample(r.warpings), &labels);
  write_sample_file(dir / "aligned.csv", FunctionSample(sample.grid, r.aligned_funcs), &labels);
  write_sample_file(dir / "aligned_srvfs.csv", srvf_sample(r.aligned_srvfs), &labels);
  {
    std::ofstream out = open_out(dir / "cost_trace.csv");
    out << "iteration,cost\n";
    for (std::size_t i = 0; i < r.cost_trace.size(); ++i) out << i + 1 << ',' << format_double(r.cost_trace[i]) << '\n';
  }
  {
    std::ofstream out = open_out(dir / "distances.csv");
    out << "index";
    for (std::size_t c = 0; c < r.k; ++c) out << ",cluster" << c + 1;
    out << '\n';
    for (std::size_t i = 0; i < sample.size(); ++i) {
      out << i;
      for (std::size_t c = 0; c < r.k; ++c) out << ',' << format_double(l2_distance(r.templates[c], r.aligned_srvfs[i]));
      out << '\n';
    }
  }
  write_band(dir, "band_input", sample.funcs, 2.0, "input, unaligned");
  for (std::size_t c = 0; c < r.k; ++c) {
    std::vector<Func> members;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (r.labels[i] == static_cast<int>(c)) members.push_back(r.aligned_funcs[i]);
    }
    write_band(dir, "band_cluster" + std::to_string(c + 1), members, 2.0,
               "cluster " + std::to_string(c + 1) + ", aligned (n=" + std::to_string(members.size()) + ")");
  }
}

json clustering_json(const ClusteringResult& r) {
  std::vector<std::size_t> sizes(r.k, 0);
  for (int l : r.labels) ++sizes[static_cast<std::size_t>(l)];
  return {{"K", r.k},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"final_cost", number(r.final_cost)},
          {"restart", r.restart},
          {"degenerate", r.degenerate},
          {"cluster_sizes", sizes}};
}

std::optional<double> ari_against(const std::vector<int>& labels, const std::optional<std::vector<int>>& truth) {
  if (!truth) return std::nullopt;
  return adjusted_rand_index(labels, zero_based(*truth));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- subcommands ---------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::string out_dir;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ExperimentGrid grid = parse_grid(read_json_file(a.config));
  make_dir(a.out_dir);
  for (const Cell& cell : cells(grid)) {
    for (std::size_t r = 0; r < grid.replicates; ++r) {
      const LabeledSample ls = simulate(grid, cell, r);
      const std::vector<int> labels = one_based(ls.true_labels);
      const fs::path path = fs::path(a.out_dir) / sample_file_name(grid, cell, r);
      write_sample_file(path, ls.sample, &labels);
      out << path.string() << '\n';
    }
  }
  return kExitOk;
}

struct ImportArgs {
  std::string input;
  std::string output;
  std::size_t dims = 1;
  bool labels = false;
  bool skip_header = false;
  bool time_row = false;
};

int cmd_import(const ImportArgs& a, const Common& c, std::ostream& out) {
  if (a.dims < 1) throw ConfigError("--dims must be at least 1");
  std::ifstream in(a.input);
  if (!in) throw InputError("cannot open " + a.input);
  std::string line;
  std::size_t line_no = 0;
  if (a.skip_header) {
    std::getline(in, line);
    ++line_no;
  }
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    rows.push_back(parse_row(line, a.input + ":" + std::to_string(line_no)));
    row_lines.push_back(line_no);
  }
  std::vector<double> times;
  std::size_t first = 0;
  if (a.time_row) {
    if (rows.empty()) throw InputError(a.input + ": missing time row");
    times = rows.front();
    first = 1;
  }
  if (rows.size() <= first) throw InputError(a.input + ": no function rows");
  const std::size_t width = rows[first].size();
  const std::size_t values = width - (a.labels ? 1 : 0);
  if (width < (a.labels ? 2u : 1u) || values % a.dims != 0) {
    throw InputError(a.input + ": row width is not a multiple of --dims");
  }
  const std::size_t t = values / a.dims;
  if (t < 3) throw InputError(a.input + ": functions need at least 3 time points");
  std::vector<double> points(t);
  if (a.time_row) {
    if (times.size() != t) throw InputError(a.input + ": time row must have one entry per time point");
    const double lo = times.front();
    const double span = times.back() - lo;
    if (!(span > 0.0)) throw InputError(a.input + ": time row must be increasing");
    for (std::size_t i = 0; i < t; ++i) points[i] = (times[i] - lo) / span;
    points.front() = 0.0;
    points.back() = 1.0;
  } else {
    for (std::size_t i = 0; i < t; ++i) points[i] = static_cast<double>(i) / static_cast<double>(t - 1);
  }
  Grid grid(points);
  std::vector<Func> funcs;
  std::vector<int> labels;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const std::string where = a.input + ":" + std::to_string(row_lines[r]);
    if (rows[r].size() != width) throw InputError(where + ": expected " + std::to_string(width) + " values");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a.dims));
    for (std::size_t d = 0; d < a.dims; ++d) {
      for (std::size_t i = 0; i < t; ++i) {
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = rows[r][d * t + i];
      }
    }
    if (a.labels) {
      const double l = rows[r].back();
      if (!(l >= 1.0) || l != std::floor(l) || l > 1e9) throw InputError(where + ": label must be a positive integer");
      labels.push_back(static_cast<int>(l));
    }
    try {
      funcs.emplace_back(grid, std::move(v));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  FunctionSample sample(grid, std::move(funcs));
  if (c.grid_size != 0) {
    const Grid g = Grid::uniform(c.grid_size);
    std::vector<Func> resampled;
    for (const auto& f : sample.funcs) resampled.push_back(resample(f, g));
    sample = FunctionSample(g, std::move(resampled));
  }
  write_sample_file(a.output, sample, a.labels ? &labels : nullptr);
  out << "imported " << sample.size() << " functions (T=" << sample.grid.size() << ", m=" << sample.dims() << ") to "
      << a.output << '\n';
  return kExitOk;
}

struct ClusterArgs {
  std::string input;
  std::size_t k = 0;
  std::string out_dir;
  bool emit_ari = false;
};

int cmd_cluster(const ClusterArgs& a, const Common& c, std::ostream& out) {
  if (a.k < 1) throw ConfigError("--k must be at least 1");
  const SampleFile file = load(a.input, c);
  if (a.emit_ari && !file.labels) throw InputError(a.input + ": --emit-ari needs embedded labels");
  const ClusteringResult r = elastic_kmeans(file.sample, kmeans_config(c, a.k));
  write_clustering(a.out_dir, file.sample, r, file.labels);
  json summary = clustering_json(r);
  summary["N"] = file.sample.size();
  summary["T"] = file.sample.grid.size();
  summary["m"] = file.sample.dims();
  summary["settings"] = settings_json(c);
  const std::optional<double> ari = ari_against(r.labels, file.labels);
  if (ari) summary["ari"] = number(*ari);
  std::ofstream(fs::path(a.out_dir) / "summary.json") << summary.dump(2) << '\n';
  out << "K " << r.k << " converged " << (r.converged ? "yes" : "no") << " iterations " << r.iterations
      << " cost " << format_double(r.final_cost) << '\n';
  if (a.emit_ari) out << "ARI " << format_double(*ari) << '\n';
  return r.converged ? kExitOk : kExitNotConverged;
}

struct SelectArgs {
  std::string input;
  std::string out_dir;
  bool emit_ari = false;
};

int cmd_select_k(const SelectArgs& a, const Common& c, std::ostream& out) {
  const SampleFile file = load(a.input, c);
  if (c.kmax > file.sample.size()) throw ConfigError("--kmax exceeds the number of functions");
  if (a.emit_ari && !file.labels) throw InputError(a.input + ": --emit-ari needs embedded labels");
  const Selection s = select_k(file.sample, c.kmax, c.rho, kmeans_config(c, 1));
  const BicReport& rep = s.report;
  make_dir(a.out_dir);
  {
    std::ofstream csv = open_out(fs::path(a.out_dir) / "bic.csv");
    csv << "K,bic,loglik,penalty,d,variance_floored\n";
    for (const auto& e : rep.per_k) {
      csv << e.k << ',' << format_double(e.bic) << ',' << format_double(e.loglik) << ',' << format_double(e.penalty)
          << ',' << e.d << ',' << (e.variance_floored ? 1 : 0) << '\n';
    }
  }
  json per_k = json::array();
  for (const auto& e : rep.per_k) {
    const ClusteringResult& r = s.clusterings[e.k - 1];
    json entry = clustering_json(r);
    entry["bic"] = number(e.bic);
    entry["loglik"] = number(e.loglik);
    entry["penalty"] = number(e.penalty);
    entry["d"] = e.d;
    entry["variance_floored"] = e.variance_floored;
    if (const auto ari = ari_against(r.labels, file.labels)) entry["ari"] = number(*ari);
    per_k.push_back(std::move(entry));
  }
  json report = {{"chosen_K", rep.chosen_k}, {"d", rep.d},         {"rho", rep.rho},
                 {"N", rep.n},               {"per_K", per_k},     {"explained_variance", rep.explained},
                 {"settings", settings_json(c)}};
  std::ofstream(fs::path(a.out_dir) / "report.json") << report.dump(2) << '\n';
  write_clustering(fs::path(a.out_dir) / "chosen", file.sample, s.clusterings[rep.chosen_k - 1], file.labels);
  out << "chosen_K " << rep.chosen_k << '\n';
  if (a.emit_ari) {
    out << "ARI " << format_double(*ari_against(s.clusterings[rep.chosen_k - 1].labels, file.labels)) << '\n';
  }
  return kExitOk;
}

struct ReplicateArgs {
  std::string config;
  std::string out_dir;
};

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

int cmd_replicate(const ReplicateArgs& a, const Common& c, const CLI::App& app, std::ostream& out) {
  ExperimentGrid grid = parse_grid(read_json_file(a.config));
  if (app.count("--rho") > 0) grid.rho = c.rho;
  if (app.count("--kmax") > 0) grid.k_max = c.kmax;
  if (app.count("--grid-size") > 0) grid.grid_size = c.grid_size;
  if (grid.grid_size < 3) throw ConfigError("T must be at least 3");
  make_dir(a.out_dir);
  const KmeansConfig base = kmeans_config(c, 1);
  std::vector<ReplicateOutcome> outcomes;
  for (const Cell& cell : cells(grid)) {
    for (std::size_t r = 0; r < grid.replicates; ++r) {
      outcomes.push_back(run_replicate(grid, cell, r, base));
      const ReplicateOutcome& o = outcomes.back();
      out << grid.generator << " N=" << cell.n << " tau=" << format_double(cell.tau) << " K*=" << cell.k_star
          << " rep=" << r;
      for (const auto& m : o.methods) out << ' ' << method_name(m.method) << '=' << (m.ari ? fixed(*m.ari, 4) : "failed");
      if (grid.select_k) out << " chosen_K=" << (o.chosen_k ? std::to_string(*o.chosen_k) : "failed");
      out << '\n';
    }
  }
  const fs::path dir(a.out_dir);
  {
    std::ofstream csv = open_out(dir / "replicates.csv");
    csv << "generator,N,tau,K_star,replicate,seed,method,ari,converged,error\n";
    for (const auto& o : outcomes) {
      for (const auto& m : o.methods) {
        csv << grid.generator << ',' << o.cell.n << ',' << format_double(o.cell.tau) << ',' << o.cell.k_star << ','
            << o.replicate << ',' << o.seed << ',' << method_name(m.method) << ','
            << (m.ari ? format_double(*m.ari) : "NA") << ',' << (m.converged ? 1 : 0) << ",\"" << m.error << "\"\n";
      }
    }
  }
  const std::vector<CellSummary> table = summarize(grid, outcomes);
  {
    std::ofstream csv = open_out(dir / "table.csv");
    csv << "generator,N,tau,K_star,method,mean_ari,sd_ari,replicates_ok,replicates_failed\n";
    for (const auto& s : table) {
      csv << grid.generator << ',' << s.cell.n << ',' << format_double(s.cell.tau) << ',' << s.cell.k_star << ','
          << method_name(s.method) << ',' << (s.ok ? format_double(s.mean) : "NA") << ','
          << (s.ok ? format_double(s.sd) : "NA") << ',' << s.ok << ',' << s.failed << '\n';
    }
  }
  {
    std::ofstream csv = open_out(dir / "table_wide.csv");
    csv << "N,tau,K_star";
    for (Method m : grid.methods) csv << ',' << method_column(m);
    csv << '\n';
    for (const Cell& cell : cells(grid)) {
      csv << cell.n << ',' << format_double(cell.tau) << ',' << cell.k_star;
      for (const auto& s : table) {
        if (s.cell.n != cell.n || s.cell.tau != cell.tau || s.cell.k_star != cell.k_star) continue;
        csv << ',' << (s.ok ? fixed(s.mean, 2) + " (" + fixed(s.sd, 2) + ")" : "failed");
        if (s.ok && s.failed) csv << " [" << s.failed << " failed]";
      }
      csv << '\n';
    }
  }
  if (grid.select_k) {
    std::ofstream csv = open_out(dir / "selection.csv");
    csv << "generator,N,tau,K_star,replicates,correct,rate,failed";
    for (std::size_t k = 1; k <= grid.k_max; ++k) csv << ",chosen_" << k;
    csv << '\n';
    for (const auto& s : summarize_selection(grid, outcomes)) {
      csv << grid.generator << ',' << s.cell.n << ',' << format_double(s.cell.tau) << ',' << s.cell.k_star << ','
          << s.total << ',' << s.correct << ','
          << (s.total ? format_double(static_cast<double>(s.correct) / static_cast<double>(s.total)) : "NA") << ','
          << s.failed;
      for (std::size_t n : s.chosen_counts) csv << ',' << n;
      csv << '\n';
    }
  }
  return kExitOk;
}

struct SummarizeArgs {
  std::string input;
  std::string out_dir;
  std::string labels;
  bool ignore_labels = false;
  double n_sd = 2.0;
};

std::vector<int> read_labels_csv(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<double> row = parse_row(line.substr(0, line.find(',', line.find(',') + 1)),
                                              path + ":" + std::to_string(line_no));
    if (row.size() != 2 || !(row[1] >= 1.0) || row[1] != std::floor(row[1])) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected index,label");
    }
    labels.push_back(static_cast<int>(row[1]));
  }
  if (labels.size() != n) throw InputError(path + ": expected one label per function");
  return labels;
}

int cmd_summarize(const SummarizeArgs& a, const Common& c, std::ostream& out) {
  if (!(a.n_sd >= 0.0)) throw ConfigError("--n-sd must be non-negative");
  const SampleFile file = load(a.input, c);
  if (file.sample.size() < 2) throw InputError(a.input + ": a band needs at least two functions");
  make_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  write_band(dir, "band_all", file.sample.funcs, a.n_sd, "all functions (n=" + std::to_string(file.sample.size()) + ")");
  std::optional<std::vector<int>> labels;
  if (!a.labels.empty()) {
    labels = read_labels_csv(a.labels, file.sample.size());
  } else if (!a.ignore_labels) {
    labels = file.labels;
  }
  json groups = json::array();
  groups.push_back({{"group", "all"}, {"n", file.sample.size()},
                    {"max_width", number(pointwise_band(file.sample.funcs, a.n_sd).max_width())}});
  if (labels) {
    std::map<int, std::vector<Func>> by_label;
    for (std::size_t i = 0; i < file.sample.size(); ++i) by_label[(*labels)[i]].push_back(file.sample.funcs[i]);
    for (const auto& [label, funcs] : by_label) {
      const std::string stem = "band_group" + std::to_string(label);
      write_band(dir, stem, funcs, a.n_sd,
                 "group " + std::to_string(label) + " (n=" + std::to_string(funcs.size()) + ")");
      groups.push_back({{"group", label}, {"n", funcs.size()},
                        {"max_width", funcs.size() < 2 ? json(nullptr) : number(pointwise_band(funcs, a.n_sd).max_width())}});
    }
  }
  std::ofstream(dir / "summary.json") << json{{"n_sd", a.n_sd}, {"groups", groups}}.dump(2) << '\n';
  for (const auto& g : groups) out << "group " << g["group"] << " n " << g["n"] << " max_width " << g["max_width"] << '\n';
  return kExitOk;
}

struct DistanceArgs {
  std::string input;
  std::string output;
};

int cmd_distance(const DistanceArgs& a, const Common& c, std::ostream& out) {
  const SampleFile file = load(a.input, c);
  const std::size_t n = file.sample.size();
  std::vector<Srvf> qs;
  for (const auto& f : file.sample.funcs) qs.push_back(to_srvf(f));
  const DpConfig dp{c.stride, c.slopes, 1};
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Symmetric distances only need the upper triangle; each job owns one matrix entry pair.
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = c.symmetric ? i + 1 : 0; j < n; ++j) {
      if (i != j) jobs.emplace_back(i, j);
    }
  }
  parallel_for(jobs.size(), c.threads, [&](std::size_t job) {
    const auto [i, j] = jobs[job];
    const double d = amplitude_distance(qs[i], qs[j], dp, c.symmetric);
    dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
    if (c.symmetric) dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
  });
  std::ofstream csv = open_out(a.output);
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    for (Eigen::Index j = 0; j < dist.cols(); ++j) csv << (j ? "," : "") << format_double(dist(i, j));
    csv << '\n';
  }
  out << "wrote " << n << "x" << n << " distance matrix to " << a.output << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elastic k-means clustering of functional data"};
  app.require_subcommand(1);
  Common common;

  SimulateArgs sim;
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Write simulated samples described by a JSON config");
  simulate_cmd->add_option("--config", sim.config, "Experiment config (JSON)")->required();
  simulate_cmd->add_option("--out", sim.out_dir, "Output directory")->required();

  ImportArgs imp;
  CLI::App* import_cmd = app.add_subcommand("import", "Convert a wide CSV (one function per row) to a sample file");
  import_cmd->add_option("--input", imp.input, "Wide CSV")->required();
  import_cmd->add_option("--out", imp.output, "Sample file to write")->required();
  import_cmd->add_option("--dims", imp.dims, "Codomain dimension m; rows hold m blocks of T values")->capture_default_str();
  import_cmd->add_flag("--labels", imp.labels, "Last column holds positive integer labels");
  import_cmd->add_flag("--skip-header", imp.skip_header, "Ignore the first line");
  import_cmd->add_flag("--time-row", imp.time_row, "First data row holds the time points");
  import_cmd->add_option("--grid-size", common.grid_size, "Resample onto a uniform grid of this size");

  ClusterArgs cl;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "Run elastic k-means and write the result bundle");
  cluster_cmd->add_option("--input", cl.input, "Sample file")->required();
  cluster_cmd->add_option("--k", cl.k, "Number of clusters")->required();
  cluster_cmd->add_option("--out", cl.out_dir, "Output directory")->required();
  cluster_cmd->add_flag("--emit-ari", cl.emit_ari, "Print the ARI against the embedded labels");
  add_common(cluster_cmd, common);

  SelectArgs sel;
  CLI::App* select_cmd = app.add_subcommand("select-k", "Choose K by the fPCA/GMM BIC");
  select_cmd->add_option("--input", sel.input, "Sample file")->required();
  select_cmd->add_option("--out", sel.out_dir, "Output directory")->required();
  select_cmd->add_flag("--emit-ari", sel.emit_ari, "Print the ARI of the chosen clustering");
  add_common(select_cmd, common);

  ReplicateArgs rep;
  CLI::App* replicate_cmd = app.add_subcommand("replicate", "Run a simulation study and tabulate ARIs");
  replicate_cmd->add_option("--config", rep.config, "Experiment config (JSON)")->required();
  replicate_cmd->add_option("--out", rep.out_dir, "Output directory")->required();
  add_common(replicate_cmd, common);

  SummarizeArgs sum;
  CLI::App* summarize_cmd = app.add_subcommand("summarize", "Pointwise mean and SD bands per label group");
  summarize_cmd->add_option("--input", sum.input, "Sample file")->required();
  summarize_cmd->add_option("--out", sum.out_dir, "Output directory")->required();
  summarize_cmd->add_option("--labels", sum.labels, "labels.csv from cluster; overrides embedded labels");
  summarize_cmd->add_flag("--ignore-labels", sum.ignore_labels, "Summarize the whole sample only");
  summarize_cmd->add_option("--n-sd", sum.n_sd, "Band half-width in standard deviations")->capture_default_str();
  add_common(summarize_cmd, common);

  DistanceArgs dis;
  CLI::App* distance_cmd = app.add_subcommand("distance", "Pairwise amplitude distance matrix");
  distance_cmd->add_option("--input", dis.input, "Sample file")->required();
  distance_cmd->add_option("--out", dis.output, "CSV matrix to write")->required();
  add_common(distance_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    validate(common);
    if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
    if (import_cmd->parsed()) return cmd_import(imp, common, out);
    if (cluster_cmd->parsed()) return cmd_cluster(cl, common, out);
    if (select_cmd->parsed()) return cmd_select_k(sel, common, out);
    if (replicate_cmd->parsed()) return cmd_replicate(rep, common, *replicate_cmd, out);
    if (summarize_cmd->parsed()) return cmd_summarize(sum, common, out);
    if (distance_cmd->parsed()) return cmd_distance(dis, common, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace elastic::cli
