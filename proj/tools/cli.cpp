#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "manifest.hpp"
#include "tempograph/csv_io.hpp"
#include "tempograph/link_prediction.hpp"
#include "tempograph/model_io.hpp"
#include "tempograph/parallel.hpp"
#include "tempograph/recurrence.hpp"
#include "tempograph/sampling.hpp"
#include "tempograph/session_fit.hpp"
#include "tempograph/synthetic.hpp"

namespace tempograph::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kModule = "cli";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Finite numbers as JSON numbers, everything else as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out += suffix;
  return out;
}

EventStream read_events(const fs::path& path, std::optional<std::int64_t> num_nodes = std::nullopt) {
  CsvSchema schema;
  schema.remap_ids = false;
  schema.num_nodes = num_nodes;
  return ingest_csv(path, schema).stream;
}

std::string events_csv(const EventStream& s) {
  std::ostringstream out;
  write_events_csv(out, s);
  return out.str();
}

enum class Toggle { Auto, On, Off };

const std::map<std::string, Toggle> kToggleNames = {{"auto", Toggle::Auto}, {"on", Toggle::On}, {"off", Toggle::Off}};

std::vector<std::int8_t> resolve_classes(Toggle mode, std::span<const Event> events, std::int64_t num_nodes) {
  if (mode == Toggle::Off) return {};
  auto classes = infer_bipartite_classes(events, num_nodes);
  if (!classes) {
    if (mode == Toggle::On) {
      throw Error(ErrorCode::InvalidArgument, kModule, "--bipartite on, but sources and destinations overlap");
    }
    return {};
  }
  return *classes;
}

/// The three parts of a split as written by `split`, with edge ids made
/// unique across parts (train, then valid, then test).
struct LoadedSplit {
  fs::path manifest_path;
  json manifest;
  std::int64_t num_nodes = 0;
  std::vector<Event> train, valid, test;
  std::vector<std::uint8_t> test_inductive;
  std::vector<NodeId> unseen;
  Eigen::MatrixXd edge_feat;
  std::vector<fs::path> files;

  std::vector<Event> all() const {
    std::vector<Event> ev = train;
    ev.insert(ev.end(), valid.begin(), valid.end());
    ev.insert(ev.end(), test.begin(), test.end());
    sort_chronologically(ev);
    return ev;
  }
  EventStream stream(std::vector<Event> events) const {
    EventStream s;
    s.num_nodes = num_nodes;
    s.events = std::move(events);
    s.edge_feat = edge_feat;
    return s;
  }
};

LoadedSplit load_split(const fs::path& path) {
  LoadedSplit sp;
  sp.manifest_path = path;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, kModule, "cannot open " + path.string());
  try {
    sp.manifest = json::parse(in);
    sp.num_nodes = sp.manifest.at("num_nodes").get<std::int64_t>();
    sp.unseen = sp.manifest.at("unseen_nodes").get<std::vector<NodeId>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, kModule, "split manifest " + path.string() + ": " + e.what());
  }
  const fs::path dir = path.parent_path();
  std::vector<Event>* parts[] = {&sp.train, &sp.valid, &sp.test};
  const char* names[] = {"train", "valid", "test"};
  std::vector<Eigen::MatrixXd> feats;
  EdgeId offset = 0;
  for (int i = 0; i < 3; ++i) {
    fs::path file;
    try {
      file = dir / sp.manifest.at("files").at(names[i]).get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedInput, kModule, "split manifest lacks the " + std::string(names[i]) + " file");
    }
    auto s = read_events(file, sp.num_nodes);
    for (auto& e : s.events) e.edge_id += offset;
    offset += static_cast<EdgeId>(s.events.size());
    *parts[i] = std::move(s.events);
    feats.push_back(std::move(s.edge_feat));
    sp.files.push_back(file);
  }
  const auto d_e = feats[0].cols();
  if (d_e > 0) {
    sp.edge_feat.resize(offset, d_e);
    Eigen::Index row = 0;
    for (const auto& f : feats) {
      if (f.cols() != d_e) throw Error(ErrorCode::FeatureDimension, kModule, "split parts disagree on feature width");
      sp.edge_feat.middleRows(row, f.rows()) = f;
      row += f.rows();
    }
  }
  sp.test_inductive.assign(sp.test.size(), 0);
  if (sp.manifest.contains("test_inductive_rows")) {
    for (auto r : sp.manifest["test_inductive_rows"].get<std::vector<std::int64_t>>()) {
      if (r < 0 || r >= static_cast<std::int64_t>(sp.test.size())) {
        throw Error(ErrorCode::MalformedInput, kModule, "inductive row index out of range");
      }
      sp.test_inductive[static_cast<std::size_t>(r)] = 1;
    }
  }
  return sp;
}

/// Shared per-invocation state: the subcommand's CLI11 handle, the manifest
/// being built and the pending outputs.
struct Invocation {
  CLI::App* app = nullptr;
  RunManifest manifest;
  OutputSet outputs;
  Clock::time_point start = Clock::now();
  std::ostream* out = nullptr;

  /// Explicit seed, or a drawn one that is recorded in the manifest.
  std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t value) {
    if (opt->count() == 0) {
      std::random_device rd;
      value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      manifest.seed_auto_drawn = true;
      spdlog::info("no --seed given; drew {}", value);
    }
    manifest.seed = value;
    return value;
  }

  void finish(const fs::path& manifest_path) {
    for (const auto* opt : app->get_options()) {
      const auto& names = opt->get_lnames();
      if (names.empty() || names.front() == "help") continue;
      std::string value;
      if (opt->count() > 0) {
        const auto& res = opt->results();
        for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
      } else {
        value = opt->get_default_str();
        if (value.empty() && opt->get_expected_max() == 0) value = "false";
      }
      manifest.flags[names.front()] = value;
    }
    manifest.subcommand = app->get_name();
    manifest.outputs = outputs.paths();
    manifest.duration_seconds = seconds_since(start);
    outputs.add(manifest_path, dump(manifest.to_json()));
    outputs.commit();
  }
};

// ---------------------------------------------------------------------------

struct IngestCmd {
  std::string in, out, remap;
  int src_col = 0, dst_col = 1, t_col = 2;
  bool no_header = false, keep_ids = false, no_features = false;
  std::string delimiter = ",";
  std::int64_t truncate = -1;

  void add(CLI::App& app) {
    app.add_option("--in", in, "raw edge-list CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "normalised event CSV")->required();
    app.add_option("--remap", remap, "node id table (default: <out>.remap.csv)");
    app.add_option("--src-col", src_col, "source column");
    app.add_option("--dst-col", dst_col, "destination column");
    app.add_option("--t-col", t_col, "timestamp column");
    app.add_option("--delimiter", delimiter, "field separator");
    app.add_flag("--no-header", no_header, "first row is data");
    app.add_flag("--keep-ids", keep_ids, "ids are already dense non-negative integers");
    app.add_flag("--no-features", no_features, "ignore extra columns");
    app.add_option("--truncate", truncate, "keep only the latest K events");
  }

  void run(Invocation& inv) {
    if (delimiter.size() != 1) throw Error(ErrorCode::InvalidArgument, kModule, "--delimiter must be one character");
    CsvSchema schema;
    schema.src_col = src_col;
    schema.dst_col = dst_col;
    schema.t_col = t_col;
    schema.has_header = !no_header;
    schema.remap_ids = !keep_ids;
    schema.features_from_rest = !no_features;
    schema.delimiter = delimiter.front();
    inv.manifest.add_input(in);
    auto result = ingest_csv(in, schema);
    if (truncate >= 0) result.stream.events = truncate_last(result.stream.events, truncate);
    const auto g = build_tcsr(result.stream);
    const auto st = stats(g);

    inv.outputs.add(out, events_csv(result.stream));
    std::ostringstream remap_csv;
    write_remap_csv(remap_csv, result.original_ids);
    inv.outputs.add(remap.empty() ? with_suffix(out, ".remap.csv") : fs::path(remap), remap_csv.str());
    inv.finish(with_suffix(out, ".manifest.json"));
    *inv.out << "ingested " << st.num_edges << " events over " << st.num_nodes << " nodes (d_e=" << st.d_e
             << ") -> " << out << "\n";
  }
};

struct StatsCmd {
  std::string in, out;
  std::int64_t num_nodes = 0;

  void add(CLI::App& app) {
    app.add_option("--in", in, "event CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "stats JSON (default: <in>.stats.json)");
    app.add_option("--num-nodes", num_nodes, "node count (default: max id + 1)");
  }

  void run(Invocation& inv) {
    inv.manifest.add_input(in);
    const auto stream = read_events(in, num_nodes > 0 ? std::optional(num_nodes) : std::nullopt);
    const auto g = build_tcsr(stream);
    const auto st = stats(g);
    json j;
    j["num_nodes"] = st.num_nodes;
    j["num_edges"] = st.num_edges;
    j["d_v"] = st.d_v;
    j["d_e"] = st.d_e;
    j["avg_degree"] = st.avg_degree;
    j["max_t"] = st.max_t;
    j["bipartite"] = infer_bipartite_classes(stream.events, stream.num_nodes).has_value();
    const fs::path path = out.empty() ? with_suffix(in, ".stats.json") : fs::path(out);
    inv.outputs.add(path, dump(j));
    inv.finish(with_suffix(path, ".manifest.json"));
    *inv.out << j.dump(2) << "\n";
  }
};

struct AnalyzeCmd {
  std::string in, out, report, heatmap;
  std::int64_t bins = 100, clip_degree = -1, session_bins = 50;
  unsigned workers = 0;

  void add(CLI::App& app) {
    app.add_option("--in", in, "event CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--bins", bins, "time bins B");
    app.add_option("--clip-degree", clip_degree, "scan at most this many outgoing events per node");
    app.add_option("--out", out, "matrix CSV (default: <in>.matrix.csv)");
    app.add_option("--report", report, "report JSON (default: <in>.analysis.json)");
    app.add_option("--heatmap", heatmap, "heatmap PGM");
    app.add_option("--session-bins", session_bins, "histogram bins for the session gap fit");
    app.add_option("--workers", workers, "threads (0 = all cores)");
  }

  void run(Invocation& inv) {
    inv.manifest.add_input(in);
    const auto g = build_tcsr(read_events(in));
    RecurrenceOptions opt;
    opt.bins = bins;
    opt.workers = workers;
    if (clip_degree >= 0) opt.clip_degree = clip_degree;
    const auto m = recurrence_matrix(g, opt);

    json j;
    j["bins"] = bins;
    j["t_min"] = m.t_min;
    j["t_max"] = m.t_max;
    j["total"] = m.total();
    j["candidate_pairs"] = m.candidate_pairs;
    j["recurrence_density"] = m.density();
    const auto rr = recurrence_profile(m);
    j["rr"] = rr;
    try {
      j["phi"] = temporal_recency_ratio(rr, bins);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData) throw;
      j["phi"] = nullptr;
      j["phi_error"] = e.what();
    }
    try {
      const auto fit = session_fit(g, session_bins);
      auto comp = [](const GaussianComponent& c) {
        return json{{"mean_log10", c.mean}, {"stddev_log10", c.stddev}, {"weight", c.weight}};
      };
      j["session_fit"] = {{"short_gap", comp(fit.short_gap)},
                          {"long_gap", comp(fit.long_gap)},
                          {"threshold", fit.threshold},
                          {"threshold_log10", fit.threshold_log10},
                          {"squared_error", fit.squared_error},
                          {"num_gaps", fit.num_gaps}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientData && e.code() != ErrorCode::SingleMode) throw;
      j["session_fit"] = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    }

    const fs::path matrix_path = out.empty() ? with_suffix(in, ".matrix.csv") : fs::path(out);
    std::ostringstream mcsv;
    write_matrix_csv(mcsv, m);
    inv.outputs.add(matrix_path, mcsv.str());
    j["matrix"] = matrix_path.string();
    if (!heatmap.empty()) {
      std::ostringstream pgm;
      write_heatmap_pgm(pgm, m);
      inv.outputs.add(heatmap, pgm.str());
      j["heatmap"] = heatmap;
    } else {
      j["heatmap"] = nullptr;
    }
    const fs::path path = report.empty() ? with_suffix(in, ".analysis.json") : fs::path(report);
    inv.outputs.add(path, dump(j));
    inv.finish(with_suffix(path, ".manifest.json"));
    *inv.out << "phi=" << (j["phi"].is_null() ? std::string("undefined") : j["phi"].dump())
             << " recurrence_density=" << m.density() << " -> " << path.string() << "\n";
  }
};

void add_synth_options(CLI::App& app, SynthConfig& cfg) {
  app.add_option("--n", cfg.num_nodes, "node count");
  app.add_option("--e", cfg.num_edges, "event count");
  app.add_option("--t", cfg.timesteps, "timesteps");
  app.add_option("--mu", cfg.mu, "mean activity");
  app.add_option("--sigma", cfg.sigma, "activity spread");
  app.add_option("--temperature", cfg.temperature, "decay time scale (0 = T/10)");
  app.add_option("--jitter", cfg.time_jitter, "timestamp jitter std-dev");
}

struct GenerateCmd {
  SynthConfig cfg;
  std::string out;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    add_synth_options(app, cfg);
    app.add_option("--alpha", cfg.alpha, "repeat decay base (near 1 = long-term)");
    app.add_option("--beta", cfg.beta, "repeat probability");
    app.add_option("--random-feat", cfg.random_feat_dim, "random edge feature dimension");
    app.add_flag("--debug-checks", cfg.debug_checks, "verify repeat probabilities at every draw");
    seed_opt = app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--out", out, "event CSV")->required();
  }

  void run(Invocation& inv) {
    cfg.seed = inv.resolve_seed(seed_opt, cfg.seed);
    const auto s = generate(cfg);
    inv.outputs.add(out, events_csv(s));
    inv.finish(with_suffix(out, ".manifest.json"));
    *inv.out << "generated " << s.events.size() << " events over " << cfg.num_nodes << " nodes -> " << out << "\n";
  }
};

struct SweepCmd {
  SynthConfig cfg;
  std::vector<double> alphas{0.6, 0.7, 0.8, 0.9};
  std::vector<double> betas{0.5};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::int64_t bins = 100;
  unsigned workers = 0;
  std::string out;

  void add(CLI::App& app) {
    add_synth_options(app, cfg);
    app.add_option("--alphas", alphas, "alpha grid")->delimiter(',');
    app.add_option("--betas", betas, "beta grid")->delimiter(',');
    app.add_option("--seeds", seeds, "seeds")->delimiter(',');
    app.add_option("--bins", bins, "time bins B");
    app.add_option("--workers", workers, "threads (0 = all cores)");
    app.add_option("--out", out, "sweep CSV")->required();
  }

  void run(Invocation& inv) {
    SweepOptions opt;
    opt.bins = bins;
    opt.workers = workers;
    const auto rows = sweep(cfg, alphas, betas, seeds, opt);
    std::ostringstream csv;
    csv << "alpha,beta,seed,phi,recurrence_density\n";
    for (const auto& r : rows) {
      csv << format_double(r.alpha) << ',' << format_double(r.beta) << ',' << r.seed << ','
          << (std::isnan(r.phi) ? std::string("nan") : format_double(r.phi)) << ','
          << format_double(r.recurrence_density) << '\n';
    }
    inv.outputs.add(out, csv.str());
    inv.finish(with_suffix(out, ".manifest.json"));
    for (double a : alphas) {
      for (double b : betas) {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows) {
          if (r.alpha == a && r.beta == b && !std::isnan(r.phi)) {
            sum += r.phi;
            ++count;
          }
        }
        *inv.out << "alpha=" << a << " beta=" << b << " mean_phi=" << (count ? sum / count : NAN) << "\n";
      }
    }
  }
};

struct SplitCmd {
  std::string in, out_dir;
  std::int64_t num_nodes = 0;
  SplitSpec spec;
  bool inductive = false;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--in", in, "event CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--out-dir", out_dir, "directory for train/valid/test CSVs and split.json")->required();
    app.add_option("--num-nodes", num_nodes, "node count (default: max id + 1)");
    app.add_option("--train", spec.train_frac, "train fraction");
    app.add_option("--valid", spec.valid_frac, "validation fraction");
    app.add_option("--test", spec.test_frac, "test fraction");
    app.add_flag("--inductive", inductive, "withhold a share of test nodes from training");
    app.add_option("--mask-frac", spec.inductive_mask_frac, "share of test nodes withheld");
    seed_opt = app.add_option("--seed", spec.seed, "RNG seed for the inductive mask");
  }

  void run(Invocation& inv) {
    spec.seed = inv.resolve_seed(seed_opt, spec.seed);
    spec.mode = inductive ? SplitMode::Inductive : SplitMode::Transductive;
    inv.manifest.add_input(in);
    const auto stream = read_events(in, num_nodes > 0 ? std::optional(num_nodes) : std::nullopt);
    build_tcsr(stream);  // validates ids and features
    const auto r = split(stream.events, spec);

    const fs::path dir(out_dir);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, kModule, "output directory does not exist: " + out_dir);
    auto part = [&](const std::vector<Event>& events) {
      EventStream s = stream;
      s.events = events;
      return events_csv(s);
    };
    inv.outputs.add(dir / "train.csv", part(r.train));
    inv.outputs.add(dir / "valid.csv", part(r.valid));
    inv.outputs.add(dir / "test.csv", part(r.test));
    std::vector<std::int64_t> flagged;
    for (std::size_t i = 0; i < r.test_inductive.size(); ++i) {
      if (r.test_inductive[i]) flagged.push_back(static_cast<std::int64_t>(i));
    }
    json j;
    j["source"] = in;
    j["source_sha256"] = inv.manifest.input_sha256.at(in);
    j["num_nodes"] = stream.num_nodes;
    j["mode"] = inductive ? "inductive" : "transductive";
    j["seed"] = spec.seed;
    j["fractions"] = {spec.train_frac, spec.valid_frac, spec.test_frac};
    j["files"] = {{"train", "train.csv"}, {"valid", "valid.csv"}, {"test", "test.csv"}};
    j["counts"] = {{"train", r.train.size()}, {"valid", r.valid.size()}, {"test", r.test.size()}};
    j["boundaries"] = {r.train_end, r.valid_end};
    j["unseen_nodes"] = r.unseen_nodes;
    j["test_inductive_rows"] = flagged;
    inv.outputs.add(dir / "split.json", dump(j));
    inv.finish(dir / "split.manifest.json");
    *inv.out << "split " << stream.events.size() << " events: train " << r.train.size() << ", valid "
             << r.valid.size() << ", test " << r.test.size();
    if (inductive) *inv.out << " (" << r.unseen_nodes.size() << " unseen nodes, " << flagged.size() << " inductive test edges)";
    *inv.out << " -> " << (dir / "split.json").string() << "\n";
  }
};

struct SampleBenchCmd {
  std::string in, out, strategy = "mr";
  std::int64_t k = 10, k2 = 0, layers = 1, queries = 10000;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--in", in, "event CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--strategy", strategy, "mr or uniform")->check(CLI::IsMember({"mr", "uniform"}));
    app.add_option("--k", k, "neighbors per query");
    app.add_option("--k2", k2, "second-layer budget (default: k)");
    app.add_option("--layers", layers, "1 or 2")->check(CLI::Range(1, 2));
    app.add_option("--queries", queries, "query count (latest events, by source and time)");
    app.add_option("--workers", workers, "threads (0 = all cores)");
    seed_opt = app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out, "sampled ids CSV (default: <in>.samples.csv)");
  }

  void run(Invocation& inv) {
    seed = inv.resolve_seed(seed_opt, seed);
    inv.manifest.add_input(in);
    const auto stream = read_events(in);
    const auto g = build_tcsr(stream);
    const auto take = std::min<std::int64_t>(queries, static_cast<std::int64_t>(stream.events.size()));
    std::vector<SampleQuery> qs;
    for (auto i = static_cast<std::int64_t>(stream.events.size()) - take; i < static_cast<std::int64_t>(stream.events.size()); ++i) {
      const auto& e = stream.events[static_cast<std::size_t>(i)];
      qs.push_back({e.src, e.t});
    }
    const auto strat = strategy == "mr" ? SamplingStrategy::MostRecent : SamplingStrategy::Uniform;
    const auto start = Clock::now();
    LayeredSample res;
    if (layers == 2) {
      res = sample_two_layer(g, qs, k, k2 > 0 ? k2 : k, strat, seed, workers);
    } else {
      res.layer1 = sample(g, qs, k, strat, seed, workers);
    }
    const double elapsed = seconds_since(start);

    std::ostringstream csv;
    csv << "query,layer,parent_slot,slot,node,time,edge_id\n";
    auto emit = [&](const SampledNeighbors& s, int layer, std::int64_t per_query) {
      for (Eigen::Index r = 0; r < s.num_queries(); ++r) {
        for (Eigen::Index c = 0; c < s.budget(); ++c) {
          if (!s.valid(r, c)) continue;
          csv << r / per_query << ',' << layer << ',' << (layer == 1 ? -1 : r % per_query) << ',' << c << ','
              << s.nodes(r, c) << ',' << format_double(s.times(r, c)) << ',' << s.edge_ids(r, c) << '\n';
        }
      }
    };
    emit(res.layer1, 1, 1);
    if (layers == 2) emit(res.layer2, 2, k);
    const fs::path path = out.empty() ? with_suffix(in, ".samples.csv") : fs::path(out);
    inv.outputs.add(path, csv.str());
    inv.finish(with_suffix(path, ".manifest.json"));
    *inv.out << "sampled " << qs.size() << " queries in " << elapsed << " s ("
             << (elapsed > 0 ? static_cast<double>(qs.size()) / elapsed : 0.0) << " queries/s) -> " << path.string()
             << "\n";
  }
};

TimeEncoder<double> make_encoder(std::int64_t dim, double alpha, double beta) {
  const double d = std::sqrt(static_cast<double>(dim));
  return TimeEncoder<double>(dim, alpha > 0.0 ? alpha : d, beta > 0.0 ? beta : d);
}

struct TrainCmd {
  std::string split_path, model = "emb", out, report, bipartite = "auto";
  TrainConfig cfg;
  std::int64_t time_dim = 100;
  double alpha_enc = 0.0, beta_enc = 0.0, lambda = 0.01;
  unsigned workers = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--split", split_path, "split.json written by `split`")->required()->check(CLI::ExistingFile);
    app.add_option("--model", model, "emb or recency")->check(CLI::IsMember({"emb", "recency"}));
    app.add_option("--out", out, "model file")->required();
    app.add_option("--report", report, "training report JSON (loss curve, mailbox timing)");
    app.add_option("--lr", cfg.lr, "learning rate of the node table");
    app.add_option("--time-lr", cfg.time_lr, "learning rate of the time weights");
    app.add_option("--epochs", cfg.epochs, "epochs");
    app.add_option("--weight-decay", cfg.weight_decay, "L2 penalty");
    app.add_option("--batch-size", cfg.batch_size, "training batch size");
    app.add_option("--dim", cfg.d_mem, "memory dimension");
    app.add_option("--init-scale", cfg.init_scale, "std-dev of the initial table");
    app.add_option("--time-dim", time_dim, "time encoding dimension");
    app.add_option("--alpha-enc", alpha_enc, "time encoding base (0 = sqrt(time-dim))");
    app.add_option("--beta-enc", beta_enc, "time encoding exponent scale (0 = sqrt(time-dim))");
    app.add_option("--lambda", lambda, "decay rate of the recency heuristic");
    app.add_option("--bipartite", bipartite, "bipartite-aware negatives")->check(CLI::IsMember({"auto", "on", "off"}));
    app.add_option("--workers", workers, "threads for the mailbox timing (0 = all cores)");
    seed_opt = app.add_option("--seed", cfg.seed, "RNG seed");
  }

  void run(Invocation& inv) {
    cfg.seed = inv.resolve_seed(seed_opt, cfg.seed);
    const auto sp = load_split(split_path);
    inv.manifest.add_input(split_path);
    for (const auto& f : sp.files) inv.manifest.add_input(f);

    ModelFile file;
    file.num_nodes = sp.num_nodes;
    json rep;
    if (model == "recency") {
      if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, kModule, "--lambda must be non-negative");
      file.kind = ModelKind::Recency;
      file.lambda = lambda;
      rep["model"] = "recency";
    } else {
      const auto classes = resolve_classes(kToggleNames.at(bipartite), sp.all(), sp.num_nodes);
      const NegativePool pool(sp.num_nodes, classes, true);
      const auto history = build_tcsr(sp.stream(sp.train));
      const auto encoder = make_encoder(time_dim, alpha_enc, beta_enc);
      const auto start = Clock::now();
      auto result = train_embedding_memory(history, sp.train, pool, encoder, cfg);
      const double train_seconds = seconds_since(start);
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        spdlog::info("epoch {} mean loss {:.6f}", e, result.epoch_loss[e]);
      }
      rep["model"] = "emb";
      rep["epoch_loss"] = result.epoch_loss;
      rep["train_seconds"] = train_seconds;
      rep["mailbox"] = mailbox_timing(sp, result.memory);
      file.kind = ModelKind::Embedding;
      file.memory = std::move(result.memory);
      *inv.out << "trained " << cfg.epochs << " epochs in " << train_seconds << " s; loss "
               << (result.epoch_loss.empty() ? NAN : result.epoch_loss.front()) << " -> "
               << (result.epoch_loss.empty() ? NAN : result.epoch_loss.back()) << "\n";
      const auto& mb = rep["mailbox"];
      *inv.out << "mailbox reduction per batch: segmented " << mb["segmented_ms"].get<double>() << " ms, linear probe "
               << mb["linear_probe_ms"].get<double>() << " ms (x" << mb["speedup"].get<double>() << ")\n";
    }
    std::ostringstream bin;
    save_model(bin, file);
    inv.outputs.add(out, bin.str());
    if (!report.empty()) inv.outputs.add(report, dump(rep));
    inv.finish(with_suffix(out, ".manifest.json"));
    *inv.out << "model -> " << out << "\n";
  }

  /// Streams the training events through the mailbox with the trained table
  /// as memory and times the per-batch last-message reduction against the
  /// linear-probe reference.
  json mailbox_timing(const LoadedSplit& sp, const EmbeddingMemory& mem) const {
    const auto d_e = sp.edge_feat.cols();
    Mailbox box(sp.num_nodes, 2 * mem.dim() + mem.encoder.dim() + d_e);
    const auto plan = plan_batches(static_cast<std::int64_t>(sp.train.size()), cfg.batch_size);
    double segmented = 0.0, probe = 0.0;
    for (std::int64_t b = 0; b < plan.num_batches(); ++b) {
      const std::span<const Event> batch(sp.train.data() + plan.begin(b), static_cast<std::size_t>(plan.size(b)));
      const auto msgs = build_messages(batch, mem.table, box.last_update(), mem.encoder, sp.edge_feat, d_e, workers);
      auto t0 = Clock::now();
      const auto fast = reduce_last_per_node(msgs.recipient, msgs.time, workers);
      segmented += seconds_since(t0);
      t0 = Clock::now();
      const auto slow = reduce_last_linear_probe(msgs.recipient, msgs.time);
      probe += seconds_since(t0);
      if (!(fast == slow)) throw Error(ErrorCode::InvalidArgument, kModule, "reduction mismatch against linear probe");
      step_mailbox(box, batch, msgs, workers);
    }
    const double n = std::max<std::int64_t>(1, plan.num_batches());
    return {{"batches", plan.num_batches()},
            {"segmented_ms", 1e3 * segmented / n},
            {"linear_probe_ms", 1e3 * probe / n},
            {"speedup", segmented > 0.0 ? probe / segmented : 0.0}};
  }
};

struct EvalCmd {
  std::string split_path, model_path, scores_in, out, mrr_out, part = "test", bipartite = "auto", two_hop = "auto";
  std::int64_t negatives = 0, batch_size = kEvalBatchSize;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App& app) {
    app.add_option("--split", split_path, "split.json written by `split`")->check(CLI::ExistingFile);
    app.add_option("--model", model_path, "model file written by `train`")->check(CLI::ExistingFile);
    app.add_option("--scores", scores_in, "score an existing scores CSV instead")->check(CLI::ExistingFile);
    app.add_option("--part", part, "valid or test")->check(CLI::IsMember({"valid", "test"}));
    app.add_option("--out", out, "scores CSV");
    app.add_option("--mrr-out", mrr_out, "MRR JSON (default: <scores>.mrr.json)");
    app.add_option("--negatives", negatives, "negatives per positive (default: 9 valid, 49 test)");
    app.add_option("--batch-size", batch_size, "evaluation batch size");
    app.add_option("--bipartite", bipartite, "bipartite-aware negatives")->check(CLI::IsMember({"auto", "on", "off"}));
    app.add_option("--two-hop", two_hop, "2-hop mails for unseen nodes")->check(CLI::IsMember({"auto", "on", "off"}));
    seed_opt = app.add_option("--seed", seed, "RNG seed for negatives");
  }

  void run(Invocation& inv) {
    if (!scores_in.empty()) {
      if (!split_path.empty() || !model_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, kModule, "--scores cannot be combined with --split/--model");
      }
      run_scores(inv);
      return;
    }
    if (split_path.empty() || model_path.empty() || out.empty()) {
      throw Error(ErrorCode::InvalidArgument, kModule, "eval needs --split, --model and --out (or --scores)");
    }
    seed = inv.resolve_seed(seed_opt, seed);
    const auto sp = load_split(split_path);
    inv.manifest.add_input(split_path);
    for (const auto& f : sp.files) inv.manifest.add_input(f);
    inv.manifest.add_input(model_path);
    const auto model = load_model(fs::path(model_path));
    if (model.num_nodes != sp.num_nodes) {
      throw Error(ErrorCode::InvalidArgument, kModule, "model and split disagree on the node count");
    }

    const auto all = sp.all();
    const auto classes = resolve_classes(kToggleNames.at(bipartite), all, sp.num_nodes);
    const NegativePool pool(sp.num_nodes, classes, true);
    const auto history = build_tcsr(sp.stream(all));
    NegativeSpec ns;
    const bool on_test = part == "test";
    const std::int64_t ratio = negatives > 0 ? negatives : ns.ratio(on_test ? SplitPart::Test : SplitPart::Valid);
    const auto& events = on_test ? sp.test : sp.valid;

    std::unique_ptr<LinkScorer> scorer;
    std::int64_t initialised = -1;
    EmbeddingScorer* emb = nullptr;
    if (model.kind == ModelKind::Recency) {
      scorer = std::make_unique<RecencyScorer>(history, model.lambda);
    } else {
      const Toggle hop = kToggleNames.at(two_hop);
      const bool use_two_hop = hop == Toggle::On || (hop == Toggle::Auto && !classes.empty());
      auto e = std::make_unique<EmbeddingScorer>(model.memory, history, sp.unseen, use_two_hop);
      emb = e.get();
      if (on_test) {
        const auto plan = plan_batches(static_cast<std::int64_t>(sp.valid.size()), batch_size);
        for (std::int64_t b = 0; b < plan.num_batches(); ++b) {
          e->observe(std::span<const Event>(sp.valid.data() + plan.begin(b), static_cast<std::size_t>(plan.size(b))));
        }
      }
      scorer = std::move(e);
    }
    const auto result = evaluate_link_prediction(*scorer, events, pool, ratio, seed, batch_size);
    if (emb) initialised = emb->initialised_count();

    json j = summary(result.rankings, ratio);
    if (on_test && std::any_of(sp.test_inductive.begin(), sp.test_inductive.end(), [](auto f) { return f != 0; })) {
      std::vector<RankingBatch> ind;
      for (std::size_t i = 0; i < result.rankings.size(); ++i) {
        if (sp.test_inductive[i]) ind.push_back(result.rankings[i]);
      }
      j["inductive_mrr"] = mrr(ind);
      j["inductive_positives"] = ind.size();
    }
    if (initialised >= 0) j["unseen_initialised"] = initialised;
    j["part"] = part;
    j["model"] = model.kind == ModelKind::Recency ? "recency" : "emb";

    std::ostringstream csv;
    write_scores_csv(csv, result.rows);
    inv.outputs.add(out, csv.str());
    const fs::path mrr_path = mrr_out.empty() ? with_suffix(out, ".mrr.json") : fs::path(mrr_out);
    inv.outputs.add(mrr_path, dump(j));
    inv.finish(with_suffix(out, ".manifest.json"));
    *inv.out << j.dump() << "\n";
  }

  static json summary(const std::vector<RankingBatch>& rankings, std::int64_t ratio) {
    json j;
    j["mrr"] = mrr(rankings);
    j["num_positives"] = rankings.size();
    j["negatives_per_positive"] = ratio;
    j["random_mrr"] = number(ratio > 0 ? random_mrr(ratio) : NAN);
    return j;
  }

  void run_scores(Invocation& inv) {
    std::ifstream in(scores_in);
    if (!in) throw Error(ErrorCode::Io, kModule, "cannot open " + scores_in);
    inv.manifest.add_input(scores_in);
    const auto batches = read_scores_csv(in);
    if (batches.empty()) throw Error(ErrorCode::EmptySplit, kModule, "scores file has no rows");
    std::int64_t ratio = static_cast<std::int64_t>(batches.front().negatives.size());
    for (const auto& b : batches) {
      if (static_cast<std::int64_t>(b.negatives.size()) != ratio) ratio = -1;
    }
    json j = summary(batches, ratio);
    if (ratio < 0) j["negatives_per_positive"] = nullptr;
    const fs::path path = mrr_out.empty() ? with_suffix(scores_in, ".mrr.json") : fs::path(mrr_out);
    inv.outputs.add(path, dump(j));
    inv.finish(with_suffix(path, ".manifest.json"));
    *inv.out << j.dump() << "\n";
  }
};

void emit_error(std::ostream& err, std::string_view code, std::string_view module, std::string_view message,
                std::string_view subcommand) {
  json j;
  j["error"] = {{"code", code}, {"module", module}, {"message", message}, {"subcommand", subcommand}};
  err << j.dump() << "\n";
}

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("tempograph", sink);
  logger->set_pattern("[%l] %v");
  const char* env = std::getenv("TEMPOGRAPH_LOG");
  logger->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  configure_logging(err);
  CLI::App app{"Temporal graph analysis, synthetic generation and link prediction baselines", "tempograph"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "TOML-style config file (flags take precedence)");
  app.set_version_flag("--version", TEMPOGRAPH_VERSION);
  app.require_subcommand(1);

  IngestCmd ingest;
  StatsCmd stats_cmd;
  AnalyzeCmd analyze;
  GenerateCmd gen;
  SweepCmd sweep_cmd;
  SplitCmd split_cmd;
  SampleBenchCmd bench;
  TrainCmd train;
  EvalCmd eval;

  std::map<CLI::App*, std::function<void(Invocation&)>> runners;
  auto reg = [&](const char* name, const char* help, auto& cmd) {
    auto* sub = app.add_subcommand(name, help);
    cmd.add(*sub);
    runners[sub] = [&cmd](Invocation& inv) { cmd.run(inv); };
  };
  reg("ingest", "normalise a raw edge-list CSV", ingest);
  reg("stats", "graph statistics as JSON", stats_cmd);
  reg("analyze", "recurrence matrix, recency ratio and session gap fit", analyze);
  reg("generate", "synthetic temporal graph with controlled repetition", gen);
  reg("sweep", "recency ratio over an (alpha, beta, seed) grid", sweep_cmd);
  reg("split", "chronological train/valid/test split", split_cmd);
  reg("sample-bench", "temporal neighbor sampling benchmark", bench);
  reg("train", "train a link prediction baseline", train);
  reg("eval", "score a split with a trained model, or score a scores CSV", eval);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, to_string(ErrorCode::InvalidArgument), kModule, e.what(), "");
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Invocation inv;
  inv.app = sub;
  inv.out = &out;
  try {
    runners.at(sub)(inv);
  } catch (const Error& e) {
    emit_error(err, to_string(e.code()), e.module(), e.what(), sub->get_name());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, "internal", kModule, e.what(), sub->get_name());
    return 1;
  }
  return 0;
}

}  // namespace tempograph::cli
