// Command-line front end: data prep, fitting, Rashomon forests, analysis,
// benchmarks and synthetic data. Results go to stdout as TSV, logs to
// stderr, artifacts to disk.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "splitopt/analysis.hpp"
#include "splitopt/binarize.hpp"
#include "splitopt/dataset.hpp"
#include "splitopt/errors.hpp"
#include "splitopt/greedy.hpp"
#include "splitopt/rashomon.hpp"
#include "splitopt/solver.hpp"
#include "splitopt/split.hpp"
#include "splitopt/synthetic.hpp"
#include "splitopt/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace splitopt;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kTimeout = 3,
  kBudget = 4,
  kIndex = 5,
  kMismatch = 6,
};

class FingerprintMismatch : public Error {
 public:
  FingerprintMismatch(const std::string& where, const std::string& expected, const std::string& actual)
      : Error(where + " was built from dataset " + expected + " but the training data is " + actual) {}
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

void write_json_file(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw MissingFile(path.string());
  out << doc.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string(), e.what());
  }
}

int effective_threads(int flag) {
  if (const char* env = std::getenv("SPLIT_OPT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring SPLIT_OPT_THREADS=" << env << "\n";
  }
  return flag;
}

struct RunRecord {
  std::string command;
  json config = json::object();
  std::string fingerprint;
  std::uint64_t seed = 0;
  std::vector<std::string> artifacts;
};

void write_run_manifest(const fs::path& dir, const RunRecord& run, double wall_time) {
  json doc;
  doc["command"] = run.command;
  doc["config"] = run.config;
  doc["dataset_fingerprint"] = run.fingerprint;
  doc["seed"] = run.seed;
  doc["wall_time"] = wall_time;
  doc["artifacts"] = run.artifacts;
  doc["version"] = kVersion;
  write_json_file(dir / "run_manifest.json", doc);
}

BinaryDataset load_binary(const fs::path& path, const std::optional<std::string>& label) {
  try {
    return BinaryDataset::from_raw_binary(load_csv(path, label));
  } catch (const ParseError&) {
    std::cerr << "while reading " << path.string() << '\n';
    throw;
  }
}

// Rows of one class dropped at random until both classes have equal counts.
std::vector<std::size_t> balanced_rows(const RawDataset& raw, CounterRng& rng) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t r = 0; r < raw.n(); ++r) by_class[raw.labels[r]].push_back(r);
  auto& big = by_class[0].size() > by_class[1].size() ? by_class[0] : by_class[1];
  const std::size_t keep = std::min(by_class[0].size(), by_class[1].size());
  for (std::size_t i = 0; i < keep; ++i) std::swap(big[i], big[i + rng.below(big.size() - i)]);
  big.resize(keep);
  std::vector<std::size_t> rows = by_class[0];
  rows.insert(rows.end(), by_class[1].begin(), by_class[1].end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

// ---- prep

struct PrepArgs {
  std::string input;
  std::optional<std::string> label;
  std::string binarize = "quantile:10";
  bool balance = false;
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_prep(const PrepArgs& a) {
  const auto start = Clock::now();
  if (!(a.ratio > 0.0 && a.ratio <= 1.0)) throw std::invalid_argument("--split must be in (0, 1]");
  const BinarizerSpec spec = BinarizerSpec::parse(a.binarize);
  const RawDataset raw = load_csv(a.input, a.label);
  CounterRng rng(a.seed);

  std::vector<std::size_t> rows(raw.n());
  std::iota(rows.begin(), rows.end(), 0);
  if (a.balance) rows = balanced_rows(raw, rng);
  std::vector<std::size_t> order = rows;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(a.ratio * static_cast<double>(order.size())));
  std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  if (train_rows.empty()) throw std::invalid_argument("the training split is empty");

  const RawDataset train_raw = raw.select_rows(train_rows);
  const Binarizer binarizer = Binarizer::fit(train_raw, spec);
  const BinaryDataset train = binarizer.transform(train_raw);

  const fs::path out(a.out);
  fs::create_directories(out);
  RawDataset train_table = train.to_raw();
  train_table.label_name = raw.label_name;
  write_csv(out / "train.bin.csv", train_table);
  std::size_t test_pos = 0;
  if (test_rows.empty()) {
    RawDataset header;
    header.column_names = train.feature_names();
    header.columns.assign(train.k(), {});
    header.label_name = raw.label_name;
    write_csv(out / "test.bin.csv", header);
  } else {
    const BinaryDataset test = binarizer.transform(raw.select_rows(test_rows));
    RawDataset test_table = test.to_raw();
    test_table.label_name = raw.label_name;
    write_csv(out / "test.bin.csv", test_table);
    test_pos = test.labels().count();
  }
  write_json_file(out / "binarizer.json", binarizer.to_json());

  std::cout << "split\trows\tfeatures\tpositives\n";
  std::cout << "train\t" << train.n() << '\t' << train.k() << '\t' << train.labels().count() << '\n';
  std::cout << "test\t" << test_rows.size() << '\t' << train.k() << '\t' << test_pos << '\n';

  RunRecord run{"prep", {}, train.fingerprint(), a.seed, {"train.bin.csv", "test.bin.csv", "binarizer.json"}};
  run.config = {{"input", a.input},
                {"label", a.label.value_or("")},
                {"binarize", spec.to_string()},
                {"balance", a.balance},
                {"split", a.ratio}};
  write_run_manifest(out, run, seconds_since(start));
  return kOk;
}

// ---- fit

struct FitArgs {
  std::string train;
  std::optional<std::string> label;
  std::string algo = "split";
  double lambda = 0.01;
  int depth = 5;
  int lookahead = 2;
  bool no_postprocess = false;
  std::optional<double> time_limit;
  int threads = 1;
  std::string out = ".";
};

struct Fitted {
  Tree tree = Tree::leaf(0);
  bool converged = true;
};

Fitted run_algorithm(const BinaryDataset& ds, const std::string& algo, double lambda, int depth, int lookahead,
                     bool postprocess, std::optional<double> time_limit, int threads) {
  if (algo == "greedy") {
    return {greedy_fit(ds, ds.full_support(), depth, lambda, static_cast<std::int64_t>(ds.n())).first, true};
  }
  if (algo == "optimal") {
    SolverConfig cfg;
    cfg.depth_budget = depth;
    cfg.lambda = lambda;
    cfg.time_limit = time_limit;
    cfg.policy = BoundsPolicy::Standard;
    const SolveResult r = solve(ds, cfg);
    return {r.tree, r.converged};
  }
  if (algo == "split") {
    FitRequest req;
    req.lambda = lambda;
    req.depth_budget = depth;
    req.lookahead_depth = lookahead;
    req.postprocess = postprocess;
    req.time_limit = time_limit;
    req.threads = threads;
    const FitResult r = split_fit(ds, req);
    return {r.tree, r.converged};
  }
  if (algo == "lickety") {
    const FitResult r = licketysplit_fit(ds, lambda, depth);
    return {r.tree, r.converged};
  }
  throw std::invalid_argument("unknown algorithm '" + algo + "'");
}

int cmd_fit(const FitArgs& a) {
  const auto start = Clock::now();
  const BinaryDataset ds = load_binary(a.train, a.label);
  const int threads = effective_threads(a.threads);
  const auto fit_start = Clock::now();
  const Fitted fitted =
      run_algorithm(ds, a.algo, a.lambda, a.depth, a.lookahead, !a.no_postprocess, a.time_limit, threads);
  const double wall = seconds_since(fit_start);

  Model m;
  m.tree = fitted.tree;
  m.algorithm = a.algo;
  m.lambda = a.lambda;
  m.depth_budget = a.depth;
  m.lookahead_depth = a.algo == "split" ? a.lookahead : (a.algo == "lickety" ? 1 : 0);
  m.objective = objective(fitted.tree, ds, a.lambda);
  m.feature_names = ds.feature_names();
  m.dataset_fingerprint = ds.fingerprint();
  json doc = model_to_json(m);
  doc["converged"] = fitted.converged;

  const fs::path out(a.out);
  fs::create_directories(out);
  write_json_file(out / "model.json", doc);

  std::cout << "algorithm\tobjective\tmisclassified\tleaves\tdepth\twall_time\n";
  std::cout << a.algo << '\t' << fmt(m.objective.value) << '\t' << m.objective.misclassified << '\t'
            << m.objective.leaves << '\t' << fitted.tree.depth() << '\t' << fmt(wall) << '\n';

  RunRecord run{"fit", {}, ds.fingerprint(), 0, {"model.json"}};
  run.config = {{"train", a.train},
                {"algo", a.algo},
                {"lambda", a.lambda},
                {"depth", a.depth},
                {"lookahead", a.lookahead},
                {"postprocess", !a.no_postprocess},
                {"time_limit", a.time_limit ? json(*a.time_limit) : json(nullptr)},
                {"threads", threads}};
  write_run_manifest(out, run, seconds_since(start));
  if (!fitted.converged) {
    std::cerr << "time limit reached before the search converged; model.json holds the best tree found\n";
    return kTimeout;
  }
  return kOk;
}

// ---- rashomon

struct RashomonArgs {
  std::string train;
  std::optional<std::string> label;
  double lambda = 0.02;
  double epsilon = 0.01;
  int depth = 5;
  int lookahead = 3;
  std::uint64_t max_trees = kDefaultMaxTrees;
  std::string out = "forest";
};

int cmd_rashomon(const RashomonArgs& a) {
  const auto start = Clock::now();
  const BinaryDataset ds = load_binary(a.train, a.label);
  RashomonConfig cfg;
  cfg.lambda = a.lambda;
  cfg.epsilon = a.epsilon;
  cfg.depth_budget = a.depth;
  cfg.lookahead_depth = a.lookahead;
  cfg.max_trees = a.max_trees;
  const PrefixForest forest = resplit(ds, cfg);
  const fs::path out(a.out);
  write_forest(forest, ds, out);

  const CostModel model(cfg.lambda, forest.n_global);
  std::cout << "t_count\t" << forest.t_count << '\n';
  std::cout << "prefix\tcount\tcumulative\tlookahead_objective\n";
  for (std::size_t i = 0; i < forest.prefixes.size(); ++i) {
    std::cout << i << '\t' << forest.prefixes[i].nodes.front().count << '\t' << forest.p_counts[i] << '\t'
              << fmt(model.objective(forest.prefixes[i].cost)) << '\n';
  }

  RunRecord run{"rashomon", {}, ds.fingerprint(), 0, {"manifest.json"}};
  for (std::size_t i = 0; i < forest.prefixes.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "prefix_%05zu.json", i);
    run.artifacts.emplace_back(name);
  }
  run.config = {{"train", a.train},      {"lambda", a.lambda},       {"epsilon", a.epsilon},
                {"depth", a.depth},      {"lookahead", a.lookahead}, {"max_trees", a.max_trees}};
  write_run_manifest(out, run, seconds_since(start));
  return kOk;
}

// ---- index

struct IndexArgs {
  std::string forest;
  std::optional<std::uint64_t> index;
  std::string range;
  bool count = false;
};

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw std::invalid_argument("--range expects a..b");
  try {
    return {std::stoull(text.substr(0, dots)), std::stoull(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw std::invalid_argument("--range expects a..b");
  }
}

int cmd_index(const IndexArgs& a) {
  const ForestReader reader(a.forest);
  if (a.count) {
    std::cout << reader.t_count() << '\n';
    return kOk;
  }
  std::uint64_t begin = 0;
  std::uint64_t end = 0;
  if (a.index) {
    begin = *a.index;
    end = begin + 1;
  } else if (!a.range.empty()) {
    std::tie(begin, end) = parse_range(a.range);
  } else {
    throw std::invalid_argument("give one of --i, --range or --count");
  }
  // Check the whole request before printing anything.
  if (end > begin && end - 1 >= reader.t_count()) throw IndexOutOfRange(end - 1, reader.t_count());
  for (std::uint64_t i = begin; i < end; ++i) {
    json line;
    line["index"] = i;
    line["tree"] = tree_to_json(reader.tree_at_index(i), &reader.feature_names());
    std::cout << line.dump() << '\n';
  }
  return kOk;
}

// ---- analyze

struct AnalyzeArgs {
  std::string forest;
  std::vector<std::string> models;
  std::string train;
  std::optional<std::string> label;
  std::string stat;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<int> depth;
  double slack = 0.01;
  std::uint64_t max_trees = 1'000'000;
  std::optional<double> time_limit;
  std::string out;
};

struct TreeSource {
  std::vector<Tree> trees;
  double lambda = 0.0;
  double epsilon = 0.0;
  int depth = 0;
};

TreeSource gather_trees(const AnalyzeArgs& a, const BinaryDataset& ds) {
  TreeSource src;
  if (!a.forest.empty() == !a.models.empty()) throw std::invalid_argument("give exactly one of --forest or --models");
  if (!a.forest.empty()) {
    const ForestReader reader(a.forest);
    const auto& manifest = reader.manifest();
    const std::string fp = manifest.value("dataset_fingerprint", "");
    if (fp != ds.fingerprint()) throw FingerprintMismatch(a.forest, fp, ds.fingerprint());
    if (reader.t_count() > a.max_trees) {
      throw BudgetExceeded(a.max_trees, "forest holds " + std::to_string(reader.t_count()) + " trees; raise --max-trees");
    }
    // Load each prefix file once by walking indices in order.
    src.trees.reserve(reader.t_count());
    for (std::uint64_t i = 0; i < reader.t_count(); ++i) src.trees.push_back(reader.tree_at_index(i));
    src.lambda = manifest.at("config").at("lambda").get<double>();
    src.epsilon = manifest.at("config").at("epsilon").get<double>();
    src.depth = manifest.at("config").at("depth_budget").get<int>();
  } else {
    for (const auto& path : a.models) {
      const Model m = model_from_json(read_json_file(path));
      if (m.dataset_fingerprint != ds.fingerprint()) throw FingerprintMismatch(path, m.dataset_fingerprint, ds.fingerprint());
      src.trees.push_back(m.tree);
      src.lambda = m.lambda;
      src.depth = std::max(src.depth, m.depth_budget);
    }
  }
  if (a.lambda) src.lambda = *a.lambda;
  if (a.epsilon) src.epsilon = *a.epsilon;
  if (a.depth) src.depth = *a.depth;
  return src;
}

int cmd_analyze(const AnalyzeArgs& a) {
  const auto start = Clock::now();
  const BinaryDataset ds = load_binary(a.train, a.label);
  const TreeSource src = gather_trees(a, ds);
  json summary;
  summary["stat"] = a.stat;
  summary["trees"] = src.trees.size();

  if (a.stat == "greedy-prop") {
    std::cout << "level\tnumerator\tdenominator\tproportion\n";
    json levels = json::array();
    for (const auto& s : greedy_split_profile(ds, src.trees)) {
      std::cout << s.level << '\t' << s.numerator << '\t' << s.denominator << '\t' << fmt(s.proportion) << '\n';
      levels.push_back({{"level", s.level}, {"numerator", s.numerator}, {"denominator", s.denominator},
                        {"proportion", s.proportion}});
    }
    summary["levels"] = levels;
  } else if (a.stat == "gap-mono") {
    const auto m = monotone_gap_fraction(ds, src.trees, src.lambda);
    std::cout << "monotone\tconsidered\tunmatched\tfraction\n";
    std::cout << m.monotone << '\t' << m.considered << '\t' << m.unmatched << '\t' << fmt(m.fraction) << '\n';
    summary["monotone"] = m.monotone;
    summary["considered"] = m.considered;
    summary["unmatched"] = m.unmatched;
    summary["fraction"] = m.fraction;
  } else if (a.stat == "multiplicity") {
    const auto m = predictive_multiplicity(ds, src.trees);
    std::cout << "trees\tmean_variance\tstd_variance\n";
    std::cout << src.trees.size() << '\t' << fmt(m.mean) << '\t' << fmt(m.stddev) << '\n';
    summary["mean"] = m.mean;
    summary["std"] = m.stddev;
    summary["variances"] = m.variances;
  } else if (a.stat == "precision") {
    if (src.depth < 1) throw std::invalid_argument("precision needs a depth budget (--depth)");
    SolverConfig cfg;
    cfg.depth_budget = src.depth;
    cfg.lambda = src.lambda;
    cfg.time_limit = a.time_limit;
    const SolveResult ref = solve(ds, cfg);
    if (!ref.converged) std::cerr << "reference search did not converge; using its best tree as the optimum\n";
    const CostModel model(src.lambda, static_cast<std::int64_t>(ds.n()));
    const auto p = precision_vs_reference(ds, src.trees, ref.root_ub, model, src.epsilon, a.slack);
    std::cout << "trees\twithin\twithin_slack\tprecision\tslackened_precision\treference_objective\treference_converged\n";
    std::cout << p.total << '\t' << p.within << '\t' << p.within_slack << '\t' << fmt(p.precision) << '\t'
              << fmt(p.slackened_precision) << '\t' << fmt(ref.upper_bound) << '\t' << (ref.converged ? 1 : 0) << '\n';
    summary["within"] = p.within;
    summary["within_slack"] = p.within_slack;
    summary["precision"] = p.precision;
    summary["slackened_precision"] = p.slackened_precision;
    summary["slack"] = a.slack;
    summary["epsilon"] = src.epsilon;
    summary["reference_objective"] = ref.upper_bound;
    summary["reference_converged"] = ref.converged;
  } else {
    throw std::invalid_argument("unknown statistic '" + a.stat + "'");
  }

  if (!a.out.empty()) {
    const fs::path out(a.out);
    fs::create_directories(out);
    write_json_file(out / "analysis.json", summary);
    RunRecord run{"analyze", {}, ds.fingerprint(), 0, {"analysis.json"}};
    run.config = {{"train", a.train}, {"forest", a.forest}, {"models", a.models}, {"stat", a.stat},
                  {"lambda", src.lambda}, {"epsilon", src.epsilon}, {"slack", a.slack}};
    write_run_manifest(out, run, seconds_since(start));
  }
  return kOk;
}

// ---- bench

struct BenchArgs {
  std::string suite;
  std::uint64_t seed = 7;
  std::string out;
  std::string data;
  std::string train;
  std::string test;
  std::optional<std::string> label;
  int depth = 5;
  int repeats = 1;
  double lambda = 0.001;
  std::vector<double> lambdas;
  std::vector<std::string> algos{"greedy", "lickety", "split", "optimal"};
  std::optional<double> time_limit;
  int threads = 1;
};

double accuracy(const Tree& t, const BinaryDataset& ds) {
  return 1.0 - static_cast<double>(objective(t, ds, 0.0).misclassified) / static_cast<double>(ds.n());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : (v[m - 1] + v[m]) / 2;
}

int cmd_bench(const BenchArgs& a, json& results) {
  const int threads = effective_threads(a.threads);
  results = json::array();
  if (a.suite == "lookahead-sweep") {
    const std::string spec_text = a.data.empty() ? "planted:d=5,k=40,eps=0.1,n=5000" : a.data;
    SyntheticSpec spec = SyntheticSpec::parse(spec_text);
    spec.seed = a.seed;
    const auto data = generate(spec).data;
    std::cout << "lookahead\tmedian_wall_time\tobjective\tleaves\n";
    for (int dl = 1; dl < a.depth; ++dl) {
      std::vector<double> times;
      FitResult last;
      for (int rep = 0; rep < a.repeats; ++rep) {
        FitRequest req;
        req.lambda = a.lambda;
        req.depth_budget = a.depth;
        req.lookahead_depth = dl;
        req.time_limit = a.time_limit;
        req.threads = threads;
        const auto t0 = Clock::now();
        last = split_fit(data, req);
        times.push_back(seconds_since(t0));
      }
      const double med = median(times);
      std::cout << dl << '\t' << fmt(med) << '\t' << fmt(last.objective.value) << '\t' << last.objective.leaves << '\n';
      results.push_back({{"lookahead", dl}, {"wall_times", times}, {"median_wall_time", med},
                         {"objective", last.objective.value}, {"leaves", last.objective.leaves},
                         {"converged", last.converged}});
    }
    return kOk;
  }
  if (a.suite == "algo-frontier") {
    std::optional<BinaryDataset> train;
    std::optional<BinaryDataset> test;
    if (!a.train.empty()) {
      train = load_binary(a.train, a.label);
      if (!a.test.empty()) test = load_binary(a.test, a.label);
    } else {
      SyntheticSpec spec = SyntheticSpec::parse(a.data.empty() ? "xor" : a.data);
      spec.seed = a.seed;
      train = generate(spec).data;
    }
    const BinaryDataset& eval = test ? *test : *train;
    const std::vector<double> lambdas = a.lambdas.empty() ? std::vector<double>{0.001, 0.005, 0.01, 0.02, 0.05} : a.lambdas;
    std::cout << "algorithm\tlambda\ttrain_objective\ttest_error\ttest_loss\tleaves\twall_time\tconverged\n";
    for (const auto& algo : a.algos) {
      for (double lambda : lambdas) {
        const auto t0 = Clock::now();
        const Fitted f = run_algorithm(*train, algo, lambda, a.depth, std::min(2, a.depth), true, a.time_limit, threads);
        const double wall = seconds_since(t0);
        const double train_obj = objective(f.tree, *train, lambda).value;
        const double err = 1.0 - accuracy(f.tree, eval);
        const double loss = err + lambda * static_cast<double>(f.tree.num_leaves());
        std::cout << algo << '\t' << fmt(lambda) << '\t' << fmt(train_obj) << '\t' << fmt(err) << '\t' << fmt(loss)
                  << '\t' << f.tree.num_leaves() << '\t' << fmt(wall) << '\t' << (f.converged ? 1 : 0) << '\n';
        results.push_back({{"algorithm", algo}, {"lambda", lambda}, {"train_objective", train_obj},
                           {"test_error", err}, {"test_loss", loss}, {"leaves", f.tree.num_leaves()},
                           {"wall_time", wall}, {"converged", f.converged}});
      }
    }
    return kOk;
  }
  if (a.suite == "adversarial") {
    SyntheticSpec spec = SyntheticSpec::parse(a.data.empty() ? "xor_majority:d=4,eps=0.05,n=20000" : a.data);
    spec.seed = a.seed;
    const SyntheticData data = generate(spec);
    const int depth = spec.kind == SyntheticKind::XorMajority ? spec.depth : a.depth;
    std::cout << "algorithm\taccuracy\tleaves\twall_time\tsignal_accuracy\tgreedy_ceiling\n";
    for (const std::string algo : {"greedy", "lickety", "split"}) {
      const auto t0 = Clock::now();
      const Fitted f = run_algorithm(data.data, algo, a.lambda, depth, std::min(2, depth), true, a.time_limit, threads);
      const double wall = seconds_since(t0);
      const double acc = accuracy(f.tree, data.data);
      std::cout << algo << '\t' << fmt(acc) << '\t' << f.tree.num_leaves() << '\t' << fmt(wall) << '\t'
                << fmt(data.signal_accuracy) << '\t' << fmt(data.greedy_ceiling) << '\n';
      results.push_back({{"algorithm", algo}, {"accuracy", acc}, {"leaves", f.tree.num_leaves()}, {"wall_time", wall}});
    }
    return kOk;
  }
  throw std::invalid_argument("unknown suite '" + a.suite + "'");
}

// ---- generate

struct GenerateArgs {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  SyntheticSpec spec = SyntheticSpec::parse(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const SyntheticData data = generate(spec);
  write_csv(a.out, data.data.to_raw());
  std::cout << "rows\tfeatures\tpositives\tfingerprint\n";
  std::cout << data.data.n() << '\t' << data.data.k() << '\t' << data.data.labels().count() << '\t'
            << data.data.fingerprint() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse decision trees: greedy, optimal, lookahead search and Rashomon sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "Split and binarize a CSV file");
  prep_cmd->add_option("input", prep.input, "Input CSV")->required();
  prep_cmd->add_option("--label", prep.label, "Label column (default: last)");
  prep_cmd->add_option("--binarize", prep.binarize, "exhaustive | quantile:q | guess:n_est[:max]");
  prep_cmd->add_flag("--balance", prep.balance, "Undersample the majority class to parity");
  prep_cmd->add_option("--split", prep.ratio, "Training fraction");
  prep_cmd->add_option("--seed", prep.seed);
  prep_cmd->add_option("--out", prep.out, "Output directory");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one tree");
  fit_cmd->add_option("train", fit.train, "Binary CSV")->required();
  fit_cmd->add_option("--label", fit.label);
  fit_cmd->add_option("--algo", fit.algo)->check(CLI::IsMember({"greedy", "optimal", "split", "lickety"}));
  fit_cmd->add_option("--lambda", fit.lambda);
  fit_cmd->add_option("--depth", fit.depth);
  fit_cmd->add_option("--lookahead", fit.lookahead);
  fit_cmd->add_flag("--no-postprocess", fit.no_postprocess);
  fit_cmd->add_option("--time-limit", fit.time_limit, "Seconds per solver call");
  fit_cmd->add_option("--threads", fit.threads);
  fit_cmd->add_option("--out", fit.out);

  RashomonArgs rash;
  auto* rash_cmd = app.add_subcommand("rashomon", "Build a lookahead Rashomon forest");
  rash_cmd->add_option("train", rash.train)->required();
  rash_cmd->add_option("--label", rash.label);
  rash_cmd->add_option("--lambda", rash.lambda);
  rash_cmd->add_option("--epsilon", rash.epsilon);
  rash_cmd->add_option("--depth", rash.depth);
  rash_cmd->add_option("--lookahead", rash.lookahead);
  rash_cmd->add_option("--max-trees", rash.max_trees);
  rash_cmd->add_option("--out", rash.out);

  IndexArgs idx;
  auto* idx_cmd = app.add_subcommand("index", "Read trees from a forest by index");
  idx_cmd->add_option("forest", idx.forest)->required();
  auto* idx_i = idx_cmd->add_option("--i", idx.index, "One index");
  auto* idx_range = idx_cmd->add_option("--range", idx.range, "Half-open range a..b");
  auto* idx_count = idx_cmd->add_flag("--count", idx.count, "Print the number of trees");
  idx_i->excludes(idx_range)->excludes(idx_count);
  idx_range->excludes(idx_count);

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "Statistics over a forest or a list of models");
  an_cmd->add_option("--forest", an.forest);
  an_cmd->add_option("--models", an.models);
  an_cmd->add_option("--train", an.train)->required();
  an_cmd->add_option("--label", an.label);
  an_cmd->add_option("--stat", an.stat)->required()->check(
      CLI::IsMember({"greedy-prop", "gap-mono", "multiplicity", "precision"}));
  an_cmd->add_option("--lambda", an.lambda);
  an_cmd->add_option("--epsilon", an.epsilon);
  an_cmd->add_option("--depth", an.depth);
  an_cmd->add_option("--slack", an.slack);
  an_cmd->add_option("--max-trees", an.max_trees);
  an_cmd->add_option("--time-limit", an.time_limit);
  an_cmd->add_option("--out", an.out);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite");
  bench_cmd->add_option("--suite", bench.suite)->required()->check(
      CLI::IsMember({"lookahead-sweep", "algo-frontier", "adversarial"}));
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--out", bench.out);
  bench_cmd->add_option("--data", bench.data, "Generator spec");
  bench_cmd->add_option("--train", bench.train);
  bench_cmd->add_option("--test", bench.test);
  bench_cmd->add_option("--label", bench.label);
  bench_cmd->add_option("--depth", bench.depth);
  bench_cmd->add_option("--repeats", bench.repeats);
  bench_cmd->add_option("--lambda", bench.lambda);
  bench_cmd->add_option("--lambdas", bench.lambdas);
  bench_cmd->add_option("--algos", bench.algos);
  bench_cmd->add_option("--time-limit", bench.time_limit);
  bench_cmd->add_option("--threads", bench.threads);

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic binary dataset");
  gen_cmd->add_option("spec", gen.spec, "xor | xor_majority:d=4,eps=0.05 | tribes_majority:dl=8,d=9 | planted:d=5,k=40")
      ->required();
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*prep_cmd) return cmd_prep(prep);
    if (*fit_cmd) return cmd_fit(fit);
    if (*rash_cmd) return cmd_rashomon(rash);
    if (*idx_cmd) return cmd_index(idx);
    if (*an_cmd) return cmd_analyze(an);
    if (*gen_cmd) return cmd_generate(gen);
    if (*bench_cmd) {
      const auto start = Clock::now();
      json results;
      const int rc = cmd_bench(bench, results);
      if (!bench.out.empty()) {
        const fs::path out(bench.out);
        fs::create_directories(out);
        write_json_file(out / "bench.json", results);
        RunRecord run{"bench", {{"suite", bench.suite}, {"data", bench.data}, {"depth", bench.depth},
                                {"lambda", bench.lambda}, {"repeats", bench.repeats}},
                      "", bench.seed, {"bench.json"}};
        write_run_manifest(out, run, seconds_since(start));
      }
      return rc;
    }
  } catch (const BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const IndexOutOfRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIndex;
  } catch (const FingerprintMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMismatch;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
