#include "dage/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dage/dataset.hpp"
#include "dage/error.hpp"
#include "dage/evaluation.hpp"
#include "dage/kg_store.hpp"
#include "dage/model_io.hpp"
#include "dage/operator_checks.hpp"
#include "dage/oracle.hpp"
#include "dage/query.hpp"
#include "dage/report.hpp"
#include "dage/synthetic.hpp"
#include "dage/training.hpp"

namespace dage {

namespace fs = std::filesystem;

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw UsageError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

// Settings a subcommand accepts both from --config and as --flags.
class Settings {
 public:
  void declare(CLI::App* app, const std::string& key, std::string fallback, const std::string& help) {
    order_.push_back(key);
    values_[key] = std::move(fallback);
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app->add_option("--" + flag, flags_[key], help);
  }

  void resolve(const std::string& config_path) {
    if (!config_path.empty()) {
      for (const auto& [k, v] : read_config_file(config_path)) {
        if (!values_.count(k)) throw UsageError("unknown config key '" + k + "'");
        values_[k] = v;
      }
    }
    for (const auto& [k, v] : flags_)
      if (v) values_[k] = *v;
  }

  void print(std::ostream& err, const std::string& command) const {
    err << "# " << command << " config\n";
    for (const auto& k : order_) err << "# " << k << " = " << values_.at(k) << "\n";
  }

  const std::string& str(const std::string& k) const { return values_.at(k); }

  std::size_t size(const std::string& k) const {
    const std::string& s = str(k);
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError(k + " must be a non-negative integer, got '" + s + "'");
    return v;
  }

  std::uint64_t u64(const std::string& k) const { return size(k); }

  double real(const std::string& k) const {
    const std::string& s = str(k);
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(k + " must be a number, got '" + s + "'");
  }

  bool flag(const std::string& k) const {
    const std::string& s = str(k);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError(k + " must be true or false, got '" + s + "'");
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::optional<std::string>> flags_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct GraphPair {
  KnowledgeGraph train, full;
};

// The full graph fixes the ids; the train graph reuses its tables.
GraphPair load_graphs(const fs::path& train_path, const fs::path& full_path) {
  GraphPair g;
  g.full = load_triples(full_path);
  g.train = load_triples(train_path, g.full.entities(), g.full.relations());
  if (g.train.entities().size() != g.full.entities().size() ||
      g.train.relations().size() != g.full.relations().size())
    throw Error("InvalidInput", "train graph names entities or relations absent from the full graph");
  return g;
}

SymbolTable table_of(const std::vector<std::string>& names) {
  SymbolTable t;
  for (const auto& n : names) t.intern(n);
  return t;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

int cmd_generate(const Settings& s, std::ostream& out) {
  GenerationConfig gc;
  gc.types = split_list(s.str("types"));
  gc.n_train = s.size("n_train");
  gc.n_valid = s.size("n_valid");
  gc.n_test_easy = s.size("n_test_easy");
  gc.n_test_hard = s.size("n_test_hard");
  for (const auto& item : split_list(s.str("hard_counts"))) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("hard_counts entries look like type=count, got '" + item + "'");
    std::size_t n = 0;
    const std::string v = item.substr(eq + 1);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("bad count in hard_counts: '" + item + "'");
    gc.hard_counts[item.substr(0, eq)] = n;
  }
  gc.hard_threshold = s.real("hard_threshold");
  gc.seed = s.u64("seed");
  gc.max_retries = s.size("max_retries");
  gc.min_hard_answers = s.size("min_hard_answers");
  if (gc.hard_threshold <= 0 || gc.hard_threshold > 1) throw UsageError("hard_threshold must be in (0,1]");
  if (s.str("kg_train").empty() || s.str("kg_full").empty() || s.str("out").empty())
    throw UsageError("generate needs --kg-train, --kg-full and --out");

  const GraphPair g = load_graphs(s.str("kg_train"), s.str("kg_full"));
  const auto splits = generate_dataset(g.train, g.full, gc);
  const fs::path dir = s.str("out");
  ensure_dir(dir);
  for (const auto& split : splits) write_dataset(split, g.full.entities(), dir / split_file_name(split.name));
  write_triples(g.train, dir / kTrainGraphFile);
  write_triples(g.full, dir / kFullGraphFile);
  out << "split,count\n";
  for (const auto& split : splits) out << split.name << "," << split.instances.size() << "\n";
  return 0;
}

int cmd_synth(const Settings& s, std::ostream& out) {
  SyntheticConfig sc;
  sc.width = s.size("width");
  sc.height = s.size("height");
  sc.relations = s.size("relations");
  sc.labels_per_offset = s.size("labels_per_offset");
  sc.extra_label_prob = s.real("extra_label_prob");
  sc.holdout = s.real("holdout");
  sc.seed = s.u64("seed");
  if (s.str("out").empty()) throw UsageError("synth needs --out");
  const SyntheticGraphs g = make_grid_kg(sc);
  const fs::path dir = s.str("out");
  ensure_dir(dir);
  write_triples(g.train, dir / kTrainGraphFile);
  write_triples(g.full, dir / kFullGraphFile);
  out << "entities," << g.full.num_entities() << "\nrelations," << g.full.num_relations() << "\ntriples_full,"
      << g.full.num_triples() << "\ntriples_train," << g.train.num_triples() << "\n";
  return 0;
}

int cmd_answer(const Settings& s, std::ostream& out) {
  if (s.str("kg").empty() || s.str("query").empty()) throw UsageError("answer needs --kg and --query");
  const KnowledgeGraph kg = load_triples(s.str("kg"));
  const AnswerSet answers = eval_concept(kg, parse_concept(s.str("query")));
  std::vector<std::string> names;
  for (EntityId e : answers) names.push_back(kg.entities().name(e));
  std::sort(names.begin(), names.end());
  for (const auto& n : names) out << n << "\n";
  return 0;
}

int cmd_relax(const Settings& s, std::ostream& out) {
  if (s.str("query").empty()) throw UsageError("relax needs --query");
  out << render_concept(relax(parse_concept(s.str("query")))) << "\n";
  return 0;
}

TrainConfig train_config(const Settings& s) {
  TrainConfig c;
  c.geometry = parse_geometry(s.str("geometry"));
  c.dim = s.size("dim");
  c.batch_size = s.size("batch_size");
  c.negatives = s.size("negatives");
  c.margin = s.real("margin");
  c.learning_rate = s.real("learning_rate");
  c.lambda_mono = s.real("lambda_mono");
  c.lambda_conj = s.real("lambda_conj");
  c.steps = s.size("steps");
  c.seed = s.u64("seed");
  c.geo.alpha_in = s.real("alpha_in");
  c.geo.softplus_beta = s.real("softplus_beta");
  c.geo.cone_lambda = s.real("cone_lambda");
  c.relaxed = s.flag("relaxed");
  c.mined_pool = s.size("mined_pool");
  c.conj_batch = s.size("conj_batch");
  c.probe_size = s.size("probe_size");
  c.validate();
  return c;
}

int cmd_train(const Settings& s, std::ostream& out) {
  const TrainConfig config = train_config(s);
  if (s.str("data").empty() || s.str("out").empty()) throw UsageError("train needs --data and --out");
  const fs::path dir = s.str("data");
  const GraphPair g = load_graphs(dir / kTrainGraphFile, dir / kFullGraphFile);
  SymbolTable entities = g.full.entities();
  const DatasetSplit split = read_dataset(dir / split_file_name("train"), entities);
  TrainResult r = train(g.train, split, config);
  const fs::path model_path = s.str("out");
  fs::path loss_path = s.str("loss");
  if (loss_path.empty()) loss_path = model_path.parent_path() / "loss.csv";
  if (model_path.has_parent_path()) ensure_dir(model_path.parent_path());
  save_model(r.model, g.full.entities().names(), g.full.relations().names(),
             config.to_json(), model_path);
  write_loss_trace(r.trace, loss_path);
  out << "steps," << r.trace.size() << "\nfinal_total," << std::setprecision(17)
      << (r.trace.empty() ? 0.0 : r.trace.back().total) << "\n";
  return 0;
}

int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.str("model").empty() || s.str("data").empty()) throw UsageError("eval needs --model and --data");
  ModelFile mf = load_model(s.str("model"));
  SymbolTable entities = table_of(mf.entity_names);
  const SymbolTable relations = table_of(mf.relation_names);
  DatasetSplit split = read_dataset(fs::path(s.str("data")) / split_file_name(s.str("split")), entities);
  const bool relaxed = mf.config.value("relaxed", false);
  if (mf.model.geometry == Geometry::Box) {
    const auto before = split.instances.size();
    std::erase_if(split.instances, [](const QueryInstance& q) { return has_negation(q.query); });
    if (split.instances.size() != before)
      err << "# box geometry: skipped " << before - split.instances.size() << " queries with negation\n";
  }
  const Vocabulary vocab{&entities, &relations};
  const bool filtered = !s.flag("raw_ranks");
  const auto ranks = rank_split(mf.model, vocab, split, EmbedOptions{relaxed}, filtered);
  out << report_tables(summarize(split, ranks), mf.model.geometry != Geometry::Box);
  return 0;
}

int cmd_analyze(const Settings& s, std::ostream& out) {
  if (s.str("data").empty()) throw UsageError("analyze needs --data");
  SymbolTable entities;
  const DatasetSplit split = read_dataset(fs::path(s.str("data")) / split_file_name(s.str("split")), entities, true);
  out << overlap_histogram_csv(split);
  return 0;
}

int cmd_gradcheck(const Settings& s, std::ostream& out, bool inject) {
  const Geometry g = parse_geometry(s.str("geometry"));
  Tape::inject_fault(inject);
  std::vector<OperatorCheck> checks;
  try {
    checks = check_operators(g, s.u64("seed"), s.size("points"), s.size("dim"));
  } catch (...) {
    Tape::inject_fault(false);
    throw;
  }
  Tape::inject_fault(false);
  bool ok = true;
  out << "operator,max_rel_error,checked,skipped,unresolved,status\n";
  for (const auto& c : checks) {
    ok = ok && c.passed();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", c.max_rel_error);
    out << c.op << "," << (c.applicable ? buf : "") << "," << c.checked << "," << c.skipped << "," << c.unresolved
        << "," << (!c.applicable ? "n/a" : c.passed() ? "pass" : "FAIL") << "\n";
  }
  return ok ? 0 : 3;
}

int exit_code_for(const Error& e) { return e.kind() == "UsageError" ? 1 : 2; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dage: DAG query embedding toolkit", "dage"};
  app.require_subcommand(1);
  std::map<std::string, Settings> settings;
  std::map<std::string, std::string> config_paths;
  bool inject = false;

  auto sub = [&](const std::string& name, const std::string& help, bool with_config) {
    CLI::App* cmd = app.add_subcommand(name, help);
    if (with_config) cmd->add_option("--config", config_paths[name], "key = value file; flags override it");
    return cmd;
  };

  {
    CLI::App* c = sub("generate", "sample train/valid/test-easy/test-hard splits", true);
    Settings& s = settings["generate"];
    s.declare(c, "kg_train", "", "train graph TSV");
    s.declare(c, "kg_full", "", "full graph TSV");
    s.declare(c, "types", "2s,3s,sp,is,us,ins", "comma-separated query types");
    s.declare(c, "n_train", "100", "train instances per type");
    s.declare(c, "n_valid", "20", "valid instances per type");
    s.declare(c, "n_test_easy", "20", "test-easy instances per type");
    s.declare(c, "n_test_hard", "20", "test-hard instances per type");
    s.declare(c, "hard_counts", "", "per-type test-hard counts, e.g. 2s=150,sp=200");
    s.declare(c, "hard_threshold", "0.5", "overlap below which an instance is hard");
    s.declare(c, "seed", "0", "random seed");
    s.declare(c, "max_retries", "1000", "consecutive rejections tolerated per type");
    s.declare(c, "min_hard_answers", "0", "test instances need this many hard answers");
    s.declare(c, "out", "", "output directory");
  }
  {
    CLI::App* c = sub("synth", "write a synthetic grid-world train/full graph pair", true);
    Settings& s = settings["synth"];
    const SyntheticConfig d;
    s.declare(c, "width", std::to_string(d.width), "grid width");
    s.declare(c, "height", std::to_string(d.height), "grid height");
    s.declare(c, "relations", std::to_string(d.relations), "number of relations");
    s.declare(c, "labels_per_offset", std::to_string(d.labels_per_offset), "labels owned by each displacement");
    s.declare(c, "extra_label_prob", "0.3", "chance of each non-primary label on a link");
    s.declare(c, "holdout", "0.15", "fraction of triples missing from the train graph");
    s.declare(c, "seed", "0", "random seed");
    s.declare(c, "out", "", "output directory");
  }
  {
    CLI::App* c = sub("answer", "answer a query exactly on a graph", false);
    Settings& s = settings["answer"];
    s.declare(c, "kg", "", "graph TSV");
    s.declare(c, "query", "", "query text");
  }
  {
    CLI::App* c = sub("relax", "print the tree-form relaxation of a query", false);
    settings["relax"].declare(c, "query", "", "query text");
  }
  {
    CLI::App* c = sub("train", "train a query embedding model", true);
    Settings& s = settings["train"];
    const TrainConfig d;
    auto num = [](double x) {
      std::ostringstream o;
      o << x;
      return o.str();
    };
    s.declare(c, "geometry", "box", "box | beta | cone");
    s.declare(c, "dim", std::to_string(d.dim), "embedding dimension");
    s.declare(c, "batch_size", std::to_string(d.batch_size), "(query, answer) pairs per step");
    s.declare(c, "negatives", std::to_string(d.negatives), "negative samples per pair");
    s.declare(c, "margin", num(d.margin), "margin gamma");
    s.declare(c, "learning_rate", num(d.learning_rate), "Adam learning rate");
    s.declare(c, "lambda_mono", num(d.lambda_mono), "monotonicity loss weight");
    s.declare(c, "lambda_conj", num(d.lambda_conj), "conjunction-preserving loss weight");
    s.declare(c, "steps", std::to_string(d.steps), "optimizer steps");
    s.declare(c, "seed", "0", "random seed");
    s.declare(c, "alpha_in", num(d.geo.alpha_in), "box inside-distance weight");
    s.declare(c, "softplus_beta", num(d.geo.softplus_beta), "box volume softplus temperature");
    s.declare(c, "cone_lambda", num(d.geo.cone_lambda), "cone inside-distance weight");
    s.declare(c, "relaxed", "false", "train on relaxed queries without the combinator");
    s.declare(c, "mined_pool", std::to_string(d.mined_pool), "mined 2rs/3rs instances");
    s.declare(c, "conj_batch", std::to_string(d.conj_batch), "mined instances per step");
    s.declare(c, "probe_size", std::to_string(d.probe_size), "fixed pool size for constraint-loss probes");
    s.declare(c, "data", "", "data directory from generate");
    s.declare(c, "out", "", "model file");
    s.declare(c, "loss", "", "loss trace CSV (default: loss.csv next to the model)");
  }
  {
    CLI::App* c = sub("eval", "MRR of a model on a split", false);
    Settings& s = settings["eval"];
    s.declare(c, "model", "", "model file");
    s.declare(c, "data", "", "data directory");
    s.declare(c, "split", "test-hard", "split name");
    s.declare(c, "raw_ranks", "false", "rank without filtering other answers");
    // `--raw-ranks` with no value
    c->get_option("--raw-ranks")->expected(0, 1)->default_str("true");
  }
  {
    CLI::App* c = sub("analyze", "overlap histogram of a split", false);
    Settings& s = settings["analyze"];
    s.declare(c, "data", "", "data directory");
    s.declare(c, "split", "test-easy", "split name");
  }
  {
    CLI::App* c = sub("gradcheck", "finite-difference check of every geometry operator", false);
    Settings& s = settings["gradcheck"];
    s.declare(c, "geometry", "box", "box | beta | cone");
    s.declare(c, "seed", "0", "random seed");
    s.declare(c, "points", "20", "random points per operator");
    s.declare(c, "dim", "3", "embedding dimension of the probes");
    c->add_flag("--inject-fault", inject)->group("");
  }

  std::vector<const char*> argv = {"dage"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n";
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  Settings& s = settings.at(name);
  try {
    s.resolve(config_paths[name]);
    s.print(err, name);
    if (name == "generate") return cmd_generate(s, out);
    if (name == "synth") return cmd_synth(s, out);
    if (name == "answer") return cmd_answer(s, out);
    if (name == "relax") return cmd_relax(s, out);
    if (name == "train") return cmd_train(s, out);
    if (name == "eval") return cmd_eval(s, out, err);
    if (name == "analyze") return cmd_analyze(s, out);
    if (name == "gradcheck") return cmd_gradcheck(s, out, inject);
    throw UsageError("unknown subcommand " + name);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    err << "error: UsageError: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dage
