// Copyright 2026 The fedprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedprint/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fedprint/errors.h"
#include "fedprint/rng.h"

namespace fedprint {
namespace {

using json = nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  T get(const char* key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return convert<T>(j_.at(key), key);
  }

  template <typename T>
  T require(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(field(key) + ": required field missing");
    return convert<T>(j_.at(key), key);
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw ConfigError(field(it.key().c_str()) + ": unknown key");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  template <typename T>
  T convert(const json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(field(key) + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 &&
                                       !v.is_number_unsigned())) {
          throw ConfigError(field(key) + ": expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(field(key) + ": expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(field(key) + ": expected a string");
      }
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto wrap_usage(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const UsageError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

json scores_json(const MetricScores& s) {
  return {{"purity", s.purity},
          {"rand_index", s.rand_index},
          {"mutual_information", s.mutual_information}};
}

MetricScores scores_from(const json& j) {
  return {j.at("purity").get<double>(), j.at("rand_index").get<double>(),
          j.at("mutual_information").get<double>()};
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  fed.validate();
  if (data.synthetic.has_value() == !data.files.empty()) {
    throw ConfigError("data: give exactly one of 'synthetic' or 'files'");
  }
  if (data.synthetic) data.synthetic->validate();
  if (!data.files.empty() && data.files.size() != fed.clients) {
    throw ConfigError("data.files: " + std::to_string(data.files.size()) +
                      " files listed but fed.clients is " +
                      std::to_string(fed.clients));
  }
  if (model.embed_dim < 1 || model.context < 1 || model.n_blocks < 1 ||
      model.ffn_mult < 1) {
    throw ConfigError("model: embed_dim, context, n_blocks and ffn_mult must be >= 1");
  }
  if (dp) dp->validate();
  wrap_usage("attack.selector", [&] { return attack.selector.layer_names(model.n_blocks); });
  wrap_usage("trace.layers", [&] { return trace_layers.layer_names(model.n_blocks); });
  const auto recorded = trace_layers.layer_names(model.n_blocks);
  for (const auto& name : attack.selector.layer_names(model.n_blocks)) {
    if (std::find(recorded.begin(), recorded.end(), name) == recorded.end()) {
      throw ConfigError("attack.selector: layer " + name +
                        " is not recorded by trace.layers");
    }
  }
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig c;
  ObjectReader top(j, "");
  c.seed = top.get<std::uint64_t>("seed", 0);

  if (top.has("fed")) {
    ObjectReader f(top.raw("fed"), "fed");
    c.fed.clients = f.get<std::size_t>("clients", c.fed.clients);
    c.fed.rounds = f.get<std::size_t>("rounds", c.fed.rounds);
    c.fed.client_lr = f.get<double>("client_lr", c.fed.client_lr);
    c.fed.server_lr = f.get<double>("server_lr", c.fed.server_lr);
    c.fed.local_epochs = f.get<std::size_t>("local_epochs", c.fed.local_epochs);
    c.fed.batch_size = f.get<std::size_t>("batch_size", c.fed.batch_size);
    c.fed.shuffle = f.get<bool>("shuffle", c.fed.shuffle);
    f.finish();
  }
  c.fed.seed = c.seed;

  if (top.has("model")) {
    ObjectReader m(top.raw("model"), "model");
    c.model.embed_dim = m.get<std::size_t>("embed_dim", c.model.embed_dim);
    c.model.context = m.get<std::size_t>("context", c.model.context);
    c.model.n_blocks = m.get<std::size_t>("n_blocks", c.model.n_blocks);
    c.model.ffn_mult = m.get<std::size_t>("ffn_mult", c.model.ffn_mult);
    m.finish();
  }

  {
    if (!top.has("data")) throw ConfigError("data: required field missing");
    ObjectReader d(top.raw("data"), "data");
    if (d.has("synthetic")) {
      ObjectReader s(d.raw("synthetic"), "data.synthetic");
      SyntheticSpec spec;
      spec.train_sentences = s.get<std::size_t>("train_sentences", spec.train_sentences);
      spec.valid_sentences = s.get<std::size_t>("valid_sentences", spec.valid_sentences);
      spec.min_length = s.get<std::size_t>("min_length", spec.min_length);
      spec.max_length = s.get<std::size_t>("max_length", spec.max_length);
      spec.topic_vocab_size = s.get<std::size_t>("topic_vocab_size", spec.topic_vocab_size);
      spec.shared_vocab_size =
          s.get<std::size_t>("shared_vocab_size", spec.shared_vocab_size);
      spec.overlap = s.get<double>("overlap", spec.overlap);
      s.finish();
      c.data.synthetic = spec;
    }
    if (d.has("files")) {
      const json& files = d.raw("files");
      if (!files.is_array()) throw ConfigError("data.files: expected an array of paths");
      for (const json& p : files) {
        if (!p.is_string()) throw ConfigError("data.files: expected an array of paths");
        c.data.files.emplace_back(p.get<std::string>());
      }
    }
    c.data.text.train_sentences =
        d.get<std::size_t>("train_sentences", c.data.text.train_sentences);
    c.data.text.valid_sentences =
        d.get<std::size_t>("valid_sentences", c.data.text.valid_sentences);
    c.data.text.min_count = d.get<std::size_t>("min_count", c.data.text.min_count);
    d.finish();
  }
  if (c.data.synthetic) c.data.synthetic->n_clients = c.fed.clients;

  if (top.has("dp") && !top.raw("dp").is_null()) {
    ObjectReader d(top.raw("dp"), "dp");
    DpConfig dp;
    dp.clip = d.get<double>("clip", dp.clip);
    dp.sigma = d.get<double>("sigma", dp.sigma);
    dp.delta = d.get<double>("delta", dp.delta);
    d.finish();
    c.dp = dp;
  }

  if (top.has("attack")) {
    ObjectReader a(top.raw("attack"), "attack");
    const std::string method = a.get<std::string>("method", "greedy");
    c.attack.method = wrap_usage("attack.method", [&] { return parse_attack_method(method); });
    const std::string sel = a.get<std::string>("selector", "1:both");
    c.attack.selector = wrap_usage("attack.selector", [&] { return LayerSelector::parse(sel); });
    a.finish();
  }

  if (top.has("trace")) {
    ObjectReader t(top.raw("trace"), "trace");
    const std::string layers = t.get<std::string>("layers", "all:both");
    c.trace_layers = wrap_usage("trace.layers", [&] { return LayerSelector::parse(layers); });
    t.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["fed"] = {{"clients", c.fed.clients},         {"rounds", c.fed.rounds},
              {"client_lr", c.fed.client_lr},     {"server_lr", c.fed.server_lr},
              {"local_epochs", c.fed.local_epochs}, {"batch_size", c.fed.batch_size},
              {"shuffle", c.fed.shuffle}};
  j["model"] = {{"embed_dim", c.model.embed_dim},
                {"context", c.model.context},
                {"n_blocks", c.model.n_blocks},
                {"ffn_mult", c.model.ffn_mult}};
  json data;
  if (c.data.synthetic) {
    const SyntheticSpec& s = *c.data.synthetic;
    data["synthetic"] = {{"train_sentences", s.train_sentences},
                         {"valid_sentences", s.valid_sentences},
                         {"min_length", s.min_length},
                         {"max_length", s.max_length},
                         {"topic_vocab_size", s.topic_vocab_size},
                         {"shared_vocab_size", s.shared_vocab_size},
                         {"overlap", s.overlap}};
  } else {
    json files = json::array();
    for (const auto& p : c.data.files) files.push_back(p.string());
    data["files"] = files;
    data["train_sentences"] = c.data.text.train_sentences;
    data["valid_sentences"] = c.data.text.valid_sentences;
    data["min_count"] = c.data.text.min_count;
  }
  j["data"] = data;
  j["dp"] = c.dp ? json{{"clip", c.dp->clip}, {"sigma", c.dp->sigma}, {"delta", c.dp->delta}}
                 : json();
  j["attack"] = {{"method", to_string(c.attack.method)},
                 {"selector", c.attack.selector.to_string()}};
  j["trace"] = {{"layers", c.trace_layers.to_string()}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Corpus build_corpus(const ExperimentConfig& config) {
  if (config.data.synthetic) {
    return generate_synthetic(*config.data.synthetic, derive_seed(config.seed, "data"));
  }
  try {
    return load_text_shards(config.data.files, config.data.text);
  } catch (const InputError& e) {
    throw ConfigError(std::string("data.files: ") + e.what());
  }
}

SimulationResult simulate_experiment(const ExperimentConfig& config,
                                     std::size_t threads) {
  config.validate();
  const Corpus corpus = build_corpus(config);
  SimulationOptions options;
  options.record = config.trace_layers;
  options.threads = threads;
  SimulationResult result =
      run_simulation(config.fed, config.model, corpus, config.dp, options);
  result.trace.mutable_header().config = to_json(config);
  return result;
}

Report make_report(const TraceHeader& header, const AssignmentFile& file,
                   const TruthSidecar& truth, std::size_t baseline_trials) {
  const ClusterAssignment& a = file.assignment;
  if (a.clients != header.clients || a.rounds != header.rounds) {
    throw InputError("assignment is for K=" + std::to_string(a.clients) +
                     ", T=" + std::to_string(a.rounds) + " but the trace has K=" +
                     std::to_string(header.clients) + ", T=" +
                     std::to_string(header.rounds));
  }
  if (truth.rounds.size() != header.rounds) {
    throw InputError("truth sidecar has " + std::to_string(truth.rounds.size()) +
                     " rounds but the trace has T=" + std::to_string(header.rounds));
  }
  truth.validate(header.clients);
  if (a.labels.size() != header.clients * header.rounds) {
    throw InputError("assignment must label all K*T records");
  }

  Report r;
  r.config = header.config;
  r.method = file.method;
  r.selector = file.selector;
  r.clients = header.clients;
  r.rounds = header.rounds;
  const std::vector<int> truth_labels = truth.labels();
  r.scores = score(LabeledPartition{a.labels, truth_labels});
  r.baseline_trials = baseline_trials;
  r.baseline = random_baseline(truth_labels, header.clients, baseline_trials,
                               derive_seed(header.seed, "report"));
  r.loss_curve = header.loss_curve;
  r.dp = header.dp;
  return r;
}

json report_to_json(const Report& r) {
  json j;
  j["config"] = r.config;
  j["method"] = r.method;
  j["selector"] = r.selector;
  j["K"] = r.clients;
  j["T"] = r.rounds;
  j["scope"] = r.scope;
  j["metrics"] = scores_json(r.scores);
  j["random_baseline"] = {{"procedure", r.baseline_procedure},
                          {"trials", r.baseline_trials},
                          {"metrics", scores_json(r.baseline)}};
  j["loss_curve"] = r.loss_curve;
  if (r.dp) {
    j["dp"] = {{"C", r.dp->config.clip},
               {"sigma", r.dp->config.sigma},
               {"delta", r.dp->config.delta},
               {"sample_rate", r.dp->sample_rate},
               {"steps", r.dp->steps},
               {"epsilon_advisory",
                std::isfinite(r.dp->epsilon) ? json(r.dp->epsilon) : json()}};
  } else {
    j["dp"] = nullptr;
  }
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

Report report_from_json(const json& j) {
  try {
    Report r;
    r.config = j.value("config", json());
    r.method = j.at("method").get<std::string>();
    r.selector = j.at("selector").get<std::string>();
    r.clients = j.at("K").get<std::size_t>();
    r.rounds = j.at("T").get<std::size_t>();
    r.scope = j.at("scope").get<std::string>();
    r.scores = scores_from(j.at("metrics"));
    const json& b = j.at("random_baseline");
    r.baseline_procedure = b.at("procedure").get<std::string>();
    r.baseline_trials = b.at("trials").get<std::size_t>();
    r.baseline = scores_from(b.at("metrics"));
    r.loss_curve = j.at("loss_curve").get<Vector>();
    if (!j.at("dp").is_null()) {
      const json& d = j.at("dp");
      DpSummary s;
      s.config.clip = d.at("C").get<double>();
      s.config.sigma = d.at("sigma").get<double>();
      s.config.delta = d.at("delta").get<double>();
      s.sample_rate = d.at("sample_rate").get<double>();
      s.steps = d.at("steps").get<std::size_t>();
      s.epsilon = d.at("epsilon_advisory").is_null()
                      ? kInfiniteEpsilon
                      : d.at("epsilon_advisory").get<double>();
      r.dp = s;
    }
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string render_report_table(const Report& r) {
  std::ostringstream out;
  out << "K=" << r.clients << "  T=" << r.rounds << "  selector=" << r.selector
      << "  scope: " << r.scope << "\n";
  if (r.dp) {
    out << "DP: C=" << r.dp->config.clip << " sigma=" << r.dp->config.sigma
        << " delta=" << r.dp->config.delta << " epsilon(advisory)="
        << (std::isfinite(r.dp->epsilon) ? fixed(r.dp->epsilon) : std::string("inf"))
        << "\n";
  } else {
    out << "DP: none\n";
  }
  if (!r.loss_curve.empty()) {
    out << "eval loss: first=" << fixed(r.loss_curve.front(), 4)
        << " last=" << fixed(r.loss_curve.back(), 4) << " ("
        << r.loss_curve.size() << " rounds)\n";
  }
  out << std::left << std::setw(10) << "method" << std::right << std::setw(9)
      << "Pur." << std::setw(9) << "RI" << std::setw(9) << "MI" << "\n";
  auto row = [&](const std::string& name, const MetricScores& s) {
    out << std::left << std::setw(10) << name << std::right << std::setw(9)
        << fixed(s.purity) << std::setw(9) << fixed(s.rand_index) << std::setw(9)
        << fixed(s.mutual_information) << "\n";
  };
  row(r.method, r.scores);
  row("random", r.baseline);
  out << "random baseline: " << r.baseline_procedure << ", " << r.baseline_trials
      << " trials\n";
  return out.str();
}

}  // namespace fedprint
