// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include "jgkd/errors.hpp"

namespace jgkd::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': '" + value + "' is not " + expected);
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"seed", "1", "master seed; corpus, teacher and student seeds derive from it"},
      {"threads", "1", "worker threads for ablation runs"},
      {"corpus.schema", "funsd", "label schema: funsd or formnlu"},
      {"corpus.pages", "200", "number of synthetic pages"},
      {"corpus.entities_min", "3", "minimum entities per page"},
      {"corpus.entities_max", "7", "maximum entities per page"},
      {"corpus.tokens_min", "1", "minimum tokens per entity"},
      {"corpus.tokens_max", "5", "maximum tokens per entity"},
      {"corpus.vocab_size", "200", "token vocabulary size"},
      {"corpus.visual_dim", "16", "entity visual feature width"},
      {"corpus.signal", "0.95", "strength of the label cues in layout and visual features"},
      {"corpus.noise_rate", "0.0", "fraction of tokens whose text id is replaced at random"},
      {"corpus.train_fraction", "0.7", "share of pages in the training split"},
      {"corpus.val_fraction", "0.15", "share of pages in the validation split"},
      {"corpus.test_fraction", "0.15", "share of pages in the test split"},
      {"teacher.layers", "1", "encoder layers per teacher"},
      {"teacher.heads", "4", "attention heads per teacher"},
      {"teacher.lr", "0.003", "teacher Adam learning rate"},
      {"teacher.epochs", "15", "teacher training epochs"},
      {"teacher.fine_a_dim", "48", "width of fine_a (text, box and positions)"},
      {"teacher.fine_b_dim", "40", "width of fine_b (text and box)"},
      {"teacher.coarse_a_dim", "32", "width of coarse_a (with visual features)"},
      {"teacher.coarse_b_dim", "24", "width of coarse_b (without visual features)"},
      {"teacher.transformer_dim", "32", "width of the untrained coarse transformer"},
      {"student.variant", "encoder_and_decoder", "encoder_only, decoder_only or encoder_and_decoder"},
      {"student.dim", "64", "student width"},
      {"student.encoder_layers", "2", "joint encoder layers"},
      {"student.decoder_layers", "2", "layers per grain decoder"},
      {"student.heads", "4", "attention heads"},
      {"student.ff_dim", "0", "feed-forward width, 0 = 4 * dim"},
      {"student.mask_cross_grain", "false", "restrict encoder attention to the same grain"},
      {"student.cross_attention", "true", "decoders attend to the other grain"},
      {"student.positions", "false", "add sinusoidal positions before the encoder"},
      {"student.fine_teachers", "fine_a,fine_b", "fine teacher roster"},
      {"student.coarse_teachers", "coarse_a,coarse_b", "coarse teacher roster"},
      {"loss.families", "sim,distil,triplet,align", "auxiliary losses on top of the task losses (empty = none)"},
      {"loss.task_fine_weight", "1", "weight of the token classification loss"},
      {"loss.task_coarse_weight", "1", "weight of the entity classification loss"},
      {"loss.sim_weight", "1", "weight of the similarity losses"},
      {"loss.distil_weight", "1", "weight of the distilling losses"},
      {"loss.triplet_weight", "1", "weight of the triplet losses"},
      {"loss.align_weight", "1", "weight of the alignment loss"},
      {"loss.margin", "1", "triplet margin"},
      {"loss.raw_sum", "false", "sum similarity and distilling over teachers instead of averaging"},
      {"train.lr", "0.001", "student Adam learning rate"},
      {"train.beta1", "0.9", "Adam beta1"},
      {"train.beta2", "0.999", "Adam beta2"},
      {"train.eps", "1e-8", "Adam epsilon"},
      {"train.max_epochs", "50", "maximum student epochs"},
      {"train.patience", "10", "epochs without validation improvement before stopping"},
      {"ablate.seeds", "1,2,3", "student seeds per ablation row"},
  };
  return keys;
}

std::string describe_keys() {
  std::size_t width = 0;
  for (const auto& k : config_keys()) width = std::max(width, k.name.size() + k.default_value.size() + 3);
  std::string out = "Config keys (key = default):\n";
  for (const auto& k : config_keys()) {
    std::string left = "  " + k.name + " = " + k.default_value;
    left.resize(std::max(left.size() + 2, width + 4), ' ');
    out += left + k.help + "\n";
  }
  return out;
}

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (auto it = seen.find(key); it != seen.end()) {
      throw ConfigError("config line " + std::to_string(no) + ": key '" + key + "' already set on line " +
                        std::to_string(it->second));
    }
    seen[key] = no;
    try {
      cfg.set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config '" + path.string() + "'");
  return parse(std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>()));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) bad_value(key, v, "an unsigned integer");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    bad_value(key, v, "an unsigned integer");
  }
}

std::size_t RunConfig::get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean (true/false)");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list item");
    out.push_back(item);
  }
  return out;
}

std::string RunConfig::render() const {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + values_.at(k.name) + "\n";
  return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << render();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

corpus::SchemaId RunConfig::schema() const {
  try {
    return corpus::parse_schema(get("corpus.schema"));
  } catch (const SchemaError&) {
    bad_value("corpus.schema", get("corpus.schema"), "funsd or formnlu");
  }
}

corpus::GenSpec RunConfig::gen_spec() const {
  corpus::GenSpec g;
  g.n_pages = get_size("corpus.pages");
  g.schema = schema();
  g.entities_min = get_size("corpus.entities_min");
  g.entities_max = get_size("corpus.entities_max");
  g.tokens_min = get_size("corpus.tokens_min");
  g.tokens_max = get_size("corpus.tokens_max");
  g.vocab_size = get_size("corpus.vocab_size");
  g.visual_dim = get_size("corpus.visual_dim");
  g.signal = get_double("corpus.signal");
  g.noise_rate = get_double("corpus.noise_rate");
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("corpus: ") + e.what());
  }
  return g;
}

std::array<double, 3> RunConfig::split_fractions() const {
  std::array<double, 3> f{get_double("corpus.train_fraction"), get_double("corpus.val_fraction"),
                          get_double("corpus.test_fraction")};
  for (double v : f) {
    if (!(v > 0.0)) throw ConfigError("corpus split fractions must be positive");
  }
  return f;
}

std::uint64_t RunConfig::corpus_seed() const { return derive_seed(seed(), 0xc0); }
std::uint64_t RunConfig::teacher_seed() const { return derive_seed(seed(), 0x7e); }

std::vector<teachers::TeacherConfig> RunConfig::teacher_configs() const {
  auto roster = teachers::default_roster(schema(), teacher_seed());
  roster.push_back(teachers::random_coarse_config(schema(), teacher_seed()));
  const char* dims[] = {"teacher.fine_a_dim", "teacher.fine_b_dim", "teacher.coarse_a_dim", "teacher.coarse_b_dim",
                        "teacher.transformer_dim"};
  for (std::size_t i = 0; i < roster.size(); ++i) {
    auto& c = roster[i];
    c.dim = get_size(dims[i]);
    c.layers = get_size("teacher.layers");
    c.heads = get_size("teacher.heads");
    c.lr = get_double("teacher.lr");
    if (c.name != "transformer") c.epochs = get_size("teacher.epochs");
    c.vocab_size = get_size("corpus.vocab_size");
    c.visual_dim = get_size("corpus.visual_dim");
    c.validate();
  }
  return roster;
}

student::StudentConfig RunConfig::student_config() const {
  student::StudentConfig s;
  s.variant = student::parse_variant(get("student.variant"));
  s.dim = get_size("student.dim");
  s.encoder_layers = get_size("student.encoder_layers");
  s.decoder_layers = get_size("student.decoder_layers");
  s.heads = get_size("student.heads");
  s.ff_dim = get_size("student.ff_dim");
  s.mask_cross_grain = get_bool("student.mask_cross_grain");
  s.cross_attention = get_bool("student.cross_attention");
  s.positions = get_bool("student.positions");
  s.num_labels = corpus::schema(schema()).num_labels();
  s.seed = derive_seed(seed(), 0x57d);
  return s;
}

losses::LossWeights RunConfig::loss_weights() const {
  losses::LossWeights w;
  try {
    w = losses::LossWeights::with(get_list("loss.families"));
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("loss.families: ") + e.what());
  }
  w.task_fine.weight = get_double("loss.task_fine_weight");
  w.task_coarse.weight = get_double("loss.task_coarse_weight");
  w.similarity.weight = get_double("loss.sim_weight");
  w.distilling.weight = get_double("loss.distil_weight");
  w.triplet.weight = get_double("loss.triplet_weight");
  w.alignment.weight = get_double("loss.align_weight");
  w.margin = get_double("loss.margin");
  w.raw_sum = get_bool("loss.raw_sum");
  w.validate();
  return w;
}

harness::TrainSpec RunConfig::train_spec() const {
  harness::TrainSpec t;
  t.adam.lr = get_double("train.lr");
  t.adam.beta1 = get_double("train.beta1");
  t.adam.beta2 = get_double("train.beta2");
  t.adam.eps = get_double("train.eps");
  t.max_epochs = get_size("train.max_epochs");
  t.patience = get_size("train.patience");
  t.seed = seed();
  t.validate();
  return t;
}

std::vector<std::uint64_t> RunConfig::ablation_seeds() const {
  std::vector<std::uint64_t> out;
  for (const auto& s : get_list("ablate.seeds")) {
    if (s.find_first_not_of("0123456789") != std::string::npos) bad_value("ablate.seeds", s, "an unsigned integer");
    out.push_back(std::stoull(s));
  }
  if (out.empty()) throw ConfigError("ablate.seeds must name at least one seed");
  return out;
}

std::size_t RunConfig::threads() const {
  const std::size_t t = get_size("threads");
  if (t == 0) throw ConfigError("threads must be at least 1");
  return t;
}

void RunConfig::validate() const {
  gen_spec();
  split_fractions();
  teacher_configs();
  student_config();
  loss_weights();
  train_spec();
  ablation_seeds();
  threads();
}

}  // namespace jgkd::cli
