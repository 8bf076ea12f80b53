#include "curvgraph/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curvgraph/errors.hpp"

namespace curvgraph {

namespace {

using nlohmann::json;

void require_stream(const std::ios& s, const std::filesystem::path& path,
                    const char* what) {
  if (!s) {
    throw std::runtime_error(std::string(what) + ": io failure on " +
                             path.string());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// -- tiny binary stream helpers (native endianness) ---------------------------

template <class T>
void put(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

void put_doubles(std::ostream& os, std::span<const double> values) {
  put<std::uint64_t>(os, values.size());
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& is) {
  const auto count = get<std::uint64_t>(is);
  std::vector<double> values(count);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  return values;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const auto count = get<std::uint64_t>(is);
  std::string s(count, '\0');
  is.read(s.data(), static_cast<std::streamsize>(count));
  return s;
}

void check_magic(std::istream& is, const char expected[4], const char* what) {
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, expected, 4) != 0) {
    throw std::runtime_error(std::string(what) + ": bad magic");
  }
}

// Writes through a temp file and renames into place.
class AtomicFile {
 public:
  explicit AtomicFile(const std::filesystem::path& path)
      : final_(path), temp_(path.string() + ".tmp"),
        out_(temp_, std::ios::binary | std::ios::trunc) {}

  std::ofstream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) {
      throw std::runtime_error("atomic write failed for " + final_.string());
    }
    out_.close();
    std::filesystem::rename(temp_, final_);
  }

 private:
  std::filesystem::path final_, temp_;
  std::ofstream out_;
};

}  // namespace

void write_embeddings_tsv(const EmbeddingTable& emb,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  require_stream(out, path, "write_embeddings_tsv");
  for (int u = 0; u < emb.num_nodes(); ++u) {
    out << u;
    for (double c : emb.row(u)) out << '\t' << format_double(c);
    out << '\n';
  }
  require_stream(out, path, "write_embeddings_tsv");
}

namespace {
constexpr char kEmbeddingMagic[4] = {'C', 'G', 'E', 'B'};
constexpr char kCheckpointMagic[4] = {'C', 'G', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void write_embeddings_binary(const EmbeddingTable& emb,
                             const std::filesystem::path& path) {
  AtomicFile file(path);
  auto& os = file.stream();
  os.write(kEmbeddingMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(emb.dim));
  put<double>(os, emb.k.kappa);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(emb.num_nodes()));
  put<std::uint8_t>(os, emb.role == EmbeddingTable::Role::kGenerator ? 0 : 1);
  put_doubles(os, emb.data);
  file.commit();
}

EmbeddingTable read_embeddings_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require_stream(is, path, "read_embeddings_binary");
  check_magic(is, kEmbeddingMagic, "read_embeddings_binary");
  const auto version = get<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("read_embeddings_binary: unsupported version");
  }
  const auto dim = get<std::uint32_t>(is);
  const double kappa = get<double>(is);
  const auto nodes = get<std::uint32_t>(is);
  const auto role = get<std::uint8_t>(is);
  EmbeddingTable emb(role == 0 ? EmbeddingTable::Role::kGenerator
                               : EmbeddingTable::Role::kDiscriminator,
                     static_cast<int>(nodes), static_cast<int>(dim),
                     Curvature{kappa});
  emb.data = get_doubles(is);
  require_stream(is, path, "read_embeddings_binary");
  if (emb.data.size() != static_cast<std::size_t>(nodes) * dim) {
    throw std::runtime_error("read_embeddings_binary: truncated data");
  }
  return emb;
}

void write_loss_csv(std::span<const LossRecord> history,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  require_stream(out, path, "write_loss_csv");
  out << "epoch,phase,iter,loss\n";
  for (const auto& rec : history) {
    out << rec.epoch << ',' << rec.phase << ',' << rec.iter << ','
        << format_double(rec.loss) << '\n';
  }
  require_stream(out, path, "write_loss_csv");
}

namespace {

json config_json(const TrainingConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["disc_iters"] = c.disc_iters;
  j["gen_iters"] = c.gen_iters;
  j["samples_per_node"] = c.samples_per_node;
  j["dim"] = c.dim;
  j["sigma"] = c.sigma;
  j["lambda"] = c.lambda;
  j["lr_gen"] = c.lr_gen;
  j["lr_disc"] = c.lr_disc;
  j["walk_length"] = c.walk_length;
  j["seed"] = c.seed;
  if (c.kappa_override.has_value()) {
    j["kappa_override"] = *c.kappa_override;
  } else {
    j["kappa_override"] = nullptr;
  }
  j["batch_nodes"] = c.batch_nodes;
  j["rho"] = c.rho;
  j["tau"] = c.tau;
  j["alpha"] = c.alpha;
  j["init_scale"] = c.init_scale;
  j["train_sigma"] = c.train_sigma;
  j["nc_joint"] = c.nc_joint;
  j["nc_lp_weight"] = c.nc_lp_weight;
  j["lr_classifier"] = c.lr_classifier;
  j["nc_l2"] = c.nc_l2;
  return j;
}

}  // namespace

TrainingConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: expected an object");
  TrainingConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") c.epochs = value.get<int>();
    else if (key == "disc_iters") c.disc_iters = value.get<int>();
    else if (key == "gen_iters") c.gen_iters = value.get<int>();
    else if (key == "samples_per_node") c.samples_per_node = value.get<int>();
    else if (key == "dim") c.dim = value.get<int>();
    else if (key == "sigma") c.sigma = value.get<double>();
    else if (key == "lambda") c.lambda = value.get<double>();
    else if (key == "lr_gen") c.lr_gen = value.get<double>();
    else if (key == "lr_disc") c.lr_disc = value.get<double>();
    else if (key == "walk_length") c.walk_length = value.get<int>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "kappa_override") {
      if (value.is_null()) c.kappa_override.reset();
      else c.kappa_override = value.get<double>();
    }
    else if (key == "batch_nodes") c.batch_nodes = value.get<int>();
    else if (key == "rho") c.rho = value.get<double>();
    else if (key == "tau") c.tau = value.get<double>();
    else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "init_scale") c.init_scale = value.get<double>();
    else if (key == "train_sigma") c.train_sigma = value.get<bool>();
    else if (key == "nc_joint") c.nc_joint = value.get<bool>();
    else if (key == "nc_lp_weight") c.nc_lp_weight = value.get<double>();
    else if (key == "lr_classifier") c.lr_classifier = value.get<double>();
    else if (key == "nc_l2") c.nc_l2 = value.get<double>();
    else throw std::runtime_error("config: unknown key `" + key + "`");
  }
  c.validate();
  return c;
}

TrainingConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require_stream(in, path, "load_config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const TrainingConfig& config) {
  return config_json(config).dump(2) + "\n";
}

void save_config(const TrainingConfig& config,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  require_stream(out, path, "save_config");
  out << config_to_json(config);
  require_stream(out, path, "save_config");
}

std::string config_hash(const TrainingConfig& config) {
  const std::string canonical = config_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void save_checkpoint(const TrainState& state,
                     const std::filesystem::path& path) {
  AtomicFile file(path);
  auto& os = file.stream();
  os.write(kCheckpointMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.gen_emb.dim));
  put<double>(os, state.k.kappa);
  put<std::uint8_t>(os, state.kappa_estimated ? 1 : 0);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.gen_emb.num_nodes()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.epoch));

  put_doubles(os, state.gen_emb.data);
  put_doubles(os, state.disc_emb.data);

  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.gen.hidden));
  put_doubles(os, state.gen.w1);
  put_doubles(os, state.gen.b1);
  put_doubles(os, state.gen.w2);
  put_doubles(os, state.gen.b2);
  put<double>(os, state.gen.sigma);
  put<double>(os, state.gen.lambda);
  put<double>(os, state.disc.rho);
  put<double>(os, state.disc.tau);

  std::ostringstream rng_text;
  state.rng.save(rng_text);
  put_string(os, rng_text.str());

  put<std::uint64_t>(os, state.history.size());
  for (const auto& rec : state.history) {
    put<std::int32_t>(os, rec.epoch);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(rec.phase));
    put<std::int32_t>(os, rec.iter);
    put<double>(os, rec.loss);
  }

  put<double>(os, state.ricci.alpha);
  put_doubles(os, state.ricci.values);
  put_doubles(os, state.epoch_seconds);

  put<std::uint64_t>(os, state.clf_class_ids.size());
  for (int id : state.clf_class_ids) put<std::int32_t>(os, id);
  put_doubles(os, state.clf_weights);

  file.commit();
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require_stream(is, path, "load_checkpoint");
  check_magic(is, kCheckpointMagic, "load_checkpoint");
  const auto version = get<std::uint32_t>(is);
  if (version != kFormatVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version");
  }
  TrainState state;
  const auto dim = static_cast<int>(get<std::uint32_t>(is));
  state.k = Curvature{get<double>(is)};
  state.kappa_estimated = get<std::uint8_t>(is) != 0;
  const auto nodes = static_cast<int>(get<std::uint32_t>(is));
  state.epoch = static_cast<int>(get<std::uint32_t>(is));

  state.gen_emb =
      EmbeddingTable(EmbeddingTable::Role::kGenerator, nodes, dim, state.k);
  state.gen_emb.data = get_doubles(is);
  state.disc_emb =
      EmbeddingTable(EmbeddingTable::Role::kDiscriminator, nodes, dim, state.k);
  state.disc_emb.data = get_doubles(is);

  const auto hidden = static_cast<int>(get<std::uint32_t>(is));
  state.gen = GeneratorParams(dim, hidden, 1.0, 1.0);
  state.gen.w1 = get_doubles(is);
  state.gen.b1 = get_doubles(is);
  state.gen.w2 = get_doubles(is);
  state.gen.b2 = get_doubles(is);
  state.gen.sigma = get<double>(is);
  state.gen.lambda = get<double>(is);
  state.disc.rho = get<double>(is);
  state.disc.tau = get<double>(is);

  std::istringstream rng_text(get_string(is));
  state.rng.load(rng_text);

  const auto history_size = get<std::uint64_t>(is);
  state.history.resize(history_size);
  for (auto& rec : state.history) {
    rec.epoch = get<std::int32_t>(is);
    rec.phase = static_cast<char>(get<std::uint8_t>(is));
    rec.iter = get<std::int32_t>(is);
    rec.loss = get<double>(is);
  }

  state.ricci.alpha = get<double>(is);
  state.ricci.values = get_doubles(is);
  state.epoch_seconds = get_doubles(is);

  const auto n_classes = get<std::uint64_t>(is);
  state.clf_class_ids.resize(n_classes);
  for (auto& id : state.clf_class_ids) id = get<std::int32_t>(is);
  state.clf_weights = get_doubles(is);

  require_stream(is, path, "load_checkpoint");
  return state;
}

void write_metrics_json(const MetricsReport& report,
                        const std::filesystem::path& path) {
  json j;
  j["task"] = report.task;
  if (report.auc.has_value()) j["auc"] = *report.auc;
  if (report.micro_f1.has_value()) j["micro_f1"] = *report.micro_f1;
  if (report.macro_f1.has_value()) j["macro_f1"] = *report.macro_f1;
  j["mean"] = report.mean;
  j["std"] = report.stddev;
  j["runtime_s"] = report.runtime_seconds;
  j["global_kappa"] = report.global_kappa;
  j["config_hash"] = report.config_hash;
  j["runs"] = report.run_values;
  std::ofstream out(path);
  require_stream(out, path, "write_metrics_json");
  out << j.dump(2) << '\n';
  require_stream(out, path, "write_metrics_json");
}

void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& fields) {
  json j;
  for (const auto& [key, value] : fields) j[key] = value;
  std::ofstream out(path);
  require_stream(out, path, "write_manifest");
  out << j.dump(2) << '\n';
  require_stream(out, path, "write_manifest");
}

namespace {

void write_pairs(const std::vector<std::pair<int, int>>& pairs,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  require_stream(out, path, "save_split");
  for (const auto& [u, v] : pairs) out << u << '\t' << v << '\n';
  require_stream(out, path, "save_split");
}

}  // namespace

void save_split(const EdgeSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_pairs(split.train_edges, dir / "train_edges.tsv");
  write_pairs(split.test_pos, dir / "test_pos.tsv");
  write_pairs(split.test_neg, dir / "test_neg.tsv");
  json j;
  j["ratio"] = split.ratio;
  j["seed"] = split.seed;
  j["counts"] = {{"train", split.train_edges.size()},
                 {"test_pos", split.test_pos.size()},
                 {"test_neg", split.test_neg.size()}};
  std::ofstream out(dir / "split.json");
  require_stream(out, dir / "split.json", "save_split");
  out << j.dump(2) << '\n';
}

}  // namespace curvgraph
