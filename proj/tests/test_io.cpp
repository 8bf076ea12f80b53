#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvgraph/io.hpp"

using namespace curvgraph;

namespace {

std::filesystem::path temp_dir() {
  const auto dir =
      std::filesystem::temp_directory_path() / "curvgraph_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("config json round trip") {
  TrainingConfig cfg;
  cfg.epochs = 42;
  cfg.sigma = 0.25;
  cfg.kappa_override = -1.25;
  cfg.batch_nodes = 128;
  cfg.train_sigma = true;

  const std::string text = config_to_json(cfg);
  const TrainingConfig back = parse_config(text);
  CHECK(back.epochs == 42);
  CHECK(back.sigma == 0.25);
  CHECK(back.kappa_override.has_value());
  CHECK(*back.kappa_override == -1.25);
  CHECK(back.batch_nodes == 128);
  CHECK(back.train_sigma);

  SUBCASE("null kappa_override means estimate") {
    const TrainingConfig c = parse_config(R"({"kappa_override": null})");
    CHECK_FALSE(c.kappa_override.has_value());
  }
  SUBCASE("missing keys keep defaults") {
    const TrainingConfig c = parse_config(R"({"epochs": 7})");
    CHECK(c.epochs == 7);
    CHECK(c.dim == 16);
    CHECK(c.disc_iters == 10);
    CHECK(c.gen_iters == 10);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS((void)parse_config(R"({"epochz": 7})"));
  }
  SUBCASE("invalid values are rejected through validate") {
    CHECK_THROWS((void)parse_config(R"({"dim": 0})"));
  }
}

TEST_CASE("config hash is stable and sensitive") {
  TrainingConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.epochs += 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("loss csv format") {
  const std::vector<LossRecord> history = {
      {0, 'D', 0, 1.5}, {0, 'G', 0, -0.25}, {1, 'D', 1, 0.125}};
  const auto path = temp_dir() / "losses.csv";
  write_loss_csv(history, path);
  CHECK(slurp(path) ==
        "epoch,phase,iter,loss\n0,D,0,1.5\n0,G,0,-0.25\n1,D,1,0.125\n");
  std::filesystem::remove(path);
}

TEST_CASE("embedding containers round trip") {
  const Curvature k{-1.0};
  EmbeddingTable emb(EmbeddingTable::Role::kDiscriminator, 7, 3, k);
  Rng rng(2);
  emb.init_random(0.3, rng);

  const auto dir = temp_dir();
  SUBCASE("binary") {
    const auto path = dir / "emb.bin";
    write_embeddings_binary(emb, path);
    const EmbeddingTable back = read_embeddings_binary(path);
    CHECK(back.dim == 3);
    CHECK(back.num_nodes() == 7);
    CHECK(back.k.kappa == k.kappa);
    CHECK(back.role == EmbeddingTable::Role::kDiscriminator);
    CHECK(back.data == emb.data);
    CHECK_FALSE(std::filesystem::exists(dir / "emb.bin.tmp"));
    std::filesystem::remove(path);
  }
  SUBCASE("tsv has one row per node with full precision") {
    const auto path = dir / "emb.tsv";
    write_embeddings_tsv(emb, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 7);
    std::filesystem::remove(path);
  }
}

TEST_CASE("checkpoint round trips bit-exactly and continues the rng") {
  Graph g(8);
  for (int i = 0; i < 8; ++i) g.add_edge(i, (i + 1) % 8);
  TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.disc_iters = 2;
  cfg.gen_iters = 2;
  cfg.samples_per_node = 2;
  cfg.dim = 3;
  cfg.seed = 13;
  TrainState state = train(g, cfg);

  const auto path = temp_dir() / "ckpt.bin";
  save_checkpoint(state, path);
  TrainState back = load_checkpoint(path);

  CHECK(back.epoch == state.epoch);
  CHECK(back.k.kappa == state.k.kappa);
  CHECK(back.kappa_estimated == state.kappa_estimated);
  CHECK(back.gen_emb.data == state.gen_emb.data);
  CHECK(back.disc_emb.data == state.disc_emb.data);
  CHECK(back.gen.w1 == state.gen.w1);
  CHECK(back.gen.b1 == state.gen.b1);
  CHECK(back.gen.w2 == state.gen.w2);
  CHECK(back.gen.b2 == state.gen.b2);
  CHECK(back.gen.sigma == state.gen.sigma);
  CHECK(back.disc.rho == state.disc.rho);
  CHECK(back.disc.tau == state.disc.tau);
  CHECK(back.ricci.values == state.ricci.values);
  CHECK(back.epoch_seconds == state.epoch_seconds);
  REQUIRE(back.history.size() == state.history.size());
  for (std::size_t i = 0; i < back.history.size(); ++i) {
    CHECK(back.history[i].loss == state.history[i].loss);
    CHECK(back.history[i].phase == state.history[i].phase);
  }
  // The rng stream continues identically.
  CHECK(back.rng == state.rng);
  CHECK(back.rng.next_u64() == state.rng.next_u64());
  CHECK(back.rng.next_u64() == state.rng.next_u64());
  std::filesystem::remove(path);
}

TEST_CASE("split persistence") {
  Graph g(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) g.add_edge(i, j);
  }
  const EdgeSplit split = split_edges(g, 0.4, 5);
  const auto dir = temp_dir() / "split_out";
  save_split(split, dir);
  CHECK(std::filesystem::exists(dir / "train_edges.tsv"));
  CHECK(std::filesystem::exists(dir / "test_pos.tsv"));
  CHECK(std::filesystem::exists(dir / "test_neg.tsv"));
  const std::string manifest = slurp(dir / "split.json");
  CHECK(manifest.find("\"ratio\"") != std::string::npos);
  CHECK(manifest.find("\"seed\"") != std::string::npos);
  const Graph train = load_edge_list(dir / "train_edges.tsv", nullptr, 10);
  CHECK(static_cast<std::size_t>(train.num_edges()) ==
        split.train_edges.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest writer") {
  const auto path = temp_dir() / "manifest.json";
  write_manifest(path, {{"command", "train"}, {"seed", "7"}});
  const std::string text = slurp(path);
  CHECK(text.find("\"command\": \"train\"") != std::string::npos);
  CHECK(text.find("\"seed\": \"7\"") != std::string::npos);
  std::filesystem::remove(path);
}
