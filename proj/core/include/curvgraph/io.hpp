#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "curvgraph/metrics.hpp"
#include "curvgraph/model.hpp"
#include "curvgraph/training.hpp"

namespace curvgraph {

// node_id<TAB>c0<TAB>...<TAB>c{d-1}, one row per node, full precision.
void write_embeddings_tsv(const EmbeddingTable& emb,
                          const std::filesystem::path& path);

// Binary container: magic, version, dim, kappa, node count, role, row-major
// doubles (native endianness).
void write_embeddings_binary(const EmbeddingTable& emb,
                             const std::filesystem::path& path);
EmbeddingTable read_embeddings_binary(const std::filesystem::path& path);

// epoch,phase,iter,loss with round-trippable float formatting.
void write_loss_csv(std::span<const LossRecord> history,
                    const std::filesystem::path& path);

// Config JSON mirrors TrainingConfig field-for-field; unknown keys are
// rejected, absent keys keep their defaults, kappa_override accepts null.
TrainingConfig parse_config(std::string_view json_text);
TrainingConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const TrainingConfig& config);
void save_config(const TrainingConfig& config,
                 const std::filesystem::path& path);

// FNV-1a over the canonical JSON dump; stable across runs.
std::string config_hash(const TrainingConfig& config);

// Versioned binary checkpoint of the full training state, including the rng
// stream. Written atomically (temp file + rename).
void save_checkpoint(const TrainState& state,
                     const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

void write_metrics_json(const MetricsReport& report,
                        const std::filesystem::path& path);

// Small flat manifest describing a CLI run.
void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& fields);

// Persists a split as three edge-list files plus a JSON manifest with
// {ratio, seed, counts}.
void save_split(const EdgeSplit& split, const std::filesystem::path& dir);

}  // namespace curvgraph
