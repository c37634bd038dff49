#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rogsure/clustering.hpp"
#include "rogsure/fusion.hpp"
#include "rogsure/io.hpp"
#include "rogsure/metrics.hpp"
#include "rogsure/solver.hpp"
#include "rogsure/synth.hpp"
#include "rogsure/theory.hpp"

namespace rogsure {

/// A failure inside one pipeline stage; what() starts with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  /// Observation CSVs, one per modality. Empty means the synth stage's output
  /// in `out`.
  std::vector<std::filesystem::path> modalities;
  /// Ground-truth labels; empty means `out/labels.csv` when present.
  std::filesystem::path labels;
  /// Global PCA dimension per modality; 0 keeps the raw coordinates.
  std::vector<int> pca_dims;
  bool pca_center = true;
  /// Per-cluster subspace dimension of the classifier; empty falls back to
  /// pca_dims, then to the data dimension (clipped to the cluster size).
  std::vector<int> class_dims;
  /// Build the classifier from the solver's recovered training columns
  /// (L = X - E) instead of the observed ones.
  bool classify_recovered = false;
  SolverConfig solver;
  FusionMethod fusion = FusionMethod::kProduct;
  MedianDomain median_domain = MedianDomain::kOffDiagonal;
  SpectralOptions spectral;
  int k = 0;
  std::uint64_t seed = 0;
  /// Training columns per true cluster; 0 fits on everything and disables
  /// the classify stage.
  int train_per_cluster = 0;
  std::filesystem::path out = "out";

  UoSSpec synth;  // seed is derived from `seed`, not read from here
  int theorem_budget = 2000;
  int theorem_starts = 32;
  double detection_tol = 1e-5;

  void validate() const;
  std::size_t modality_count() const;
};

/// Builds a config from flat key-value pairs; unknown keys are rejected.
PipelineConfig config_from_key_values(const std::map<std::string, std::string>& kv);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every setting in a fixed order, for reports.
Report config_snapshot(const PipelineConfig& cfg);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ManifestEntry {
  std::string file;  // relative to the output directory
  std::uint64_t checksum = 0;
  /// Wall-clock logs differ between runs; they are listed without a checksum
  /// so that the manifest itself stays reproducible.
  bool volatile_content = false;
};

struct RunRecord {
  Report config;
  std::vector<StageTiming> timings;
  std::vector<IterationRecord> history;
  std::optional<EvalReport> clustering;
  std::optional<double> classification_accuracy;
  std::optional<TheoremReport> theorem;
  std::optional<DetectionReport> detection;
  std::vector<ManifestEntry> manifest;
  /// Key-value summary of the last stage run.
  Report summary;
};

RunRecord cmd_synth(const PipelineConfig& cfg);
RunRecord cmd_fit(const PipelineConfig& cfg);
RunRecord cmd_fuse(const PipelineConfig& cfg);
RunRecord cmd_cluster(const PipelineConfig& cfg);
RunRecord cmd_classify(const PipelineConfig& cfg);
RunRecord cmd_check_theorem(const PipelineConfig& cfg);
/// synth (when no input files are configured) -> fit (PCA first) -> fuse ->
/// cluster -> classify (when a split is configured), then one summary report.
RunRecord cmd_eval(const PipelineConfig& cfg);

/// The per-modality coefficient matrices of a multi-modality fit combined
/// by `method`. Fewer than two inputs are rejected.
FusedCoefficients fuse_coefficients(const std::vector<Matrix>& ws, FusionMethod method,
                                    MedianDomain domain);

}  // namespace rogsure
