#include "rogsure/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "rogsure/classify.hpp"
#include "rogsure/rng.hpp"

namespace rogsure {
namespace fs = std::filesystem;
namespace {

// ---- config parsing ---------------------------------------------------------

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    std::string item = value.substr(start, comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw InvalidArgument("config: " + key + " expects a real number, got '" + value + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("config: " + key + " expects an integer, got '" + value + "'");
  }
  return v;
}

std::uint64_t to_seed(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
    throw InvalidArgument("config: " + key + " expects an unsigned integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidArgument("config: " + key + " expects true/false, got '" + value + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(static_cast<int>(to_integer(key, item)));
  return out;
}

std::string fusion_name(FusionMethod m) { return m == FusionMethod::kSum ? "sum" : "product"; }

std::string domain_name(MedianDomain d) {
  switch (d) {
    case MedianDomain::kAll: return "all";
    case MedianDomain::kNonzero: return "nonzero";
    default: return "offdiag";
  }
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// ---- stage plumbing ---------------------------------------------------------

/// Files written by one stage, in write order.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) const { return dir_ / name; }
  void matrix(const std::string& name, const Matrix& m) {
    save_matrix_csv(path(name), m);
    files_.push_back(name);
  }
  void labels(const std::string& name, const std::vector<int>& v) {
    save_labels(path(name), v);
    files_.push_back(name);
  }
  void report(const std::string& name, const Report& r) {
    r.write(path(name));
    files_.push_back(name);
  }
  void heatmap(const std::string& name, const Matrix& w) {
    render_heatmap(w, path(name));
    files_.push_back(name);
  }
  std::vector<ManifestEntry> manifest() const {
    std::vector<ManifestEntry> out;
    for (const auto& f : files_) out.push_back({f, file_checksum(path(f))});
    return out;
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  Report r;
  for (const auto& e : entries) {
    r.set(e.file, e.volatile_content ? std::string("volatile") : "fnv1a64:" + hex64(e.checksum));
  }
  r.write(path);
}

void write_timings(const fs::path& path, const std::vector<StageTiming>& timings) {
  Report r;
  for (const auto& t : timings) r.set(t.stage + ".seconds", t.seconds);
  r.write(path);
}

/// Runs `body` as stage `name`: wraps failures with the stage name, records
/// the wall time, and writes the stage's timings and manifest files.
template <typename Body>
RunRecord run_stage(const std::string& name, const PipelineConfig& cfg, Body&& body) {
  RunRecord rec;
  const auto start = std::chrono::steady_clock::now();
  Artifacts art(cfg.out);
  try {
    cfg.validate();
    rec.config = config_snapshot(cfg);
    fs::create_directories(cfg.out);
    body(rec, art);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rec.timings.push_back({name, seconds});
  write_timings(art.path(name + "_timings.txt"), rec.timings);
  rec.manifest = art.manifest();
  rec.manifest.push_back({name + "_timings.txt", 0, true});
  write_manifest(art.path(name + "_manifest.txt"), rec.manifest);
  return rec;
}

fs::path require_file(const fs::path& p) {
  if (!fs::exists(p)) {
    throw InvalidArgument("missing upstream artifact " + p.string());
  }
  return p;
}

std::string indexed(const std::string& stem, std::size_t t) {
  return stem + "_" + std::to_string(t) + ".csv";
}

ModalityStack load_modalities(const PipelineConfig& cfg) {
  std::vector<Matrix> layers;
  for (std::size_t t = 0; t < cfg.modality_count(); ++t) {
    const fs::path p = cfg.modalities.empty() ? cfg.out / indexed("modality", t) : cfg.modalities[t];
    layers.push_back(load_matrix_csv(require_file(p)));
  }
  return ModalityStack(std::move(layers));
}

std::optional<std::vector<int>> load_truth(const PipelineConfig& cfg, Eigen::Index n) {
  fs::path p = cfg.labels;
  if (p.empty()) {
    p = cfg.out / "labels.csv";
    if (!fs::exists(p)) return std::nullopt;
  }
  auto labels = load_labels(require_file(p));
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidArgument(p.string() + " has " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(n) + " observations");
  }
  return labels;
}

std::vector<int> pick(const std::vector<int>& v, const std::vector<int>& idx) {
  std::vector<int> out;
  for (int i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
  return out;
}

/// Training columns of the fit, or every column when no split is configured.
std::vector<int> training_indices(const PipelineConfig& cfg, Eigen::Index n) {
  if (cfg.train_per_cluster > 0) {
    return load_labels(require_file(cfg.out / "split_train.csv"));
  }
  std::vector<int> all(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

/// Applies the stored global PCA bases of the fit stage (if any).
ModalityStack to_pca_space(const PipelineConfig& cfg, const ModalityStack& x) {
  std::vector<Matrix> out;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const int d = cfg.pca_dims.empty() ? 0 : cfg.pca_dims[t];
    if (d > 0) {
      const Matrix basis = load_matrix_csv(require_file(cfg.out / indexed("pca_basis", t)));
      if (basis.rows() != x[t].rows()) {
        throw InvalidArgument("stored PCA basis of modality " + std::to_string(t) +
                              " does not match the data dimension");
      }
      out.push_back(pca_project(basis, x[t]));
    } else {
      out.push_back(x[t]);
    }
  }
  return ModalityStack(std::move(out));
}

void add_eval(Report& r, const std::string& prefix, const EvalReport& e) {
  r.set(prefix + ".accuracy", e.accuracy);
  r.set(prefix + ".mapping", e.mapping);
  for (Eigen::Index i = 0; i < e.confusion.rows(); ++i) {
    std::vector<int> row;
    for (Eigen::Index j = 0; j < e.confusion.cols(); ++j) row.push_back(e.confusion(i, j));
    r.set(prefix + ".confusion." + std::to_string(i), row);
  }
  r.set(prefix + ".recall", e.recall);
}

}  // namespace

// ---- config -----------------------------------------------------------------

std::size_t PipelineConfig::modality_count() const {
  return modalities.empty() ? synth.ambient_dims.size() : modalities.size();
}

void PipelineConfig::validate() const {
  const std::size_t T = modality_count();
  if (T == 0) {
    throw InvalidArgument("config: no modalities (set 'modalities' or 'synth.ambient_dims')");
  }
  if (k < 1) throw InvalidArgument("config: k must be at least 1");
  if (!pca_dims.empty() && pca_dims.size() != T) {
    throw InvalidArgument("config: pca_dims needs one entry per modality");
  }
  if (!class_dims.empty() && class_dims.size() != T) {
    throw InvalidArgument("config: class_dims needs one entry per modality");
  }
  for (int d : pca_dims) {
    if (d < 0) throw InvalidArgument("config: pca_dims must be nonnegative");
  }
  if (train_per_cluster < 0) throw InvalidArgument("config: train_per_cluster must be nonnegative");
  if (theorem_budget < 1) throw InvalidArgument("config: theorem.budget must be positive");
  if (theorem_starts < 1) throw InvalidArgument("config: theorem.starts must be positive");
  if (!(detection_tol >= 0.0)) throw InvalidArgument("config: theorem.tol_rel must be nonnegative");
  if (spectral.restarts < 1) throw InvalidArgument("config: spectral.restarts must be positive");
  solver.validate();
}

PipelineConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  PipelineConfig cfg;
  std::optional<std::vector<int>> per_cluster;
  for (const auto& [key, value] : kv) {
    if (key == "modalities") {
      cfg.modalities.clear();
      for (const auto& p : split_list(value)) cfg.modalities.emplace_back(p);
    } else if (key == "labels") {
      cfg.labels = value;
    } else if (key == "pca_dims") {
      cfg.pca_dims = to_int_list(key, value);
    } else if (key == "pca_center") {
      cfg.pca_center = to_bool(key, value);
    } else if (key == "class_dims") {
      cfg.class_dims = to_int_list(key, value);
    } else if (key == "classify_recovered") {
      cfg.classify_recovered = to_bool(key, value);
    } else if (key == "fusion") {
      if (value == "sum") cfg.fusion = FusionMethod::kSum;
      else if (value == "product") cfg.fusion = FusionMethod::kProduct;
      else throw InvalidArgument("config: fusion must be 'sum' or 'product', got '" + value + "'");
    } else if (key == "median_domain") {
      if (value == "all") cfg.median_domain = MedianDomain::kAll;
      else if (value == "offdiag") cfg.median_domain = MedianDomain::kOffDiagonal;
      else if (value == "nonzero") cfg.median_domain = MedianDomain::kNonzero;
      else throw InvalidArgument("config: median_domain must be all, offdiag or nonzero");
    } else if (key == "k") {
      cfg.k = static_cast<int>(to_integer(key, value));
    } else if (key == "seed") {
      cfg.seed = to_seed(key, value);
    } else if (key == "train_per_cluster") {
      cfg.train_per_cluster = static_cast<int>(to_integer(key, value));
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "solver.rho") {
      cfg.solver.rho = to_real(key, value);
    } else if (key == "solver.lambda") {
      if (value == "auto") cfg.solver.lambda.reset();
      else cfg.solver.lambda = to_real(key, value);
    } else if (key == "solver.mu0") {
      cfg.solver.mu0 = to_real(key, value);
    } else if (key == "solver.growth") {
      cfg.solver.growth = to_real(key, value);
    } else if (key == "solver.mu_max") {
      cfg.solver.mu_max = to_real(key, value);
    } else if (key == "solver.eta1") {
      if (value == "auto") cfg.solver.eta1.reset();
      else cfg.solver.eta1 = to_real(key, value);
    } else if (key == "solver.eta2") {
      if (value == "auto") cfg.solver.eta2.reset();
      else cfg.solver.eta2 = to_real(key, value);
    } else if (key == "solver.max_iters") {
      cfg.solver.max_iters = static_cast<int>(to_integer(key, value));
    } else if (key == "solver.tol_residual") {
      cfg.solver.tol_residual = to_real(key, value);
    } else if (key == "solver.tol_change") {
      cfg.solver.tol_change = to_real(key, value);
    } else if (key == "solver.normalize") {
      cfg.solver.normalize = to_bool(key, value);
    } else if (key == "spectral.restarts") {
      cfg.spectral.restarts = static_cast<int>(to_integer(key, value));
    } else if (key == "spectral.normalize_rows") {
      cfg.spectral.normalize_rows = to_bool(key, value);
    } else if (key == "spectral.convention") {
      if (value == "similarity") cfg.spectral.convention = EmbeddingConvention::kSimilarityLargest;
      else if (value == "laplacian") cfg.spectral.convention = EmbeddingConvention::kLaplacianSmallest;
      else throw InvalidArgument("config: spectral.convention must be similarity or laplacian");
    } else if (key == "spectral.affinity") {
      if (value == "magnitude") cfg.spectral.affinity = AffinityRule::kMagnitude;
      else if (value == "raw") cfg.spectral.affinity = AffinityRule::kRaw;
      else throw InvalidArgument("config: spectral.affinity must be magnitude or raw");
    } else if (key == "synth.subspaces") {
      cfg.synth.subspaces = static_cast<int>(to_integer(key, value));
    } else if (key == "synth.ambient_dims") {
      cfg.synth.ambient_dims = to_int_list(key, value);
    } else if (key == "synth.intrinsic_dims") {
      cfg.synth.intrinsic_dims = to_int_list(key, value);
    } else if (key == "synth.points_per_cluster") {
      per_cluster = to_int_list(key, value);
    } else if (key == "synth.corruption_fraction") {
      cfg.synth.corruption_fraction = to_real(key, value);
    } else if (key == "synth.corruption_amplitude") {
      cfg.synth.corruption_amplitude = to_real(key, value);
    } else if (key == "synth.min_angle_deg") {
      cfg.synth.min_angle = to_real(key, value) * std::numbers::pi / 180.0;
    } else if (key == "theorem.budget") {
      cfg.theorem_budget = static_cast<int>(to_integer(key, value));
    } else if (key == "theorem.starts") {
      cfg.theorem_starts = static_cast<int>(to_integer(key, value));
    } else if (key == "theorem.tol_rel") {
      cfg.detection_tol = to_real(key, value);
    } else {
      throw InvalidArgument("config: unknown key '" + key + "'");
    }
  }
  if (per_cluster) {
    // A single value applies to every subspace.
    cfg.synth.points_per_cluster = per_cluster->size() == 1
                                       ? std::vector<int>(static_cast<std::size_t>(
                                                              std::max(cfg.synth.subspaces, 0)),
                                                          per_cluster->front())
                                       : *per_cluster;
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  return config_from_key_values(load_key_values(path));
}

Report config_snapshot(const PipelineConfig& cfg) {
  Report r;
  std::string mods;
  for (std::size_t i = 0; i < cfg.modalities.size(); ++i) {
    mods += (i ? "," : "") + cfg.modalities[i].string();
  }
  r.set("modalities", mods);
  r.set("labels", cfg.labels.string());
  r.set("pca_dims", join(cfg.pca_dims));
  r.set("pca_center", cfg.pca_center);
  r.set("class_dims", join(cfg.class_dims));
  r.set("classify_recovered", cfg.classify_recovered);
  r.set("fusion", fusion_name(cfg.fusion));
  r.set("median_domain", domain_name(cfg.median_domain));
  r.set("k", cfg.k);
  r.set("seed", std::to_string(cfg.seed));
  r.set("train_per_cluster", cfg.train_per_cluster);
  r.set("solver.rho", cfg.solver.rho);
  r.set("solver.lambda", cfg.solver.lambda ? format_real(*cfg.solver.lambda) : "auto");
  r.set("solver.mu0", cfg.solver.mu0);
  r.set("solver.growth", cfg.solver.growth);
  r.set("solver.mu_max", cfg.solver.mu_max);
  r.set("solver.eta1", cfg.solver.eta1 ? format_real(*cfg.solver.eta1) : "auto");
  r.set("solver.eta2", cfg.solver.eta2 ? format_real(*cfg.solver.eta2) : "auto");
  r.set("solver.max_iters", cfg.solver.max_iters);
  r.set("solver.tol_residual", cfg.solver.tol_residual);
  r.set("solver.tol_change", cfg.solver.tol_change);
  r.set("solver.normalize", cfg.solver.normalize);
  r.set("spectral.restarts", cfg.spectral.restarts);
  r.set("spectral.normalize_rows", cfg.spectral.normalize_rows);
  r.set("spectral.convention",
        cfg.spectral.convention == EmbeddingConvention::kSimilarityLargest ? "similarity"
                                                                            : "laplacian");
  r.set("spectral.affinity", cfg.spectral.affinity == AffinityRule::kMagnitude ? "magnitude" : "raw");
  r.set("synth.subspaces", cfg.synth.subspaces);
  r.set("synth.ambient_dims", join(cfg.synth.ambient_dims));
  r.set("synth.intrinsic_dims", join(cfg.synth.intrinsic_dims));
  r.set("synth.points_per_cluster", join(cfg.synth.points_per_cluster));
  r.set("synth.corruption_fraction", cfg.synth.corruption_fraction);
  r.set("synth.corruption_amplitude", cfg.synth.corruption_amplitude);
  r.set("synth.min_angle_deg",
        cfg.synth.min_angle ? format_real(*cfg.synth.min_angle * 180.0 / std::numbers::pi) : "none");
  r.set("theorem.budget", cfg.theorem_budget);
  r.set("theorem.starts", cfg.theorem_starts);
  r.set("theorem.tol_rel", cfg.detection_tol);
  return r;
}

FusedCoefficients fuse_coefficients(const std::vector<Matrix>& ws, FusionMethod method,
                                    MedianDomain domain) {
  if (ws.size() < 2) {
    throw InvalidArgument("fusion needs at least two coefficient matrices, got " +
                          std::to_string(ws.size()));
  }
  if (method == FusionMethod::kSum) return fuse_sum(ws);
  std::vector<Matrix> binary;
  for (const auto& w : ws) binary.push_back(binarize_by_median(w, domain));
  return fuse_product(binary);
}

// ---- stages -----------------------------------------------------------------

RunRecord cmd_synth(const PipelineConfig& cfg) {
  return run_stage("synth", cfg, [&](RunRecord& rec, Artifacts& art) {
    UoSSpec spec = cfg.synth;
    spec.seed = derive_seed(cfg.seed, "synth");
    const UoSGroundTruth gt = generate_uos(spec);
    for (std::size_t t = 0; t < gt.observed.size(); ++t) {
      art.matrix(indexed("modality", t), gt.observed[t]);
    }
    for (std::size_t t = 0; t < gt.clean.size(); ++t) art.matrix(indexed("clean", t), gt.clean[t]);
    for (std::size_t t = 0; t < gt.corruption_mask.size(); ++t) {
      art.matrix(indexed("mask", t), gt.corruption_mask[t]);
    }
    for (std::size_t I = 0; I < gt.bases.size(); ++I) {
      for (std::size_t t = 0; t < gt.bases[I].size(); ++t) {
        art.matrix("basis_" + std::to_string(I) + "_" + std::to_string(t) + ".csv",
                   gt.bases[I][t]);
      }
    }
    art.labels("labels.csv", gt.labels);

    const AngleReport angles = min_subspace_angle(gt.bases);
    Report& r = rec.summary;
    r.set("stage", "synth");
    r.set("observations", static_cast<int>(gt.labels.size()));
    r.set("modalities", static_cast<int>(gt.observed.size()));
    r.set("subspaces", spec.subspaces);
    r.set("seed", std::to_string(spec.seed));
    std::vector<int> planted;
    for (const auto& m : gt.corruption_mask) planted.push_back(static_cast<int>(m.sum()));
    r.set("corrupted_entries", planted);
    std::vector<double> degrees;
    for (double th : angles.theta) degrees.push_back(th * 180.0 / std::numbers::pi);
    r.set("min_angle_deg", degrees);
    art.report("synth_report.txt", r);
  });
}

RunRecord cmd_fit(const PipelineConfig& cfg) {
  return run_stage("fit", cfg, [&](RunRecord& rec, Artifacts& art) {
    const ModalityStack x = load_modalities(cfg);
    std::vector<int> train;
    if (cfg.train_per_cluster > 0) {
      const auto truth = load_truth(cfg, x.cols());
      if (!truth) {
        throw InvalidArgument("train_per_cluster > 0 needs ground-truth labels for the split");
      }
      auto [tr, te] = stratified_split(*truth, cfg.train_per_cluster, derive_seed(cfg.seed, "split"));
      train = std::move(tr);
      art.labels("split_train.csv", train);
      art.labels("split_test.csv", te);
    } else {
      train = training_indices(cfg, x.cols());
    }
    const ModalityStack fit_data = select_columns(x, train);

    std::vector<Matrix> projected;
    for (std::size_t t = 0; t < fit_data.size(); ++t) {
      const int d = cfg.pca_dims.empty() ? 0 : cfg.pca_dims[t];
      if (d > 0) {
        const Matrix basis = pca_basis(fit_data[t], d, cfg.pca_center);
        art.matrix(indexed("pca_basis", t), basis);
        projected.push_back(pca_project(basis, fit_data[t]));
      } else {
        projected.push_back(fit_data[t]);
      }
    }
    const ModalityStack data(std::move(projected));
    const SolverResult res = fit_rogsure(data, cfg.solver);

    for (std::size_t t = 0; t < data.size(); ++t) {
      art.matrix(indexed("W", t), res.W[t]);
      art.matrix(indexed("E", t), res.E[t]);
      art.matrix(indexed("L", t), res.L[t]);
      art.heatmap("W_" + std::to_string(t) + ".svg", res.W[t]);
    }
    Matrix hist(static_cast<Eigen::Index>(4 + data.size()),
                static_cast<Eigen::Index>(res.history.size()));
    for (std::size_t i = 0; i < res.history.size(); ++i) {
      const auto& h = res.history[i];
      const auto c = static_cast<Eigen::Index>(i);
      hist(0, c) = static_cast<double>(i + 1);
      hist(1, c) = h.mu;
      hist(2, c) = h.objective;
      hist(3, c) = h.w_change;
      for (std::size_t t = 0; t < h.residuals.size(); ++t) {
        hist(static_cast<Eigen::Index>(4 + t), c) = h.residuals[t];
      }
    }
    art.matrix("residuals.csv", hist);
    rec.history = res.history;

    Report& r = rec.summary;
    r.set("stage", "fit");
    r.set("observations", static_cast<int>(train.size()));
    r.set("modalities", static_cast<int>(data.size()));
    std::vector<int> dims;
    for (const auto& layer : data) dims.push_back(static_cast<int>(layer.rows()));
    r.set("dims", dims);
    r.set("lambda", cfg.solver.resolved_lambda(data));
    r.set("converged", res.converged);
    r.set("diverged", res.diverged);
    r.set("iterations", res.iters_used);
    r.set("final_residuals", res.final_residuals);
    r.set("objective", res.objective);
    art.report("fit_report.txt", r);
  });
}

RunRecord cmd_fuse(const PipelineConfig& cfg) {
  return run_stage("fuse", cfg, [&](RunRecord& rec, Artifacts& art) {
    const std::size_t T = cfg.modality_count();
    if (T < 2) {
      throw InvalidArgument("fusion needs at least two coefficient matrices, got " +
                            std::to_string(T));
    }
    std::vector<Matrix> ws;
    for (std::size_t t = 0; t < T; ++t) {
      ws.push_back(load_matrix_csv(require_file(cfg.out / indexed("W", t))));
    }
    const FusedCoefficients fused = fuse_coefficients(ws, cfg.fusion, cfg.median_domain);
    std::vector<double> medians;
    if (cfg.fusion == FusionMethod::kProduct) {
      for (std::size_t t = 0; t < T; ++t) {
        medians.push_back(median_magnitude(ws[t], cfg.median_domain));
        art.matrix(indexed("W_bin", t), binarize_by_median(ws[t], cfg.median_domain));
      }
    }
    art.matrix("W_total.csv", fused.total);
    art.heatmap("W_total.svg", fused.total);

    Report& r = rec.summary;
    r.set("stage", "fuse");
    r.set("method", fusion_name(fused.method));
    r.set("sources", fused.source_count);
    if (!medians.empty()) {
      r.set("median_domain", domain_name(cfg.median_domain));
      r.set("medians", medians);
    }
    r.set("nonzeros", static_cast<int>((fused.total.array() != 0.0).count()));
    art.report("fuse_report.txt", r);
  });
}

RunRecord cmd_cluster(const PipelineConfig& cfg) {
  return run_stage("cluster", cfg, [&](RunRecord& rec, Artifacts& art) {
    const fs::path input = cfg.modality_count() >= 2 ? cfg.out / "W_total.csv"
                                                     : cfg.out / indexed("W", 0);
    const Matrix w = load_matrix_csv(require_file(input));
    const ClusterAssignment ca = spectral_cluster(w, cfg.k, derive_seed(cfg.seed, "cluster"),
                                                  cfg.spectral);
    art.labels("cluster_labels.csv", ca.labels);

    Report& r = rec.summary;
    r.set("stage", "cluster");
    r.set("input", input.filename().string());
    r.set("k", ca.k);
    r.set("observations", static_cast<int>(ca.labels.size()));
    r.set("eigenvalues", std::vector<double>(ca.eigenvalues.data(),
                                             ca.eigenvalues.data() + ca.eigenvalues.size()));
    r.set("degenerate_gap", ca.degenerate_gap);
    r.set("empty_clusters", ca.empty_clusters);

    // Score against the ground truth of the clustered columns when known.
    const ModalityStack x = load_modalities(cfg);
    if (const auto truth = load_truth(cfg, x.cols())) {
      const auto idx = training_indices(cfg, x.cols());
      if (idx.size() != ca.labels.size()) {
        throw InvalidArgument("coefficient matrix size does not match the fitted columns");
      }
      const EvalReport e = clustering_accuracy(ca.labels, pick(*truth, idx));
      add_eval(r, "clustering", e);
      rec.clustering = e;
    }
    art.report("cluster_report.txt", r);
  });
}

RunRecord cmd_classify(const PipelineConfig& cfg) {
  return run_stage("classify", cfg, [&](RunRecord& rec, Artifacts& art) {
    if (cfg.train_per_cluster < 1) {
      throw InvalidArgument("classification needs a train/test split (train_per_cluster > 0)");
    }
    const ModalityStack x = load_modalities(cfg);
    const auto train = load_labels(require_file(cfg.out / "split_train.csv"));
    const auto test = load_labels(require_file(cfg.out / "split_test.csv"));
    const auto clusters = load_labels(require_file(cfg.out / "cluster_labels.csv"));
    if (clusters.size() != train.size()) {
      throw InvalidArgument("cluster labels do not match the training split");
    }
    const ModalityStack space = to_pca_space(cfg, x);

    ModalityStack train_data = select_columns(space, train);
    if (cfg.classify_recovered) {
      std::vector<Matrix> layers;
      for (std::size_t t = 0; t < space.size(); ++t) {
        layers.push_back(load_matrix_csv(require_file(cfg.out / indexed("L", t))));
      }
      train_data = ModalityStack(std::move(layers));
      if (train_data.cols() != static_cast<Eigen::Index>(train.size())) {
        throw InvalidArgument("recovered training columns do not match the split");
      }
    }
    std::vector<int> dims = cfg.class_dims;
    if (dims.empty()) {
      for (std::size_t t = 0; t < space.size(); ++t) {
        const int d = cfg.pca_dims.empty() ? 0 : cfg.pca_dims[t];
        dims.push_back(d > 0 ? d : static_cast<int>(space[t].rows()));
      }
    }
    const ClusterModel model =
        build_cluster_model(train_data, clusters, dims, cfg.solver.normalize, cfg.pca_center);
    const auto results = classify_batch(model, select_columns(space, test));
    const auto predicted = predicted_labels(results);
    art.labels("test_predictions.csv", predicted);

    Report& r = rec.summary;
    r.set("stage", "classify");
    r.set("train_points", static_cast<int>(train.size()));
    r.set("test_points", static_cast<int>(test.size()));
    r.set("class_dims", model.used_dims);
    r.set("source", cfg.classify_recovered ? "recovered" : "observed");
    for (std::size_t i = 0; i < model.diagnostics.size(); ++i) {
      r.set("warning." + std::to_string(i), model.diagnostics[i]);
    }
    if (const auto truth = load_truth(cfg, x.cols())) {
      // Cluster ids are matched to classes on the training side only.
      const EvalReport train_eval = clustering_accuracy(clusters, pick(*truth, train));
      const auto test_truth = pick(*truth, test);
      const double acc = mapped_accuracy(predicted, test_truth, train_eval.mapping);
      r.set("train_clustering_accuracy", train_eval.accuracy);
      r.set("test_accuracy", acc);
      r.set("accuracy_gap", train_eval.accuracy - acc);
      const CountMatrix conf = confusion_matrix(predicted, test_truth, train_eval.mapping);
      for (Eigen::Index i = 0; i < conf.rows(); ++i) {
        std::vector<int> row;
        for (Eigen::Index j = 0; j < conf.cols(); ++j) row.push_back(conf(i, j));
        r.set("test_confusion." + std::to_string(i), row);
      }
      rec.clustering = train_eval;
      rec.classification_accuracy = acc;
    }
    art.report("classify_report.txt", r);
  });
}

RunRecord cmd_check_theorem(const PipelineConfig& cfg) {
  return run_stage("check_theorem", cfg, [&](RunRecord& rec, Artifacts& art) {
    UoSGroundTruth gt;
    std::vector<Matrix> clean;
    for (std::size_t t = 0; t < cfg.modality_count(); ++t) {
      clean.push_back(load_matrix_csv(require_file(cfg.out / indexed("clean", t))));
      gt.corruption_mask.push_back(load_matrix_csv(require_file(cfg.out / indexed("mask", t))));
    }
    gt.clean = ModalityStack(std::move(clean));
    gt.observed = gt.clean;
    gt.labels = load_labels(require_file(cfg.out / "labels.csv"));
    int P = 0;
    for (int l : gt.labels) P = std::max(P, l + 1);
    for (int I = 0; I < P; ++I) {
      std::vector<Matrix> per_modality;
      for (std::size_t t = 0; t < gt.clean.size(); ++t) {
        per_modality.push_back(load_matrix_csv(require_file(
            cfg.out / ("basis_" + std::to_string(I) + "_" + std::to_string(t) + ".csv"))));
      }
      gt.bases.push_back(std::move(per_modality));
    }

    InradiusOptions opts;
    opts.budget = cfg.theorem_budget;
    opts.starts = cfg.theorem_starts;
    opts.seed = derive_seed(cfg.seed, "theorem");
    const TheoremReport th = evaluate_theorem(gt, opts);

    // The theorem concerns the noiseless program without the l1 term.
    SolverConfig clean_cfg = cfg.solver;
    clean_cfg.rho = 0.0;
    const SolverResult res = fit_clean(gt.clean, clean_cfg);
    const DetectionReport det = check_detection_property(res.W, gt.labels, cfg.detection_tol);
    for (std::size_t t = 0; t < res.W.size(); ++t) art.matrix(indexed("W_clean", t), res.W[t]);

    Report& r = rec.summary;
    r.set("stage", "check_theorem");
    r.set("max_cos_sq", th.max_cos_sq);
    r.set("min_r_sq_lower", th.min_r_sq_lower);
    r.set("min_r_sq_upper", th.min_r_sq_upper);
    r.set("margin", th.margin);
    r.set("feasible", th.feasible);
    r.set("condition_holds", th.condition_holds);
    r.set("worst_anchor", th.worst_anchor);
    r.set("clean_fit.converged", res.converged);
    r.set("clean_fit.iterations", res.iters_used);
    r.set("detection.tol_rel", cfg.detection_tol);
    r.set("detection.holds", det.holds);
    r.set("detection.worst_violation", det.worst_violation);
    r.set("detection.max_magnitude", det.max_magnitude);
    art.report("theorem_report.txt", r);
    rec.theorem = th;
    rec.detection = det;
  });
}

RunRecord cmd_eval(const PipelineConfig& cfg) {
  RunRecord rec;
  const auto absorb = [&](RunRecord&& stage) {
    rec.timings.insert(rec.timings.end(), stage.timings.begin(), stage.timings.end());
    rec.manifest.insert(rec.manifest.end(), stage.manifest.begin(), stage.manifest.end());
    return std::move(stage);
  };
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw StageError("eval", e.what());
  }
  rec.config = config_snapshot(cfg);
  if (cfg.modalities.empty()) absorb(cmd_synth(cfg));
  const RunRecord fit = absorb(cmd_fit(cfg));
  rec.history = fit.history;
  if (cfg.modality_count() >= 2) absorb(cmd_fuse(cfg));
  const RunRecord cl = absorb(cmd_cluster(cfg));
  rec.clustering = cl.clustering;
  std::optional<RunRecord> cls;
  if (cfg.train_per_cluster > 0) {
    cls = absorb(cmd_classify(cfg));
    rec.classification_accuracy = cls->classification_accuracy;
  }

  Artifacts art(cfg.out);
  Report& r = rec.summary;
  r.set("stage", "eval");
  for (const auto& [k, v] : fit.summary.entries()) {
    if (k != "stage") r.set("fit." + k, v);
  }
  for (const auto& [k, v] : cl.summary.entries()) {
    if (k != "stage") r.set("cluster." + k, v);
  }
  if (cls) {
    for (const auto& [k, v] : cls->summary.entries()) {
      if (k != "stage") r.set("classify." + k, v);
    }
  }
  try {
    art.report("eval_report.txt", r);
    art.report("eval_config.txt", rec.config);
    write_timings(art.path("eval_timings.txt"), rec.timings);
    for (const auto& e : art.manifest()) rec.manifest.push_back(e);
    rec.manifest.push_back({"eval_timings.txt", 0, true});
    write_manifest(art.path("eval_manifest.txt"), rec.manifest);
  } catch (const std::exception& e) {
    throw StageError("eval", e.what());
  }
  return rec;
}

}  // namespace rogsure
