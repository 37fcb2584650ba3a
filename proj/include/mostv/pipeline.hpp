#ifndef MOSTV_PIPELINE_HPP_
#define MOSTV_PIPELINE_HPP_

#include <map>
#include <string>
#include <vector>

#include "mostv/config.hpp"

namespace mostv {

inline constexpr const char* kToolVersion = "1.0.0";

// Stage runner over one output directory. Each stage validates its inputs,
// writes outputs atomically, and records them in run_manifest.json with
// content hashes. A completed stage with unchanged inputs is skipped.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  // Returns true when the stage ran, false when it was an up-to-date no-op.
  bool generate();
  bool train(const std::string& selector = "");
  bool eval(const std::string& selector = "");
  bool analyze();
  bool plot();
  void all();

  std::vector<std::string> select_models(const std::string& selector) const;
  const ExperimentConfig& config() const { return config_; }

  // Combined content hash over every dataset file, as recorded for
  // reproducibility comparisons.
  std::string dataset_hash();

  std::string checkpoint_path(const std::string& model_id) const;
  std::string curve_path(const std::string& model_id) const;
  std::string trials_path(const std::string& model_id) const;
  std::string analysis_dir() const;
  std::string figures_dir() const;

 private:
  struct StageRecord {
    std::string config_hash;
    std::string completed_at;
    std::map<std::string, std::string> outputs;  // path relative to out_dir -> sha256
    std::map<std::string, std::string> extra;
  };

  void load_manifest();
  void save_manifest();
  bool stage_up_to_date(const std::string& stage, const std::string& config_hash) const;
  void finish_stage(const std::string& stage, const std::string& config_hash,
                    const std::vector<std::string>& output_rel_paths,
                    const std::map<std::string, std::string>& extra = {});

  ExperimentConfig config_;
  std::map<std::string, StageRecord> stages_;
  std::string cached_dataset_hash_;
};

// Writes content to path via a temp file and rename.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace mostv

#endif  // MOSTV_PIPELINE_HPP_
