#include "mostv/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mostv/analysis.hpp"
#include "mostv/csv.hpp"
#include "mostv/errors.hpp"
#include "mostv/sha256.hpp"
#include "mostv/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mostv {

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::string train_config_fingerprint(const TrainConfig& t) {
  json j;
  j["family"] = t.family;
  j["duration"] = t.duration_level;
  j["lr"] = t.learning_rate;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience_epochs;
  j["eval_every"] = t.eval_every;
  j["batch"] = t.batch_size;
  j["clip"] = t.grad_clip_norm;
  j["baseline"] = t.ram_baseline;
  j["mc"] = t.mc_samples;
  j["seed"] = t.seed;
  if (t.ram_config) j["location_std"] = t.ram_config->location_std;
  return j.dump();
}

double parse_or_nan(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write: " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

Pipeline::Pipeline(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  fs::create_directories(config_.out_dir);
  load_manifest();
}

std::string Pipeline::checkpoint_path(const std::string& model_id) const {
  return config_.out_dir + "/models/" + model_id + "/checkpoint.bin";
}
std::string Pipeline::curve_path(const std::string& model_id) const {
  return config_.out_dir + "/models/" + model_id + "/curve.csv";
}
std::string Pipeline::trials_path(const std::string& model_id) const {
  return config_.out_dir + "/trials/" + model_id + ".csv";
}
std::string Pipeline::analysis_dir() const { return config_.out_dir + "/analysis"; }
std::string Pipeline::figures_dir() const { return config_.out_dir + "/figures"; }

void Pipeline::load_manifest() {
  stages_.clear();
  const std::string path = config_.out_dir + "/run_manifest.json";
  std::ifstream in(path);
  if (!in) return;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return;
  for (auto& [name, rec] : j.value("stages", json::object()).items()) {
    StageRecord r;
    r.config_hash = rec.value("config_hash", "");
    r.completed_at = rec.value("completed_at", "");
    for (auto& [p, h] : rec.value("outputs", json::object()).items())
      r.outputs[p] = h.get<std::string>();
    for (auto& [k, v] : rec.value("extra", json::object()).items())
      r.extra[k] = v.get<std::string>();
    stages_[name] = std::move(r);
  }
}

void Pipeline::save_manifest() {
  json j;
  j["schema_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["config"] = json::parse(config_.to_json());
  json stages = json::object();
  for (const auto& [name, r] : stages_) {
    json rec;
    rec["config_hash"] = r.config_hash;
    rec["completed_at"] = r.completed_at;
    rec["outputs"] = r.outputs;
    rec["extra"] = r.extra;
    stages[name] = rec;
  }
  j["stages"] = stages;
  write_text_atomic(config_.out_dir + "/run_manifest.json", j.dump(2) + "\n");
}

bool Pipeline::stage_up_to_date(const std::string& stage,
                                const std::string& config_hash) const {
  const auto it = stages_.find(stage);
  if (it == stages_.end() || it->second.config_hash != config_hash) return false;
  for (const auto& [rel, hash] : it->second.outputs) {
    const std::string full = config_.out_dir + "/" + rel;
    if (!fs::exists(full) || Sha256::of_file(full) != hash) return false;
  }
  return true;
}

void Pipeline::finish_stage(const std::string& stage, const std::string& config_hash,
                            const std::vector<std::string>& output_rel_paths,
                            const std::map<std::string, std::string>& extra) {
  StageRecord rec;
  rec.config_hash = config_hash;
  rec.completed_at = now_iso8601();
  for (const std::string& rel : output_rel_paths)
    rec.outputs[rel] = Sha256::of_file(config_.out_dir + "/" + rel);
  rec.extra = extra;
  stages_[stage] = std::move(rec);
  save_manifest();
}

std::vector<std::string> Pipeline::select_models(const std::string& selector) const {
  if (selector.empty() || selector == "all") return config_.models;
  std::vector<std::string> out;
  std::istringstream ss(selector);
  std::string id;
  while (std::getline(ss, id, ',')) {
    if (id.empty()) continue;
    parse_model_id(id);  // validates
    if (std::find(config_.models.begin(), config_.models.end(), id) == config_.models.end())
      throw ConfigError("model not in the configured set: " + id);
    out.push_back(id);
  }
  if (out.empty()) throw ConfigError("empty model selector");
  return out;
}

std::string Pipeline::dataset_hash() {
  if (!cached_dataset_hash_.empty()) return cached_dataset_hash_;
  const auto it = stages_.find("generate");
  if (it != stages_.end()) {
    const auto h = it->second.extra.find("dataset_hash");
    if (h != it->second.extra.end()) {
      cached_dataset_hash_ = h->second;
      return cached_dataset_hash_;
    }
  }
  // External dataset: hash it directly.
  const std::string root = config_.effective_data_dir();
  const std::string manifest_path = root + "/manifest.csv";
  if (!fs::exists(manifest_path))
    throw StageDependencyError("missing dataset manifest: " + manifest_path +
                               "; run `generate` first");
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  Sha256 combined;
  std::string line = "manifest.csv:" + Sha256::of_file(manifest_path) + "\n";
  combined.update(line.data(), line.size());
  for (const auto& r : manifest.records) {
    line = r.image_path + ":" + Sha256::of_file(root + "/" + r.image_path) + "\n";
    combined.update(line.data(), line.size());
  }
  cached_dataset_hash_ = combined.hex_digest();
  return cached_dataset_hash_;
}

bool Pipeline::generate() {
  const DatasetConfig dataset = config_.scaled_dataset();
  json fp;
  fp["train"] = dataset.train_count;
  fp["val"] = dataset.val_count;
  fp["test"] = dataset.test_count;
  fp["seed"] = dataset.seed;
  fp["data_dir"] = config_.effective_data_dir();
  const std::string config_hash = Sha256::of_string("generate:" + fp.dump());
  if (stage_up_to_date("generate", config_hash)) return false;

  const std::string root = config_.effective_data_dir();
  fs::create_directories(root);
  const DatasetManifest manifest = generate_dataset(dataset, root);

  // Combined dataset hash in manifest order.
  Sha256 combined;
  std::string line = "manifest.csv:" + Sha256::of_file(root + "/manifest.csv") + "\n";
  combined.update(line.data(), line.size());
  for (const auto& r : manifest.records) {
    line = r.image_path + ":" + Sha256::of_file(root + "/" + r.image_path) + "\n";
    combined.update(line.data(), line.size());
  }
  cached_dataset_hash_ = combined.hex_digest();

  // The run manifest tracks the manifest file; the combined hash pins the
  // image bytes without storing one entry per image.
  std::vector<std::string> outputs;
  if (root.rfind(config_.out_dir + "/", 0) == 0)
    outputs.push_back(root.substr(config_.out_dir.size() + 1) + "/manifest.csv");
  finish_stage("generate", config_hash, outputs,
               {{"dataset_hash", cached_dataset_hash_},
                {"records", std::to_string(manifest.records.size())}});
  return true;
}

bool Pipeline::train(const std::string& selector) {
  const std::string root = config_.effective_data_dir();
  const std::string manifest_path = root + "/manifest.csv";
  if (!fs::exists(manifest_path))
    throw StageDependencyError("missing dataset manifest: " + manifest_path +
                               "; run `generate` first");
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  const std::string data_hash = dataset_hash();

  bool ran_any = false;
  for (const std::string& model_id : select_models(selector)) {
    const TrainConfig tc = config_.train_config_for(model_id);
    const std::string config_hash = Sha256::of_string(
        "train:" + train_config_fingerprint(tc) + ":" + data_hash);
    const std::string stage = "train:" + model_id;
    if (stage_up_to_date(stage, config_hash)) continue;

    const TrainOutcome outcome = tc.family == "cnn" ? train_cnn(manifest, root, tc)
                                                    : train_ram(manifest, root, tc);
    fs::create_directories(config_.out_dir + "/models/" + model_id);
    const std::string ckpt_tmp = checkpoint_path(model_id) + ".tmp";
    save_checkpoint(outcome.best, ckpt_tmp);
    fs::rename(ckpt_tmp, checkpoint_path(model_id));
    {
      std::ostringstream curve;
      curve << "epoch,train_loss,val_loss,val_acc\n";
      for (const auto& p : outcome.curve.points)
        curve << p.epoch << ',' << p.train_loss << ',' << p.val_loss << ',' << p.val_acc << "\n";
      write_text_atomic(curve_path(model_id), curve.str());
    }
    finish_stage(stage, config_hash,
                 {"models/" + model_id + "/checkpoint.bin", "models/" + model_id + "/curve.csv"},
                 {{"best_epoch", std::to_string(outcome.best.epoch)},
                  {"stopped_epoch", std::to_string(outcome.stopped_epoch)},
                  {"best_val_loss", std::to_string(outcome.best.val_loss)}});
    ran_any = true;
  }
  return ran_any;
}

bool Pipeline::eval(const std::string& selector) {
  const std::string root = config_.effective_data_dir();
  const std::string manifest_path = root + "/manifest.csv";
  if (!fs::exists(manifest_path))
    throw StageDependencyError("missing dataset manifest: " + manifest_path +
                               "; run `generate` first");
  const DatasetManifest manifest = read_manifest_csv(manifest_path);
  const std::string data_hash = dataset_hash();

  bool ran_any = false;
  for (const std::string& model_id : select_models(selector)) {
    const std::string ckpt_path = checkpoint_path(model_id);
    if (!fs::exists(ckpt_path))
      throw StageDependencyError("missing checkpoint: " + ckpt_path + "; run `train` first");
    const std::string config_hash = Sha256::of_string(
        "eval:test:" + Sha256::of_file(ckpt_path) + ":" + data_hash);
    const std::string stage = "eval:" + model_id;
    if (stage_up_to_date(stage, config_hash)) continue;

    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const auto trials = evaluate(ckpt, manifest, root, Split::Test);
    fs::create_directories(config_.out_dir + "/trials");
    {
      std::ostringstream body;
      body << "model_id,duration,image_path,image_type,ratio_small,ratio_large,"
              "total_dots,abs_diff,truth,predicted,correct\n";
      for (const auto& t : trials)
        body << t.model_id << ',' << t.duration_level << ',' << t.image_path << ','
             << to_string(t.image_type) << ',' << t.ratio.small << ',' << t.ratio.large
             << ',' << t.total_dots << ',' << t.abs_diff << ','
             << (t.truth ? "true" : "false") << ',' << (t.predicted ? "true" : "false")
             << ',' << (t.correct ? 1 : 0) << "\n";
      write_text_atomic(trials_path(model_id), body.str());
    }
    finish_stage(stage, config_hash, {"trials/" + model_id + ".csv"});
    ran_any = true;
  }
  return ran_any;
}

bool Pipeline::analyze() {
  std::vector<TrialResult> all_trials;
  std::map<std::string, std::vector<TrialResult>> by_model;
  Sha256 input_hash;
  for (const std::string& model_id : config_.models) {
    const std::string path = trials_path(model_id);
    if (!fs::exists(path))
      throw StageDependencyError("missing trial results: " + path + "; run `eval` first");
    const std::string h = Sha256::of_file(path) + "\n";
    input_hash.update(h.data(), h.size());
    auto trials = read_trials_csv(path);
    all_trials.insert(all_trials.end(), trials.begin(), trials.end());
    by_model[model_id] = std::move(trials);
  }
  json fp;
  fp["threshold"] = config_.invariance_threshold;
  const std::string config_hash =
      Sha256::of_string("analyze:" + fp.dump() + ":" + input_hash.hex_digest());
  if (stage_up_to_date("analyze", config_hash)) return false;

  fs::create_directories(analysis_dir());
  std::vector<std::string> outputs;

  auto write_accuracy = [&](const std::string& name, GroupBy group_by) {
    std::ostringstream body;
    body << "model_id,image_type,ratio_small,ratio_large,mean_accuracy,n_trials\n";
    for (const auto& p : aggregate_accuracy(all_trials, group_by)) {
      body << p.model_id << ',' << p.image_type << ',';
      if (p.ratio) body << p.ratio->small << ',' << p.ratio->large;
      else body << ',';
      body << ',' << p.mean_accuracy << ',' << p.n_trials << "\n";
    }
    write_text_atomic(analysis_dir() + "/" + name, body.str());
    outputs.push_back("analysis/" + name);
  };
  write_accuracy("accuracy_by_ratio.csv", GroupBy::Model | GroupBy::Ratio);
  write_accuracy("accuracy_by_type.csv", GroupBy::Model | GroupBy::Type);
  write_accuracy("accuracy_by_type_ratio.csv", GroupBy::Model | GroupBy::Type | GroupBy::Ratio);

  {  // Weber fits per model x image type.
    std::ostringstream body;
    body << "model_id,image_type,w,r2\n";
    for (const std::string& model_id : config_.models) {
      const auto points = aggregate_accuracy(by_model[model_id], GroupBy::Type | GroupBy::Ratio);
      for (ImageType type : all_image_types()) {
        std::vector<WeberPoint> wp;
        for (const auto& p : points)
          if (p.image_type == to_string(type) && p.ratio)
            wp.push_back({static_cast<double>(p.ratio->large),
                          static_cast<double>(p.ratio->small), p.mean_accuracy});
        if (wp.size() < 2) continue;
        WeberFit fit = fit_weber(wp);
        body << model_id << ',' << to_string(type) << ',' << fit.w << ',';
        if (fit.r_squared_defined) body << fit.r_squared;
        else body << "nan";
        body << "\n";
      }
    }
    write_text_atomic(analysis_dir() + "/weber_fits.csv", body.str());
    outputs.push_back("analysis/weber_fits.csv");
  }

  {  // Per-family regression with response-invariance exclusion.
    std::ostringstream exclusions;
    exclusions << "family,image_type,duration,accuracy\n";
    for (const std::string& family : {"cnn", "ram"}) {
      std::vector<TrialResult> family_trials;
      for (const auto& [model_id, trials] : by_model)
        if (parse_model_id(model_id).first == family)
          family_trials.insert(family_trials.end(), trials.begin(), trials.end());
      const std::string out_name = std::string("regression_") + family + ".csv";
      if (family_trials.empty()) continue;

      std::ostringstream body;
      body << "term,estimate,std_error,z_value,p_value,significance\n";
      try {
        auto excl = exclude_invariant_cells(family_trials, config_.invariance_threshold);
        for (const auto& cell : excl.excluded)
          exclusions << family << ',' << to_string(cell.image_type) << ','
                     << cell.duration_level << ',' << cell.accuracy << "\n";
        const auto rows = logistic_regression(excl.retained);
        char pbuf[32];
        for (const auto& r : rows) {
          std::snprintf(pbuf, sizeof(pbuf), "%.3g", r.p_value);
          body << r.term << ',' << r.estimate << ',' << r.std_error << ','
               << r.z_value << ',' << pbuf << ',' << r.significance << "\n";
        }
      } catch (const Error& e) {
        // A degenerate fit is data-dependent, not a pipeline failure; the
        // outcome is recorded so downstream consumers see why rows are absent.
        body << "# regression unavailable: " << e.what() << "\n";
      }
      write_text_atomic(analysis_dir() + "/" + out_name, body.str());
      outputs.push_back("analysis/" + out_name);
    }
    write_text_atomic(analysis_dir() + "/exclusions.csv", exclusions.str());
    outputs.push_back("analysis/exclusions.csv");
  }

  finish_stage("analyze", config_hash, outputs);
  return true;
}

bool Pipeline::plot() {
  Sha256 input_hash;
  const std::vector<std::string> needed = {
      "accuracy_by_ratio.csv", "accuracy_by_type.csv", "accuracy_by_type_ratio.csv",
      "weber_fits.csv"};
  for (const auto& name : needed) {
    const std::string path = analysis_dir() + "/" + name;
    if (!fs::exists(path))
      throw StageDependencyError("missing analysis output: " + path + "; run `analyze` first");
    const std::string h = Sha256::of_file(path) + "\n";
    input_hash.update(h.data(), h.size());
  }
  for (const std::string& model_id : config_.models) {
    const std::string path = curve_path(model_id);
    if (!fs::exists(path))
      throw StageDependencyError("missing learning curve: " + path + "; run `train` first");
    const std::string h = Sha256::of_file(path) + "\n";
    input_hash.update(h.data(), h.size());
  }
  const std::string config_hash = Sha256::of_string("plot:" + input_hash.hex_digest());
  if (stage_up_to_date("plot", config_hash)) return false;

  fs::create_directories(figures_dir());
  std::vector<std::string> outputs;

  auto read_accuracy = [&](const std::string& name) {
    return read_csv(analysis_dir() + "/" + name);
  };

  {  // Accuracy by ratio, one line per model.
    const CsvTable t = read_accuracy("accuracy_by_ratio.csv");
    const int cm = t.column("model_id"), cs = t.column("ratio_small"),
              cl = t.column("ratio_large"), ca = t.column("mean_accuracy");
    SvgChart chart;
    chart.title = "Accuracy by ratio (all image types)";
    chart.x_label = "dot ratio (small/large)";
    chart.y_label = "accuracy";
    chart.y_min = 0.4;
    chart.y_max = 1.0;
    for (const std::string& model_id : config_.models) {
      SvgSeries s;
      s.label = model_id;
      for (const auto& row : t.rows)
        if (row[cm] == model_id)
          s.points.emplace_back(std::stod(row[cs]) / std::stod(row[cl]),
                                parse_or_nan(row[ca]));
      std::sort(s.points.begin(), s.points.end());
      chart.series.push_back(std::move(s));
    }
    chart.write(figures_dir() + "/fig_accuracy_by_ratio.svg");
    outputs.push_back("figures/fig_accuracy_by_ratio.svg");
  }

  {  // Accuracy by image type (0..3 in organisation order).
    const CsvTable t = read_accuracy("accuracy_by_type.csv");
    const int cm = t.column("model_id"), ct = t.column("image_type"),
              ca = t.column("mean_accuracy");
    SvgChart chart;
    chart.title = "Accuracy by image type (all ratios)";
    chart.x_label = "0=col sorted  1=col mixed  2=scat pairs  3=scat random";
    chart.y_label = "accuracy";
    chart.y_min = 0.4;
    chart.y_max = 1.0;
    for (const std::string& model_id : config_.models) {
      SvgSeries s;
      s.label = model_id;
      for (const auto& row : t.rows)
        if (row[cm] == model_id)
          s.points.emplace_back(
              static_cast<double>(static_cast<int>(image_type_from_string(row[ct]))),
              parse_or_nan(row[ca]));
      std::sort(s.points.begin(), s.points.end());
      chart.series.push_back(std::move(s));
    }
    chart.write(figures_dir() + "/fig_accuracy_by_type.svg");
    outputs.push_back("figures/fig_accuracy_by_type.svg");
  }

  for (const std::string& family : {"cnn", "ram"}) {  // Learning curves.
    SvgChart chart;
    chart.title = std::string("Learning curves (") + family + ")";
    chart.x_label = "epoch";
    chart.y_label = "validation accuracy";
    chart.y_min = 0.4;
    chart.y_max = 1.0;
    for (const std::string& model_id : config_.models) {
      if (parse_model_id(model_id).first != family) continue;
      const LearningCurve curve = read_curve_csv(curve_path(model_id));
      SvgSeries s;
      s.label = model_id;
      s.draw_markers = false;
      for (const auto& p : curve.points)
        s.points.emplace_back(static_cast<double>(p.epoch), p.val_acc);
      chart.series.push_back(std::move(s));
    }
    if (chart.series.empty()) continue;
    const std::string name = std::string("fig_learning_curves_") + family + ".svg";
    chart.write(figures_dir() + "/" + name);
    outputs.push_back("figures/" + name);
  }

  {  // Weber curves per model: observed accuracy + fitted curve per type.
    const CsvTable fits = read_accuracy("weber_fits.csv");
    const int fm = fits.column("model_id"), ft = fits.column("image_type"),
              fw = fits.column("w");
    const CsvTable t = read_accuracy("accuracy_by_type_ratio.csv");
    const int cm = t.column("model_id"), ct = t.column("image_type"),
              cs = t.column("ratio_small"), cl = t.column("ratio_large"),
              ca = t.column("mean_accuracy");
    for (const std::string& model_id : config_.models) {
      SvgChart chart;
      chart.title = "Weber curves: " + model_id;
      chart.x_label = "ratio (larger/smaller)";
      chart.y_label = "accuracy";
      chart.y_min = 0.4;
      chart.y_max = 1.0;
      for (ImageType type : all_image_types()) {
        SvgSeries obs;
        obs.label = to_string(type);
        obs.draw_line = false;
        for (const auto& row : t.rows)
          if (row[cm] == model_id && row[ct] == to_string(type))
            obs.points.emplace_back(std::stod(row[cl]) / std::stod(row[cs]),
                                    parse_or_nan(row[ca]));
        std::sort(obs.points.begin(), obs.points.end());

        double w = 0;
        for (const auto& row : fits.rows)
          if (row[fm] == model_id && row[ft] == to_string(type)) w = parse_or_nan(row[fw]);
        SvgSeries fit_series;
        fit_series.label = std::string(to_string(type)) + " fit";
        fit_series.draw_markers = false;
        if (w > 0 && !obs.points.empty()) {
          const double lo = obs.points.front().first, hi = obs.points.back().first;
          for (int i = 0; i <= 60; ++i) {
            const double r = lo + (hi - lo) * i / 60.0;
            fit_series.points.emplace_back(r, ans_accuracy(r, 1.0, w));
          }
        }
        chart.series.push_back(std::move(obs));
        if (!fit_series.points.empty()) chart.series.push_back(std::move(fit_series));
      }
      const std::string name = "fig_weber_" + model_id + ".svg";
      chart.write(figures_dir() + "/" + name);
      outputs.push_back("figures/" + name);
    }
  }

  finish_stage("plot", config_hash, outputs);
  return true;
}

void Pipeline::all() {
  generate();
  train("");
  eval("");
  analyze();
  plot();
}

}  // namespace mostv
