#include "mostv/dataset.hpp"

#include <filesystem>
#include <fstream>

#include "mostv/csv.hpp"
#include "mostv/errors.hpp"
#include "mostv/rng.hpp"

namespace fs = std::filesystem;

namespace mostv {

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw DataError("unknown split: " + s);
}

std::vector<const StimulusRecord*> DatasetManifest::split_records(Split s) const {
  std::vector<const StimulusRecord*> out;
  for (const auto& r : records)
    if (r.split == s) out.push_back(&r);
  return out;
}

namespace {

constexpr int kCellsPerSplit = 9 * 4 * 2;  // ratio x type x truth

std::string record_filename(const StimulusRecord& r, int index_in_cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d-%d_%s_%04d.png", r.ratio.small, r.ratio.large,
                r.truth ? "true" : "false", index_in_cell);
  return std::string(to_string(r.split)) + "/" + to_string(r.image_type) + "/" + buf;
}

uint64_t record_seed(uint64_t global_seed, Split split, ImageType type,
                     int ratio_index, bool truth, int index_in_cell) {
  return hash_seed(global_seed,
                   {static_cast<uint64_t>(split), static_cast<uint64_t>(type),
                    static_cast<uint64_t>(ratio_index), truth ? 1ull : 0ull,
                    static_cast<uint64_t>(index_in_cell)});
}

}  // namespace

DotScene scene_for_record(const StimulusRecord& record) {
  Rng rng(record.seed);
  int multiplier = 1;
  DotScene scene = generate_scene(record.ratio, record.image_type, record.truth,
                                  rng, &multiplier);
  scene.seed = record.seed;
  if (scene.n_blue != record.n_blue || scene.n_yellow != record.n_yellow ||
      multiplier != record.multiplier)
    throw DataError("manifest row does not reproduce its scene: " + record.image_path);
  return scene;
}

DatasetManifest generate_dataset(const DatasetConfig& config, const std::string& root_dir) {
  const int counts[3] = {config.train_count, config.val_count, config.test_count};
  for (int c : counts)
    if (c <= 0 || c % kCellsPerSplit != 0)
      throw ConfigError("split count " + std::to_string(c) + " is not divisible by " +
                        std::to_string(kCellsPerSplit));

  DatasetManifest manifest;
  manifest.global_seed = config.seed;
  const auto ratios = all_ratios();

  for (int s = 0; s < 3; ++s) {
    const Split split = static_cast<Split>(s);
    const int per_cell = counts[s] / kCellsPerSplit;
    for (ImageType type : all_image_types()) {
      fs::create_directories(fs::path(root_dir) / to_string(split) / to_string(type));
      for (int ri = 0; ri < static_cast<int>(ratios.size()); ++ri) {
        for (int truth_i = 0; truth_i < 2; ++truth_i) {
          const bool truth = truth_i == 1;
          for (int idx = 0; idx < per_cell; ++idx) {
            StimulusRecord rec;
            rec.split = split;
            rec.image_type = type;
            rec.ratio = ratios[ri];
            rec.truth = truth;
            rec.seed = record_seed(config.seed, split, type, ri, truth, idx);

            Rng rng(rec.seed);
            DotScene scene = generate_scene(rec.ratio, type, truth, rng, &rec.multiplier);
            scene.seed = rec.seed;
            rec.n_blue = scene.n_blue;
            rec.n_yellow = scene.n_yellow;
            rec.total_dots = scene.n_blue + scene.n_yellow;
            rec.abs_diff = std::abs(scene.n_blue - scene.n_yellow);
            rec.image_path = record_filename(rec, idx);

            const std::string final_path = (fs::path(root_dir) / rec.image_path).string();
            write_png(final_path + ".tmp", rasterize(scene, manifest.gray_levels));
            fs::rename(final_path + ".tmp", final_path);
            manifest.records.push_back(std::move(rec));
          }
        }
      }
    }
  }

  const std::string manifest_path = (fs::path(root_dir) / "manifest.csv").string();
  write_manifest_csv(manifest, manifest_path + ".tmp");
  fs::rename(manifest_path + ".tmp", manifest_path);
  return manifest;
}

void write_manifest_csv(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << "# mostvision-dataset v1 seed=" << manifest.global_seed
      << " gray_background=" << int(manifest.gray_levels.background)
      << " gray_yellow=" << int(manifest.gray_levels.yellow)
      << " gray_blue=" << int(manifest.gray_levels.blue) << "\n";
  out << "image_path,split,image_type,ratio_small,ratio_large,multiplier,"
         "n_blue,n_yellow,total_dots,abs_diff,truth,seed\n";
  for (const auto& r : manifest.records) {
    out << r.image_path << ',' << to_string(r.split) << ',' << to_string(r.image_type)
        << ',' << r.ratio.small << ',' << r.ratio.large << ',' << r.multiplier << ','
        << r.n_blue << ',' << r.n_yellow << ',' << r.total_dots << ',' << r.abs_diff
        << ',' << (r.truth ? "true" : "false") << ',' << r.seed << "\n";
  }
}

DatasetManifest read_manifest_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  DatasetManifest manifest;
  for (const std::string& comment : table.comments) {
    std::istringstream ss(comment);
    std::string tok;
    while (ss >> tok) {
      auto value_after = [&](const char* key) -> std::string {
        const std::string prefix = std::string(key) + "=";
        return tok.rfind(prefix, 0) == 0 ? tok.substr(prefix.size()) : std::string();
      };
      if (auto v = value_after("seed"); !v.empty()) manifest.global_seed = std::stoull(v);
      if (auto v = value_after("gray_background"); !v.empty())
        manifest.gray_levels.background = static_cast<uint8_t>(std::stoi(v));
      if (auto v = value_after("gray_yellow"); !v.empty())
        manifest.gray_levels.yellow = static_cast<uint8_t>(std::stoi(v));
      if (auto v = value_after("gray_blue"); !v.empty())
        manifest.gray_levels.blue = static_cast<uint8_t>(std::stoi(v));
    }
  }

  const int c_path = table.column("image_path");
  const int c_split = table.column("split");
  const int c_type = table.column("image_type");
  const int c_small = table.column("ratio_small");
  const int c_large = table.column("ratio_large");
  const int c_mult = table.column("multiplier");
  const int c_blue = table.column("n_blue");
  const int c_yellow = table.column("n_yellow");
  const int c_total = table.column("total_dots");
  const int c_abs = table.column("abs_diff");
  const int c_truth = table.column("truth");
  const int c_seed = table.column("seed");

  manifest.records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    StimulusRecord r;
    r.image_path = row[c_path];
    r.split = split_from_string(row[c_split]);
    r.image_type = image_type_from_string(row[c_type]);
    r.ratio = RatioPair{std::stoi(row[c_small]), std::stoi(row[c_large])};
    r.multiplier = std::stoi(row[c_mult]);
    r.n_blue = std::stoi(row[c_blue]);
    r.n_yellow = std::stoi(row[c_yellow]);
    r.total_dots = std::stoi(row[c_total]);
    r.abs_diff = std::stoi(row[c_abs]);
    r.truth = row[c_truth] == "true";
    r.seed = std::stoull(row[c_seed]);
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

LoadedSplit load_split(const DatasetManifest& manifest, const std::string& root_dir, Split split) {
  LoadedSplit out;
  for (const auto& r : manifest.records) {
    if (r.split != split) continue;
    const std::string full = (fs::path(root_dir) / r.image_path).string();
    Image img = read_png(full);
    if (img.width != SceneGeometry::kCanvas || img.height != SceneGeometry::kCanvas)
      throw DataError("unexpected image size: " + full);
    out.images.push_back(std::move(img));
    out.labels.push_back(r.truth ? 1 : 0);
    out.records.push_back(&r);
  }
  if (out.images.empty())
    throw DataError(std::string("split has no records: ") + to_string(split));
  return out;
}

}  // namespace mostv
