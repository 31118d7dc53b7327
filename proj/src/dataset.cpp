// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "rtfvae/rtf.hpp"

namespace rtfvae {

namespace {

using nlohmann::json;

json positions_to_json(const std::vector<Vec3>& ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back({p[0], p[1], p[2]});
  return out;
}

std::vector<Vec3> positions_from_json(const json& j) {
  std::vector<Vec3> out;
  for (const auto& p : j)
    out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                     p.at(2).get<double>());
  return out;
}

Mat gather(const std::vector<Vec>& rtfs, const std::vector<Index>& idx) {
  if (idx.empty()) return Mat(rtfs.empty() ? 0 : rtfs.front().size(), 0);
  Mat out(rtfs.front().size(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    out.col(static_cast<Index>(j)) = rtfs[static_cast<std::size_t>(idx[j])];
  return out;
}

std::vector<Vec3> gather(const std::vector<Vec3>& ps,
                         const std::vector<Index>& idx) {
  std::vector<Vec3> out;
  for (Index i : idx) out.push_back(ps[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

std::vector<Vec3> make_grid(const GridSpec& spec) {
  for (int c : spec.counts)
    if (c < 1) throw Error("grid: counts must be >= 1");
  std::vector<Vec3> out;
  for (int iz = 0; iz < spec.counts[2]; ++iz)
    for (int iy = 0; iy < spec.counts[1]; ++iy)
      for (int ix = 0; ix < spec.counts[0]; ++ix) {
        const Vec3 offset((ix - 0.5 * (spec.counts[0] - 1)) * spec.spacing[0],
                          (iy - 0.5 * (spec.counts[1] - 1)) * spec.spacing[1],
                          (iz - 0.5 * (spec.counts[2] - 1)) * spec.spacing[2]);
        out.push_back(spec.center + offset);
      }
  return out;
}

Vec clean_rtf(const SceneSpec& room, const Vec3& position, double duration_s,
              std::uint64_t seed, const ImageSourceModel& model) {
  SceneSpec spec = room;
  spec.source_pos = position;
  spec.noise_kind = NoiseKind::Awgn;
  spec.interferer_positions.clear();
  spec.snr_db = std::numeric_limits<double>::infinity();
  spec.source_excitation = Excitation::White;
  spec.seed = seed;
  const SceneComponents sc = synthesize_components(spec, duration_s, model);
  return estimate_rtf(stft(sc.c1), stft(sc.c2));
}

RtfDataset build_dataset(const std::vector<Vec3>& grid,
                         const DatasetConfig& cfg) {
  if (cfg.n_test < 1 || cfg.n_val < 1)
    throw Error("dataset: n_test and n_val must be >= 1");
  if (grid.size() <= static_cast<std::size_t>(cfg.n_test + cfg.n_val))
    throw Error("dataset: grid must be larger than n_test + n_val");
  {
    auto key = [](const Vec3& p) {
      return std::array<double, 3>{p[0], p[1], p[2]};
    };
    std::set<std::array<double, 3>> seen;
    for (const auto& p : grid)
      if (!seen.insert(key(p)).second)
        throw Error("dataset: duplicate grid position");
  }

  const ImageSourceModel model =
      make_image_model(cfg.room.room_dims, cfg.room.t60, cfg.room.max_order);
  std::vector<Vec> rtfs;
  rtfs.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    rtfs.push_back(clean_rtf(cfg.room, grid[i], cfg.duration_s,
                             derive_seed(cfg.seed, 20, i), model));

  std::vector<Index> order(grid.size());
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(cfg.seed, 10));
  std::shuffle(order.begin(), order.end(), rng);
  auto slice = [&](std::size_t from, std::size_t to) {
    std::vector<Index> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                           order.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto n_test = static_cast<std::size_t>(cfg.n_test);
  const auto n_val = static_cast<std::size_t>(cfg.n_val);
  const auto test_idx = slice(0, n_test);
  const auto val_idx = slice(n_test, n_test + n_val);
  const auto train_idx = slice(n_test + n_val, grid.size());

  RtfDataset ds;
  ds.seed = cfg.seed;
  ds.t60 = cfg.room.t60;
  ds.test = gather(rtfs, test_idx);
  ds.validation = gather(rtfs, val_idx);
  ds.train_clean = gather(rtfs, train_idx);
  ds.test_positions = gather(grid, test_idx);
  ds.validation_positions = gather(grid, val_idx);
  ds.train_positions = gather(grid, train_idx);
  ds.mean_rtf = ds.train_clean.rowwise().mean();
  ds.train = augment(ds.train_clean, cfg.augment_repeats, cfg.noise_fraction,
                     cfg.seed);
  return ds;
}

void write_rtf_file(const std::filesystem::path& path, const Mat& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  // Column-major storage of a D x N matrix is the row-per-RTF file layout.
  os.write(reinterpret_cast<const char*>(set.data()),
           static_cast<std::streamsize>(set.size() * sizeof(double)));
  if (!os) throw Error("write failed for " + path.string());
}

Mat read_rtf_file(const std::filesystem::path& path, Index dim) {
  if (dim < 1) throw Error("read_rtf_file: dimension must be >= 1");
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw Error("cannot open " + path.string());
  const auto bytes = static_cast<Index>(is.tellg());
  const Index row_bytes = dim * static_cast<Index>(sizeof(double));
  if (bytes % row_bytes != 0)
    throw Error(path.string() + ": size is not a multiple of the RTF length");
  Mat out(dim, bytes / row_bytes);
  is.seekg(0);
  is.read(reinterpret_cast<char*>(out.data()), bytes);
  if (!is) throw Error("truncated file " + path.string());
  return out;
}

void save_dataset(const RtfDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["dim"] = ds.dim();
  meta["seed"] = ds.seed;
  meta["t60"] = ds.t60;
  meta["counts"] = {{"train", ds.train.cols()},
                    {"train_clean", ds.train_clean.cols()},
                    {"validation", ds.validation.cols()},
                    {"test", ds.test.cols()}};
  meta["provenance"] = {
      {"train", positions_to_json(ds.train_positions)},
      {"validation", positions_to_json(ds.validation_positions)},
      {"test", positions_to_json(ds.test_positions)}};
  meta["format"] = "float64 little-endian, one RTF per row";
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";
  write_rtf_file(dir / "train.f64", ds.train);
  write_rtf_file(dir / "train_clean.f64", ds.train_clean);
  write_rtf_file(dir / "validation.f64", ds.validation);
  write_rtf_file(dir / "test.f64", ds.test);
  write_rtf_file(dir / "mean.f64", ds.mean_rtf);
}

RtfDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream is(dir / "meta.json");
  if (!is) throw Error("dataset: missing " + (dir / "meta.json").string());
  const json meta = json::parse(is);
  const Index dim = meta.at("dim").get<Index>();

  RtfDataset ds;
  ds.seed = meta.value("seed", std::uint64_t{0});
  ds.t60 = meta.value("t60", 0.0);
  ds.train = read_rtf_file(dir / "train.f64", dim);
  ds.validation = read_rtf_file(dir / "validation.f64", dim);
  ds.test = read_rtf_file(dir / "test.f64", dim);
  ds.train_clean = std::filesystem::exists(dir / "train_clean.f64")
                       ? read_rtf_file(dir / "train_clean.f64", dim)
                       : ds.train;
  ds.mean_rtf = std::filesystem::exists(dir / "mean.f64")
                    ? Vec(read_rtf_file(dir / "mean.f64", dim).col(0))
                    : Vec(ds.train_clean.rowwise().mean());
  if (meta.contains("provenance")) {
    const auto& prov = meta.at("provenance");
    ds.train_positions = positions_from_json(prov.value("train", json::array()));
    ds.validation_positions =
        positions_from_json(prov.value("validation", json::array()));
    ds.test_positions = positions_from_json(prov.value("test", json::array()));
  }
  return ds;
}

}  // namespace rtfvae
