#include "ndc/data/bundle.hpp"

#include <fstream>
#include <sstream>

#include "ndc/io.hpp"

namespace ndc::data {

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  for (const auto& [k, v] : m) out << k << '=' << v << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Manifest m;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, path.string() + " line " + std::to_string(n) + ": expected key=value");
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

namespace {

std::string dims_text(const GridDims& d) {
  return std::to_string(d.m) + " " + std::to_string(d.n) + " " + std::to_string(d.k);
}

GridDims parse_dims(const std::string& s) {
  GridDims d;
  std::istringstream in(s);
  if (!(in >> d.m >> d.n >> d.k)) throw Error(ErrorCode::ParseError, "bad lattice '" + s + "'");
  d.validate();
  return d;
}

const std::string& require(const Manifest& m, const std::string& key) {
  auto it = m.find(key);
  if (it == m.end()) throw Error(ErrorCode::ParseError, "manifest lacks '" + key + "'");
  return it->second;
}

FieldKind grid_kind(SampleKind k) {
  switch (k) {
    case SampleKind::SDF: return FieldKind::SDF;
    case SampleKind::UDF: return FieldKind::UDF;
    default: return FieldKind::OCC;
  }
}

}  // namespace

void save_sample(const std::filesystem::path& dir, const TrainingSample& s, const Manifest& extra) {
  std::filesystem::create_directories(dir);
  Manifest m = extra;
  m["kind"] = to_string(s.kind);
  m["lattice"] = dims_text(s.lattice);
  m["watertight"] = s.watertight ? "1" : "0";
  if (s.kind == SampleKind::POINTS) {
    io::save_point_cloud(dir / "points.ply", s.cloud);
    m["input"] = "points.ply";
    m["points"] = std::to_string(s.cloud.size());
  } else {
    io::save_scalar_grid(dir / "input.ndcg", s.grid);
    m["input"] = "input.ndcg";
  }
  io::save_signs(dir / "gt_signs.ndcg", s.gt_signs);
  io::save_flags(dir / "gt_flags.ndcg", s.gt_flags);
  io::save_offsets(dir / "gt_offsets.ndcg", s.gt_offsets);
  io::save_signs(dir / "mask_signs.ndcg", s.masks.signs);
  io::save_cell_bytes(dir / "mask_cells_ndc.ndcg", s.masks.cells_ndc);
  io::save_cell_bytes(dir / "mask_cells_undc.ndcg", s.masks.cells_undc);
  io::save_flags(dir / "mask_edges.ndcg", s.masks.edges);
  write_manifest(dir / "manifest.txt", m);
}

TrainingSample load_sample(const std::filesystem::path& dir, Manifest* manifest) {
  const Manifest m = read_manifest(dir / "manifest.txt");
  TrainingSample s;
  s.kind = sample_kind_from_string(require(m, "kind"));
  s.lattice = parse_dims(require(m, "lattice"));
  s.watertight = require(m, "watertight") == "1";
  if (s.kind == SampleKind::POINTS) {
    s.cloud = io::load_point_cloud(dir / "points.ply");
  } else {
    s.grid = io::load_scalar_grid(dir / "input.ndcg", grid_kind(s.kind));
  }
  s.gt_signs = io::load_signs(dir / "gt_signs.ndcg");
  s.gt_flags = io::load_flags(dir / "gt_flags.ndcg");
  s.gt_offsets = io::load_offsets(dir / "gt_offsets.ndcg");
  s.masks.signs = io::load_signs(dir / "mask_signs.ndcg");
  s.masks.cells_ndc = io::load_cell_bytes(dir / "mask_cells_ndc.ndcg");
  s.masks.cells_undc = io::load_cell_bytes(dir / "mask_cells_undc.ndcg");
  s.masks.edges = io::load_flags(dir / "mask_edges.ndcg");
  validate_sample(s);
  if (manifest) *manifest = m;
  return s;
}

}  // namespace ndc::data
