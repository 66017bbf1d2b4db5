#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ndc/data/bundle.hpp"
#include "ndc/data/csg.hpp"
#include "ndc/data/sample.hpp"
#include "ndc/io.hpp"
#include "ndc/isosurf.hpp"
#include "ndc/mesher.hpp"
#include "ndc/metrics.hpp"
#include "ndc/nn/network.hpp"
#include "ndc/nn/train.hpp"

namespace ndc::cli {

namespace fs = std::filesystem;
using nn::NetworkWeights;
using nn::Tensor4;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kReferenceMesh = "reference.obj";

bool has_ext(const fs::path& p, const char* ext) { return p.extension() == ext; }

TriMesh load_tri_mesh(const fs::path& p) {
  return io::triangulate(has_ext(p, ".ply") ? io::load_ply(p) : io::load_obj(p));
}

void save_poly(const fs::path& p, const io::PolyMesh& m) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  if (has_ext(p, ".ply"))
    io::save_ply(p, m);
  else
    io::save_obj(p, m);
}

// Similarity taking the mesh bounding box into [margin, res-1-margin]^3,
// centred, uniform scale.
TriMesh fit_to_grid(TriMesh m, const GridDims& d, double margin) {
  if (m.vertices.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no vertices");
  Vec3 lo = m.vertices[0], hi = lo;
  for (const Vec3& v : m.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec3 room(d.m - 1 - 2 * margin, d.n - 1 - 2 * margin, d.k - 1 - 2 * margin);
  const double extent = (hi - lo).maxCoeff();
  if (!(extent > 0.0) || room.minCoeff() <= 0.0) throw Error(ErrorCode::InvalidDims, "mesh cannot be fitted into the grid");
  const double s = (room.cwiseQuotient((hi - lo).cwiseMax(1e-300))).minCoeff();
  const Vec3 centre = 0.5 * (lo + hi), target = Vec3(d.m - 1, d.n - 1, d.k - 1) * 0.5;
  for (Vec3& v : m.vertices) v = (v - centre) * s + target;
  return m;
}

// ---- gen -------------------------------------------------------------------

struct GenOptions {
  std::optional<std::uint64_t> csg_seed;
  std::string mesh_file;
  int res = 32;
  std::string kind = "sdf";
  std::size_t points = 4096;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double margin = 2.0;
  bool no_fit = false;
  std::string out = "sample";
};

int run_gen(const GenOptions& o, std::ostream& out) {
  if (o.csg_seed.has_value() == !o.mesh_file.empty())
    throw UsageError("gen needs exactly one of --csg-seed or --mesh");
  const GridDims lattice = GridDims::cube(o.res);
  const data::SampleKind kind = data::sample_kind_from_string(o.kind);
  data::SampleOptions so;
  so.points = o.points;
  so.noise_sigma = o.noise;
  so.seed = o.seed;

  data::Manifest extra;
  data::Shape shape;
  io::PolyMesh reference;
  if (o.csg_seed) {
    const data::CsgNode scene = data::random_csg_scene(lattice, *o.csg_seed, o.margin);
    shape = scene;
    extra["source"] = "csg";
    extra["csg_seed"] = std::to_string(*o.csg_seed);
    extra["csg_margin"] = std::to_string(o.margin);
    const ExactField field{[&](const Vec3& p) { return data::csg_sdf_eval(scene, p); },
                           [&](const Vec3& p) { return data::csg_gradient(scene, p); }};
    reference = io::to_poly(dc_extract(data::sample_csg_grid(scene, lattice), field));
  } else {
    TriMesh m = load_tri_mesh(o.mesh_file);
    if (!o.no_fit) m = fit_to_grid(std::move(m), lattice, o.margin);
    shape = m;
    extra["source"] = "mesh";
    extra["mesh"] = fs::path(o.mesh_file).filename().string();
    reference = io::to_poly(m);
  }
  extra["seed"] = std::to_string(o.seed);
  const data::TrainingSample s = data::make_sample(shape, kind, lattice, so);
  data::save_sample(o.out, s, extra);
  io::save_obj(fs::path(o.out) / kReferenceMesh, reference);
  out << "sample=" << o.out << "\nkind=" << data::to_string(s.kind) << "\nlattice=" << o.res
      << "\nwatertight=" << s.watertight << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

std::vector<fs::path> bundle_dirs(const std::vector<std::string>& roots) {
  std::vector<fs::path> dirs;
  for (const auto& r : roots) {
    if (fs::exists(fs::path(r) / "manifest.txt")) {
      dirs.emplace_back(r);
      continue;
    }
    if (!fs::is_directory(r)) throw Error(ErrorCode::IoError, "no sample bundle at " + r);
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(r))
      if (e.is_directory() && fs::exists(e.path() / "manifest.txt")) found.push_back(e.path());
    std::sort(found.begin(), found.end());
    if (found.empty()) throw Error(ErrorCode::IoError, "no sample bundles under " + r);
    dirs.insert(dirs.end(), found.begin(), found.end());
  }
  return dirs;
}

nn::Head head_from_string(const std::string& s) {
  if (s == "signs") return nn::Head::Signs;
  if (s == "vertices") return nn::Head::Vertices;
  if (s == "flags") return nn::Head::Flags;
  throw UsageError("unknown head " + s);
}

std::optional<nn::InputKind> variant_from_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "sdf") return nn::InputKind::Sdf;
  if (s == "voxel") return nn::InputKind::Voxel;
  if (s == "points") return nn::InputKind::Points;
  throw UsageError("unknown variant " + s);
}

struct TrainOptions {
  std::vector<std::string> data = {"sample"};
  std::string head;
  std::string variant;
  std::size_t steps = 0;
  int epochs = 0;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int width = 0;
  bool augment = false;
  int lr_halving = 100;
  double stop_loss = 0.0;
  std::string vertex_mask = "auto";
  std::string init;
  std::string out;
  std::string log;
};

int run_train(const TrainOptions& o, std::ostream& out) {
  nn::TrainConfig cfg;
  cfg.head = head_from_string(o.head);
  cfg.width = o.width;
  cfg.seed = o.seed;
  cfg.lr = o.lr;
  cfg.max_steps = o.steps;
  cfg.lr_halving_epochs = o.lr_halving;
  cfg.augment = o.augment;
  cfg.stop_loss = o.stop_loss;
  cfg.vertex_mask = o.vertex_mask == "ndc" ? nn::VertexMask::Ndc
                    : o.vertex_mask == "undc" ? nn::VertexMask::Undc
                                              : nn::VertexMask::Auto;
  std::vector<data::TrainingSample> dataset;
  for (const auto& d : bundle_dirs(o.data)) dataset.push_back(data::load_sample(d));
  if (const auto v = variant_from_string(o.variant); v && *v != nn::input_kind_for(dataset.front().kind))
    throw Error(ErrorCode::InvalidKind, "variant " + o.variant + " does not match the " +
                                            data::to_string(dataset.front().kind) + " samples");
  if (o.epochs > 0)
    cfg.epochs = o.epochs;
  else if (o.steps > 0)
    cfg.epochs = int((o.steps + dataset.size() - 1) / dataset.size());
  else
    cfg.epochs = 1;

  std::optional<NetworkWeights> init;
  if (!o.init.empty()) init = nn::load_weights(o.init);
  const nn::TrainResult r = nn::train_loop(cfg, dataset, init ? &*init : nullptr);
  const fs::path path = o.out.empty() ? fs::path(o.head + ".ndcw") : fs::path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  nn::save_weights(path, r.weights);
  if (!o.log.empty()) {
    std::ofstream log(o.log);
    log << "step,loss\n";
    log.precision(9);
    for (std::size_t i = 0; i < r.step_loss.size(); ++i) log << i << ',' << r.step_loss[i] << '\n';
  }
  out.precision(9);
  out << "weights=" << path.string() << "\nvariant=" << nn::variant_name(r.weights.input, r.weights.head)
      << "\nsamples=" << dataset.size() << "\nsteps=" << r.steps
      << "\nfinal_loss=" << (r.step_loss.empty() ? 0.0 : r.step_loss.back())
      << "\nstopped_early=" << r.stopped_early << "\n";
  return kExitOk;
}

// ---- inference helpers ---------------------------------------------------

struct InputData {
  GridDims lattice;
  std::optional<ScalarGrid> grid;
  std::optional<PointCloud> cloud;
  data::Manifest manifest;
};

GridDims parse_dims(const std::string& s) {
  GridDims d;
  if (std::sscanf(s.c_str(), "%dx%dx%d", &d.m, &d.n, &d.k) != 3) throw Error(ErrorCode::ParseError, "bad dims " + s);
  return d;
}

InputData load_input(const std::string& data_dir, const std::string& input, const std::string& kind, int res) {
  InputData in;
  if (!input.empty()) {
    const fs::path p(input);
    if (has_ext(p, ".ply")) {
      in.cloud = io::load_point_cloud(p);
      if (res <= 0) throw UsageError("point-cloud input needs --res");
      in.lattice = GridDims::cube(res);
    } else {
      const FieldKind fk = kind == "udf" ? FieldKind::UDF : kind == "occ" || kind == "voxel" ? FieldKind::OCC : FieldKind::SDF;
      in.grid = io::load_scalar_grid(p, fk);
      in.lattice = in.grid->lattice_dims();
    }
    return in;
  }
  const fs::path dir(data_dir);
  in.manifest = data::read_manifest(dir / "manifest.txt");
  const data::TrainingSample s = data::load_sample(dir);
  in.lattice = s.lattice;
  if (s.kind == data::SampleKind::POINTS)
    in.cloud = s.cloud;
  else
    in.grid = s.grid;
  return in;
}

Tensor4<float> run_net(const NetworkWeights& net, const InputData& in) {
  if (in.cloud) return nn::knn_pointnet_encode(net, *in.cloud, in.lattice);
  return nn::forward_grid_net(net, *in.grid);
}

std::vector<std::string> default_weights() {
  std::vector<std::string> w;
  for (const char* name : {"signs.ndcw", "vertices.ndcw", "flags.ndcw"})
    if (fs::exists(name)) w.emplace_back(name);
  return w;
}

PredictionFields infer_fields(const InputData& in, const std::vector<std::string>& weights) {
  PredictionFields f;
  f.offsets = VertexOffsetGrid(in.lattice, Vec3::Constant(0.5));
  for (const auto& w : weights) {
    const NetworkWeights net = nn::load_weights(w);
    nn::apply_head(f, net.head, run_net(net, in), in.lattice);
  }
  return f;
}

// ---- infer -----------------------------------------------------------------

struct InferOptions {
  std::vector<std::string> weights;
  std::string data = "sample";
  std::string input;
  std::string kind = "sdf";
  int res = 0;
  std::string out = "prediction";
};

int run_infer(const InferOptions& o, std::ostream& out) {
  const std::vector<std::string> weights = o.weights.empty() ? default_weights() : o.weights;
  if (weights.empty()) throw UsageError("infer needs --weights");
  const InputData in = load_input(o.data, o.input, o.kind, o.res);
  fs::create_directories(o.out);
  for (const auto& w : weights) {
    const NetworkWeights net = nn::load_weights(w);
    PredictionFields f;
    nn::apply_head(f, net.head, run_net(net, in), in.lattice);
    const fs::path dir(o.out);
    switch (net.head) {
      case nn::Head::Signs: io::save_signs(dir / "signs.ndcg", *f.signs); break;
      case nn::Head::Vertices: io::save_offsets(dir / "offsets.ndcg", f.offsets); break;
      case nn::Head::Flags: io::save_flags(dir / "flags.ndcg", *f.flags); break;
    }
    out << nn::to_string(net.head) << '=' << (dir / (net.head == nn::Head::Signs    ? "signs.ndcg"
                                                     : net.head == nn::Head::Flags ? "flags.ndcg"
                                                                                   : "offsets.ndcg"))
                                                    .string()
        << '\n';
  }
  return kExitOk;
}

// ---- mesh ------------------------------------------------------------------

struct MeshOptions {
  std::string mode;
  std::string grid;
  std::string kind = "sdf";
  std::string signs, offsets, flags, orient_signs;
  std::vector<std::string> weights;
  std::string data = "sample";
  std::string input;
  int res = 0;
  bool close = false;
  int hole_passes = kMaxHoleClosingPasses;
  std::optional<std::uint64_t> tri_seed;
  std::string out = "mesh.obj";
};

int run_mesh(const MeshOptions& o, std::ostream& out) {
  io::PolyMesh result;
  std::optional<QuadMesh> quads;
  const std::string& mode = o.mode;
  if ((o.close || o.hole_passes != kMaxHoleClosingPasses) && mode != "undc")
    throw UsageError("--close-holes applies to --mode undc only");
  if (!o.orient_signs.empty() && mode != "undc") throw UsageError("--orient-signs applies to --mode undc only");

  if (mode == "dc" || mode == "dc-est" || mode == "mc") {
    ScalarGrid grid;
    std::optional<data::CsgNode> scene;
    if (!o.grid.empty()) {
      grid = io::load_scalar_grid(o.grid, o.kind == "udf" ? FieldKind::UDF : FieldKind::SDF);
    } else {
      const InputData in = load_input(o.data, "", o.kind, 0);
      if (!in.grid || in.grid->kind != FieldKind::SDF)
        throw Error(ErrorCode::InvalidKind, mode + " needs a signed distance grid");
      grid = *in.grid;
      if (in.manifest.count("source") && in.manifest.at("source") == "csg") {
        const double margin = in.manifest.count("csg_margin") ? std::stod(in.manifest.at("csg_margin")) : 2.0;
        scene = data::random_csg_scene(grid.dims, std::stoull(in.manifest.at("csg_seed")), margin);
      }
    }
    if (grid.kind != FieldKind::SDF) throw Error(ErrorCode::InvalidKind, mode + " needs a signed distance grid");
    if (mode == "mc") {
      result = io::to_poly(mc_extract(grid));
    } else if (mode == "dc-est") {
      quads = dc_extract(grid, EstimatedNormals{});
    } else {
      if (!scene) throw Error(ErrorCode::InvalidKind, "dc with exact normals needs a CSG sample bundle; use dc-est");
      const data::CsgNode& sc = *scene;
      quads = dc_extract(grid, ExactField{[&](const Vec3& p) { return data::csg_sdf_eval(sc, p); },
                                          [&](const Vec3& p) { return data::csg_gradient(sc, p); }});
    }
  } else if (mode == "ndc" || mode == "undc") {
    const bool need_net = (mode == "ndc" && (o.signs.empty() || o.offsets.empty())) ||
                          (mode == "undc" && (o.flags.empty() || o.offsets.empty()));
    PredictionFields f;
    std::optional<InputData> in;
    if (need_net) {
      in = load_input(o.data, o.input, o.kind, o.res);
      f = infer_fields(*in, o.weights.empty() ? default_weights() : o.weights);
    }
    if (!o.signs.empty()) f.signs = io::load_signs(o.signs);
    if (!o.flags.empty()) f.flags = io::load_flags(o.flags);
    bool have_offsets = !o.offsets.empty();
    if (have_offsets) f.offsets = io::load_offsets(o.offsets);
    for (const auto& w : o.weights.empty() && need_net ? default_weights() : o.weights)
      if (nn::load_weights(w).head == nn::Head::Vertices) have_offsets = true;
    if (!have_offsets) throw Error(ErrorCode::InvalidConfig, "no vertex source: give --offsets or a vertices network");

    if (mode == "ndc") {
      if (!f.signs && in && in->grid && in->grid->kind == FieldKind::SDF) f.signs = signs_from_scalar(*in->grid);
      if (!f.signs) throw Error(ErrorCode::InvalidConfig, "no sign source: give --signs or a signs network");
      quads = ndc_extract(*f.signs, f.offsets);
    } else {
      if (!f.flags) throw Error(ErrorCode::InvalidConfig, "no flag source: give --flags or a flags network");
      FlagField flags = *f.flags;
      if (o.close) flags = close_holes(flags, o.hole_passes);
      quads = undc_extract(flags, f.offsets);
      if (!o.orient_signs.empty()) quads = orient_by_signs(*quads, flags, io::load_signs(o.orient_signs));
    }
  } else {
    throw UsageError("unknown mode " + mode);
  }

  if (quads) result = o.tri_seed ? io::to_poly(split_quads(*quads, *o.tri_seed)) : io::to_poly(*quads);
  save_poly(o.out, result);
  out << "mesh=" << o.out << "\nvertices=" << result.vertices.size() << "\nfaces=" << result.faces.size() << "\n";
  return kExitOk;
}

// ---- eval / stats ----------------------------------------------------------

struct EvalOptions {
  std::vector<std::string> files;  // [reference] prediction
  std::string data = "sample";
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  std::string csv, label, out;
};

int run_eval(const EvalOptions& o, std::ostream& out) {
  if (o.files.size() > 2) throw UsageError("eval takes at most two meshes");
  const fs::path gt = o.files.size() == 2 ? fs::path(o.files[0]) : fs::path(o.data) / kReferenceMesh;
  const std::string pred = o.files.empty() ? "mesh.obj" : o.files.back();
  metrics::EvalOptions eo;
  eo.samples = o.samples;
  eo.seed = o.seed;
  const metrics::MetricsReport r = metrics::evaluate(load_tri_mesh(gt), load_tri_mesh(pred), eo);
  const std::string kv = metrics::to_key_value(r);
  out << kv;
  if (!o.out.empty()) std::ofstream(o.out) << kv;
  if (!o.csv.empty()) {
    const bool fresh = !fs::exists(o.csv) || fs::file_size(o.csv) == 0;
    std::ofstream csv(o.csv, std::ios::app);
    if (fresh) csv << metrics::csv_header();
    csv << metrics::csv_row(o.label.empty() ? pred : o.label, r);
  }
  return kExitOk;
}

int run_stats(const std::string& path, std::ostream& out) {
  const fs::path p(path);
  const io::PolyMesh m = has_ext(p, ".ply") ? io::load_ply(p) : io::load_obj(p);
  bool all_quads = !m.faces.empty();
  for (const auto& f : m.faces) all_quads = all_quads && f.size() == 4;
  EdgeTopologyStats s;
  if (all_quads) {
    QuadMesh q{m.vertices, {}};
    for (const auto& f : m.faces) q.quads.push_back({f[0], f[1], f[2], f[3]});
    s = edge_topology_stats(q);
  } else {
    s = edge_topology_stats(io::triangulate(m));
  }
  out << "vertices=" << m.vertices.size() << "\nfaces=" << m.faces.size() << "\nedges_total=" << s.total
      << "\nedges_boundary=" << s.boundary << "\nedges_manifold=" << s.manifold
      << "\nedges_nonmanifold3=" << s.non_manifold_3 << "\nedges_nonmanifold4=" << s.non_manifold_4
      << "\nedges_nonmanifold_more=" << s.non_manifold_more << "\n";
  if (!m.faces.empty()) {
    const metrics::SmallAngles sa = metrics::small_angles(io::triangulate(m));
    for (int k = 0; k < 3; ++k) out << "sa_" << int(metrics::kSmallAngleDegrees[k]) << '=' << sa.pct[k] << '\n';
    out << "degenerate_triangles=" << sa.degenerate_triangles << '\n';
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural dual contouring toolkit", "ndc"};
  app.set_config("--config", "", "key=value file; [section] or dotted keys address subcommands");
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "make a training sample bundle from a random CSG scene or a mesh");
  g->add_option("--csg-seed", gen.csg_seed, "random CSG scene seed");
  g->add_option("--mesh", gen.mesh_file, "OBJ/PLY source mesh")->check(CLI::ExistingFile);
  g->add_option("--res", gen.res, "lattice vertices per axis")->check(CLI::Range(8, 512));
  g->add_option("--kind", gen.kind, "sdf | udf | occ | voxel | points")->check(CLI::IsMember({"sdf", "udf", "occ", "voxel", "points"}));
  g->add_option("--points", gen.points, "points for point samples");
  g->add_option("--noise", gen.noise, "Gaussian point noise sigma (cells)");
  g->add_option("--seed", gen.seed, "sampling seed");
  g->add_option("--margin", gen.margin, "empty border in cells");
  g->add_flag("--no-fit", gen.no_fit, "use mesh coordinates as grid coordinates");
  g->add_option("-o,--out", gen.out, "bundle directory");

  TrainOptions train;
  auto* t = app.add_subcommand("train", "train one head");
  t->add_option("--data", train.data, "sample bundle(s) or directories of bundles");
  t->add_option("--head", train.head, "signs | vertices | flags")->required()->check(CLI::IsMember({"signs", "vertices", "flags"}));
  t->add_option("--variant", train.variant, "sdf | voxel | points (checked against the data)")
      ->check(CLI::IsMember({"sdf", "voxel", "points"}));
  t->add_option("--steps", train.steps, "step cap");
  t->add_option("--epochs", train.epochs, "epochs (default: enough for --steps)");
  t->add_option("--lr", train.lr, "Adam learning rate");
  t->add_option("--seed", train.seed, "seed");
  t->add_option("--width", train.width, "hidden channels (0 = default)");
  t->add_flag("--augment", train.augment, "random rotation/mirror/inversion per sample and epoch");
  t->add_option("--lr-halving", train.lr_halving, "halve the rate every N epochs (0 = never)");
  t->add_option("--stop-loss", train.stop_loss, "stop once a step loss is below this");
  t->add_option("--vertex-mask", train.vertex_mask, "auto | ndc | undc")->check(CLI::IsMember({"auto", "ndc", "undc"}));
  t->add_option("--init", train.init, "starting weights");
  t->add_option("-o,--out", train.out, "weights file (default <head>.ndcw)");
  t->add_option("--log", train.log, "per-step loss CSV");

  InferOptions infer;
  auto* inf = app.add_subcommand("infer", "run networks on a grid or cloud and write prediction fields");
  inf->add_option("--weights", infer.weights, "weights files (default: signs/vertices/flags.ndcw if present)");
  inf->add_option("--data", infer.data, "sample bundle providing the input");
  inf->add_option("--input", infer.input, "NDCGRID scalar grid or PLY cloud instead of a bundle");
  inf->add_option("--kind", infer.kind, "field kind of --input grids")->check(CLI::IsMember({"sdf", "udf", "occ", "voxel"}));
  inf->add_option("--res", infer.res, "lattice size for cloud inputs")->check(CLI::Range(8, 512));
  inf->add_option("-o,--out", infer.out, "output directory");

  MeshOptions mesh;
  auto* me = app.add_subcommand("mesh", "extract a mesh");
  me->add_option("--mode", mesh.mode, "dc | dc-est | mc | ndc | undc")->required()->check(CLI::IsMember({"dc", "dc-est", "mc", "ndc", "undc"}));
  me->add_option("--grid", mesh.grid, "scalar grid for dc-est / mc");
  me->add_option("--kind", mesh.kind, "field kind of --grid / --input")->check(CLI::IsMember({"sdf", "udf", "occ", "voxel"}));
  me->add_option("--signs", mesh.signs, "sign grid (ndc)");
  me->add_option("--offsets", mesh.offsets, "vertex offsets (ndc, undc)");
  me->add_option("--flags", mesh.flags, "edge flags (undc)");
  me->add_option("--orient-signs", mesh.orient_signs, "sign grid used to orient undc quads");
  me->add_option("--weights", mesh.weights, "networks to run for missing fields");
  me->add_option("--data", mesh.data, "sample bundle providing the input");
  me->add_option("--input", mesh.input, "network input grid or cloud instead of a bundle");
  me->add_option("--res", mesh.res, "lattice size for cloud inputs")->check(CLI::Range(8, 512));
  me->add_flag("--close-holes", mesh.close, "undc: close small holes");
  me->add_option("--hole-passes", mesh.hole_passes, "undc hole-closing pass limit")->check(CLI::NonNegativeNumber);
  me->add_option("--tri-seed", mesh.tri_seed, "split quads into triangles with this seed");
  me->add_option("-o,--out", mesh.out, "OBJ or PLY output");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "compare a mesh against a reference");
  e->add_option("meshes", ev.files, "[reference] prediction; defaults <data>/reference.obj and mesh.obj");
  e->add_option("--data", ev.data, "sample bundle holding the reference");
  e->add_option("--samples", ev.samples, "surface samples per mesh")->check(CLI::PositiveNumber);
  e->add_option("--seed", ev.seed, "sampling seed");
  e->add_option("--csv", ev.csv, "append a CSV row here");
  e->add_option("--label", ev.label, "CSV row label");
  e->add_option("--out", ev.out, "also write the key=value report here");

  std::string stats_path;
  auto* st = app.add_subcommand("stats", "edge topology statistics of a mesh");
  st->add_option("mesh", stats_path, "OBJ or PLY mesh")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "ndc: " << ex.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (g->parsed()) return run_gen(gen, out);
    if (t->parsed()) return run_train(train, out);
    if (inf->parsed()) return run_infer(infer, out);
    if (me->parsed()) return run_mesh(mesh, out);
    if (e->parsed()) return run_eval(ev, out);
    if (st->parsed()) return run_stats(stats_path, out);
  } catch (const UsageError& ex) {
    err << "ndc: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const Error& ex) {
    err << "ndc: " << ex.what() << "\n";
    return ex.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitData;
  } catch (const std::exception& ex) {
    err << "ndc: " << ex.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace ndc::cli
