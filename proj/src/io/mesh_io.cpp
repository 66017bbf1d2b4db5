#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "ndc/binio.hpp"
#include "ndc/io.hpp"

namespace ndc::io {

PolyMesh to_poly(const QuadMesh& mesh) {
  PolyMesh p{mesh.vertices, {}};
  p.faces.reserve(mesh.quads.size());
  for (const auto& q : mesh.quads) p.faces.emplace_back(q.begin(), q.end());
  return p;
}

PolyMesh to_poly(const TriMesh& mesh) {
  PolyMesh p{mesh.vertices, {}};
  p.faces.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) p.faces.emplace_back(t.begin(), t.end());
  return p;
}

TriMesh triangulate(const PolyMesh& mesh) {
  TriMesh t{mesh.vertices, {}};
  for (const auto& f : mesh.faces)
    for (std::size_t i = 1; i + 1 < f.size(); ++i) t.triangles.push_back({f[0], f[i], f[i + 1]});
  return t;
}

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view next_token(std::string_view& s) {
  s = trim(s);
  std::size_t end = 0;
  while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
  std::string_view tok = s.substr(0, end);
  s.remove_prefix(end);
  return tok;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_error(line, "bad number '" + std::string(tok) + "'");
  return v;
}

long parse_index(std::string_view tok, std::size_t line) {
  const std::string_view head = tok.substr(0, tok.find('/'));
  long v = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
  if (head.empty() || ec != std::errc() || ptr != head.data() + head.size())
    parse_error(line, "bad face index '" + std::string(tok) + "'");
  return v;
}

}  // namespace

PolyMesh read_obj(std::istream& in, ObjReadReport* report) {
  PolyMesh mesh;
  ObjReadReport local;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const std::string_view kind = next_token(s);
    if (kind == "v") {
      Vec3 p;
      for (int a = 0; a < 3; ++a) {
        const std::string_view tok = next_token(s);
        if (tok.empty()) parse_error(line, "vertex needs 3 coordinates");
        p[a] = parse_double(tok, line);
      }
      mesh.vertices.push_back(p);  // an optional w / colour tail is ignored
    } else if (kind == "f") {
      std::vector<int> face;
      for (std::string_view tok = next_token(s); !tok.empty(); tok = next_token(s)) {
        const long idx = parse_index(tok, line);
        const long n = long(mesh.vertices.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (idx == 0 || resolved < 0 || resolved >= n)
          parse_error(line, "face index " + std::to_string(idx) + " out of range");
        face.push_back(int(resolved));
      }
      if (face.size() < 3) parse_error(line, "face needs at least 3 vertices");
      mesh.faces.push_back(std::move(face));
    } else {
      ++local.skipped_records;
    }
  }
  if (report) *report = local;
  return mesh;
}

PolyMesh load_obj(const std::filesystem::path& path, ObjReadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_obj(in, report);
}

void write_obj(std::ostream& out, const PolyMesh& mesh) {
  char buf[64];
  std::string text;
  text.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 24);
  for (const Vec3& v : mesh.vertices) {
    text += 'v';
    for (int a = 0; a < 3; ++a) {
      const auto r = std::to_chars(buf, buf + sizeof buf, v[a]);
      text += ' ';
      text.append(buf, r.ptr);
    }
    text += '\n';
  }
  for (const auto& f : mesh.faces) {
    text += 'f';
    for (int i : f) {
      text += ' ';
      text += std::to_string(i + 1);
    }
    text += '\n';
  }
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing OBJ");
}

void save_obj(const std::filesystem::path& path, const PolyMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_obj(out, mesh);
}

void write_ply(std::ostream& out, const PolyMesh& mesh) {
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) {
      const auto bits = std::bit_cast<std::uint64_t>(v[a]);
      binio::put_u32(out, std::uint32_t(bits));
      binio::put_u32(out, std::uint32_t(bits >> 32));
    }
  for (const auto& f : mesh.faces) {
    if (f.size() > 255) throw Error(ErrorCode::ShapeError, "PLY face with more than 255 vertices");
    binio::put_u8(out, std::uint8_t(f.size()));
    for (int i : f) binio::put_u32(out, std::uint32_t(i));
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing PLY");
}

void save_ply(const std::filesystem::path& path, const PolyMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_ply(out, mesh);
}

namespace {

enum class PlyType { I8, U8, I16, U16, I32, U32, F32, F64 };

PlyType ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::I8;
  if (name == "uchar" || name == "uint8") return PlyType::U8;
  if (name == "short" || name == "int16") return PlyType::I16;
  if (name == "ushort" || name == "uint16") return PlyType::U16;
  if (name == "int" || name == "int32") return PlyType::I32;
  if (name == "uint" || name == "uint32") return PlyType::U32;
  if (name == "float" || name == "float32") return PlyType::F32;
  if (name == "double" || name == "float64") return PlyType::F64;
  throw Error(ErrorCode::ParseError, "unknown PLY property type '" + name + "'");
}

double read_ply_value(std::istream& in, PlyType t) {
  unsigned char b[8];
  auto size = [](PlyType x) {
    switch (x) {
      case PlyType::I8: case PlyType::U8: return 1;
      case PlyType::I16: case PlyType::U16: return 2;
      case PlyType::I32: case PlyType::U32: case PlyType::F32: return 4;
      case PlyType::F64: return 8;
    }
    return 0;
  };
  const int n = size(t);
  binio::read_exact(in, reinterpret_cast<char*>(b), std::size_t(n), "PLY body");
  std::uint64_t u = 0;
  for (int i = 0; i < n; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  switch (t) {
    case PlyType::I8: return double(std::int8_t(u));
    case PlyType::U8: return double(std::uint8_t(u));
    case PlyType::I16: return double(std::int16_t(u));
    case PlyType::U16: return double(std::uint16_t(u));
    case PlyType::I32: return double(std::int32_t(u));
    case PlyType::U32: return double(std::uint32_t(u));
    case PlyType::F32: return double(std::bit_cast<float>(std::uint32_t(u)));
    case PlyType::F64: return std::bit_cast<double>(u);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type;
  bool list = false;
  PlyType count_type = PlyType::U8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

}  // namespace

PolyMesh read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply") throw Error(ErrorCode::BadMagic, "not a PLY file");
  std::vector<PlyElement> elements;
  bool binary_le = false;
  while (true) {
    if (!std::getline(in, line)) throw Error(ErrorCode::TruncatedPayload, "PLY header not terminated");
    std::istringstream ls{std::string(trim(line))};
    std::string word;
    ls >> word;
    if (word == "end_header") break;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) throw Error(ErrorCode::ParseError, "PLY property before element");
      std::string t;
      ls >> t;
      PlyProperty p;
      if (t == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.list = true;
        p.count_type = ply_type(ct);
        p.type = ply_type(it);
      } else {
        p.type = ply_type(t);
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    }
  }
  if (!binary_le) throw Error(ErrorCode::ParseError, "only binary_little_endian PLY is supported");
  PolyMesh mesh;
  for (const auto& e : elements) {
    for (std::size_t r = 0; r < e.count; ++r) {
      Vec3 p = Vec3::Zero();
      std::vector<int> face;
      for (const auto& prop : e.props) {
        if (prop.list) {
          const auto n = std::size_t(read_ply_value(in, prop.count_type));
          for (std::size_t i = 0; i < n; ++i) face.push_back(int(read_ply_value(in, prop.type)));
        } else {
          const double v = read_ply_value(in, prop.type);
          if (prop.name == "x") p[0] = v;
          if (prop.name == "y") p[1] = v;
          if (prop.name == "z") p[2] = v;
        }
      }
      if (e.name == "vertex") mesh.vertices.push_back(p);
      if (e.name == "face") {
        for (int i : face)
          if (i < 0 || std::size_t(i) >= mesh.vertices.size())
            throw Error(ErrorCode::ParseError, "PLY face index out of range");
        mesh.faces.push_back(std::move(face));
      }
    }
  }
  return mesh;
}

PolyMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_ply(in);
}

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  for (int c = 0; c < cloud.feature_channels; ++c) out << "property double f" << c << "\n";
  out << "end_header\n";
  auto put_f64 = [&](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    binio::put_u32(out, std::uint32_t(bits));
    binio::put_u32(out, std::uint32_t(bits >> 32));
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) put_f64(cloud.points[i][a]);
    for (int c = 0; c < cloud.feature_channels; ++c) put_f64(cloud.features[i * cloud.feature_channels + c]);
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing point cloud");
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  // Re-parse the header to count feature properties, then read generically.
  std::string line;
  int features = 0;
  std::streampos start = in.tellg();
  while (std::getline(in, line) && trim(line) != "end_header")
    if (line.rfind("property double f", 0) == 0) ++features;
  in.clear();
  in.seekg(start);
  PointCloud cloud;
  cloud.feature_channels = features;
  std::getline(in, line);
  if (trim(line) != "ply") throw Error(ErrorCode::BadMagic, "not a PLY file");
  std::size_t count = 0;
  while (std::getline(in, line) && trim(line) != "end_header") {
    std::istringstream ls(line);
    std::string w, name;
    ls >> w;
    if (w == "element") {
      ls >> name;
      if (name == "vertex") ls >> count;
    }
  }
  cloud.points.resize(count);
  cloud.features.resize(count * std::size_t(features));
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a < 3; ++a) cloud.points[i][a] = read_ply_value(in, PlyType::F64);
    for (int c = 0; c < features; ++c) cloud.features[i * features + c] = read_ply_value(in, PlyType::F64);
  }
  return cloud;
}

}  // namespace ndc::io
