#include "berrypick/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "berrypick/errors.hpp"

namespace berrypick::io {

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path &path, bool binary) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw IoError(path.string(), ec.message());
  }
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out)
    throw IoError(path.string(), "cannot open for writing");
  return out;
}

std::ifstream open_in(const fs::path &path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in)
    throw IoError(path.string(), "cannot open for reading");
  return in;
}

void finish(std::ofstream &out, const fs::path &path) {
  out.flush();
  if (!out)
    throw IoError(path.string(), "write failed");
}

double parse_double(const std::string &tok, const fs::path &path) {
  double v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw InputError(path.string() + ": bad number '" + tok + "'");
  return v;
}

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<std::string> properties; // "list" properties named with prefix
};

struct PlyHeader {
  std::vector<PlyElement> elements;
};

PlyHeader read_ply_header(std::istream &in, const fs::path &path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw InputError(path.string() + ": not a PLY file");
  PlyHeader h;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (kw == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      h.elements.push_back(e);
    } else if (kw == "property") {
      if (h.elements.empty())
        throw InputError(path.string() + ": property before element");
      std::string type, name;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> name;
        name = "list:" + name;
      } else {
        ls >> name;
      }
      h.elements.back().properties.push_back(name);
    } else if (kw == "end_header") {
      if (!ascii)
        throw InputError(path.string() + ": only ASCII PLY is supported");
      return h;
    }
  }
  throw InputError(path.string() + ": truncated PLY header");
}

int index_of(const PlyElement &e, const std::string &name) {
  for (std::size_t i = 0; i < e.properties.size(); ++i)
    if (e.properties[i] == name)
      return static_cast<int>(i);
  return -1;
}

// Reads the vertex element (position + optional colour) and optional faces.
void read_ply_body(std::istream &in, const PlyHeader &h, const fs::path &path,
                   PointCloud *cloud, TriangleMesh *mesh) {
  std::string line;
  for (const auto &e : h.elements) {
    if (e.name == "vertex") {
      const int ix = index_of(e, "x"), iy = index_of(e, "y"),
                iz = index_of(e, "z");
      const int ir = index_of(e, "red"), ig = index_of(e, "green"),
                ib = index_of(e, "blue");
      if (ix < 0 || iy < 0 || iz < 0)
        throw InputError(path.string() + ": vertex lacks x/y/z");
      const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;
      if (mesh)
        mesh->vertices.resize(3, static_cast<Eigen::Index>(e.count));
      std::vector<std::string> toks(e.properties.size());
      for (std::size_t i = 0; i < e.count; ++i) {
        for (auto &t : toks)
          if (!(in >> t))
            throw InputError(path.string() + ": truncated vertex data");
        const Vec3 p(parse_double(toks[ix], path), parse_double(toks[iy], path),
                     parse_double(toks[iz], path));
        if (!p.allFinite())
          throw InputError(path.string() + ": non-finite coordinate");
        if (cloud) {
          Point pt;
          pt.position = p;
          if (has_color)
            pt.color = Rgb{static_cast<std::uint8_t>(std::stoi(toks[ir])),
                           static_cast<std::uint8_t>(std::stoi(toks[ig])),
                           static_cast<std::uint8_t>(std::stoi(toks[ib]))};
          cloud->points.push_back(pt);
        }
        if (mesh)
          mesh->vertices.col(static_cast<Eigen::Index>(i)) = p;
      }
    } else if (e.name == "face" && mesh) {
      for (std::size_t i = 0; i < e.count; ++i) {
        int n = 0;
        if (!(in >> n) || n != 3)
          throw InputError(path.string() + ": only triangle faces supported");
        std::array<int, 3> f{};
        in >> f[0] >> f[1] >> f[2];
        if (!in)
          throw InputError(path.string() + ": truncated face data");
        for (int v : f)
          if (v < 0 || v >= mesh->vertices.cols())
            throw InputError(path.string() + ": face index out of range");
        mesh->faces.push_back(f);
      }
    } else {
      // Skip unknown elements line by line.
      std::getline(in, line);
      for (std::size_t i = 0; i < e.count; ++i)
        std::getline(in, line);
    }
  }
}

void write_pnm_header(std::ostream &out, const char *magic, int w, int h,
                      int maxval) {
  out << magic << "\n" << w << " " << h << "\n" << maxval << "\n";
}

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_pnm_header(std::istream &in, const fs::path &path) {
  PnmHeader h;
  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw InputError(path.string() + ": truncated PNM header");
  };
  h.magic = next_token();
  h.width = std::stoi(next_token());
  h.height = std::stoi(next_token());
  h.maxval = std::stoi(next_token());
  in.get(); // single whitespace before raster
  if (h.width <= 0 || h.height <= 0)
    throw InputError(path.string() + ": bad image dimensions");
  return h;
}

} // namespace

void write_ply(const fs::path &path, const PointCloud &cloud) {
  const bool color =
      !cloud.empty() && std::all_of(cloud.points.begin(), cloud.points.end(),
                                    [](const Point &p) { return p.color; });
  auto out = open_out(path, false);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (color)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (const auto &p : cloud.points) {
    out << shortest(p.position.x()) << ' ' << shortest(p.position.y()) << ' '
        << shortest(p.position.z());
    if (color)
      out << ' ' << int(p.color->r) << ' ' << int(p.color->g) << ' '
          << int(p.color->b);
    out << '\n';
  }
  finish(out, path);
}

PointCloud read_ply(const fs::path &path) {
  auto in = open_in(path, false);
  const auto h = read_ply_header(in, path);
  PointCloud cloud;
  read_ply_body(in, h, path, &cloud, nullptr);
  return cloud;
}

TriangleMesh read_ply_mesh(const fs::path &path) {
  auto in = open_in(path, false);
  const auto h = read_ply_header(in, path);
  TriangleMesh mesh;
  read_ply_body(in, h, path, nullptr, &mesh);
  if (mesh.faces.empty())
    throw InputError(path.string() + ": mesh has no faces");
  return mesh;
}

void write_ply_mesh(const fs::path &path, const TriangleMesh &mesh) {
  auto out = open_out(path, false);
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.cols()
      << "\nproperty double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.faces.size()
      << "\nproperty list uchar int vertex_indices\nend_header\n";
  for (Eigen::Index i = 0; i < mesh.vertices.cols(); ++i)
    out << shortest(mesh.vertices(0, i)) << ' ' << shortest(mesh.vertices(1, i))
        << ' ' << shortest(mesh.vertices(2, i)) << '\n';
  for (const auto &f : mesh.faces)
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  finish(out, path);
}

void write_depth_pgm(const fs::path &path, const DepthImage &depth) {
  auto out = open_out(path, true);
  write_pnm_header(out, "P5", depth.width, depth.height, 65535);
  std::vector<char> raster(depth.values.size() * 2);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    raster[2 * i] = static_cast<char>(depth.values[i] >> 8);
    raster[2 * i + 1] = static_cast<char>(depth.values[i] & 0xff);
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  finish(out, path);
}

DepthImage read_depth_pgm(const fs::path &path) {
  auto in = open_in(path, true);
  const auto h = read_pnm_header(in, path);
  if (h.magic != "P5" || h.maxval != 65535)
    throw InputError(path.string() + ": expected 16-bit P5 PGM");
  DepthImage depth(h.width, h.height);
  std::vector<unsigned char> raster(depth.values.size() * 2);
  in.read(reinterpret_cast<char *>(raster.data()),
          static_cast<std::streamsize>(raster.size()));
  if (!in)
    throw InputError(path.string() + ": truncated raster");
  for (std::size_t i = 0; i < depth.values.size(); ++i)
    depth.values[i] =
        static_cast<std::uint16_t>((raster[2 * i] << 8) | raster[2 * i + 1]);
  return depth;
}

void write_ppm(const fs::path &path, const RgbImage &rgb) {
  auto out = open_out(path, true);
  write_pnm_header(out, "P6", rgb.width, rgb.height, 255);
  out.write(reinterpret_cast<const char *>(rgb.values.data()),
            static_cast<std::streamsize>(rgb.values.size()));
  finish(out, path);
}

RgbImage read_ppm(const fs::path &path) {
  auto in = open_in(path, true);
  const auto h = read_pnm_header(in, path);
  if (h.magic != "P6" || h.maxval != 255)
    throw InputError(path.string() + ": expected 8-bit P6 PPM");
  RgbImage rgb(h.width, h.height);
  in.read(reinterpret_cast<char *>(rgb.values.data()),
          static_cast<std::streamsize>(rgb.values.size()));
  if (!in)
    throw InputError(path.string() + ": truncated raster");
  return rgb;
}

void write_mask(const fs::path &pgm_path, const InstanceMask &mask) {
  auto out = open_out(pgm_path, true);
  write_pnm_header(out, "P5", mask.width, mask.height, 255);
  std::vector<char> raster(mask.bits.size());
  for (std::size_t i = 0; i < raster.size(); ++i)
    raster[i] = mask.bits[i] ? static_cast<char>(255) : 0;
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  finish(out, pgm_path);

  nlohmann::json side = {{"instance_id", mask.instance_id},
                         {"ripeness", std::string(to_string(mask.ripeness))}};
  auto sidecar = pgm_path;
  sidecar.replace_extension(".json");
  write_text(sidecar, side.dump(2) + "\n");
}

InstanceMask read_mask(const fs::path &pgm_path) {
  auto in = open_in(pgm_path, true);
  const auto h = read_pnm_header(in, pgm_path);
  if (h.magic != "P5" || h.maxval > 255)
    throw InputError(pgm_path.string() + ": expected 8-bit P5 PGM mask");
  auto sidecar = pgm_path;
  sidecar.replace_extension(".json");
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_text(sidecar));
  } catch (const nlohmann::json::exception &e) {
    throw InputError(sidecar.string() + ": " + e.what());
  }
  if (!side.contains("instance_id") || !side.contains("ripeness"))
    throw InputError(sidecar.string() + ": missing instance_id/ripeness");
  InstanceMask mask(h.width, h.height, side["instance_id"].get<int>(),
                    ripeness_from_string(side["ripeness"].get<std::string>()));
  std::vector<unsigned char> raster(mask.bits.size());
  in.read(reinterpret_cast<char *>(raster.data()),
          static_cast<std::streamsize>(raster.size()));
  if (!in)
    throw InputError(pgm_path.string() + ": truncated raster");
  for (std::size_t i = 0; i < raster.size(); ++i)
    mask.bits[i] = raster[i] != 0;
  return mask;
}

void write_text(const fs::path &path, const std::string &text) {
  auto out = open_out(path, false);
  out << text;
  finish(out, path);
}

std::string read_text(const fs::path &path) {
  auto in = open_in(path, false);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace berrypick::io
