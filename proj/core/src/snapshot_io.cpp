#include "ddl/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ddl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::invalid_argument("bad number '" + std::string(s) + "' in snapshot");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Recovers N and L from sorted distinct cell-centre coordinates.
std::pair<int, double> axis_from_coords(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 2) throw std::invalid_argument("snapshot axis needs >= 2 distinct coordinates");
  const int n = static_cast<int>(xs.size());
  const double dx = (xs.back() - xs.front()) / (n - 1);
  return {n, dx * n};
}

static_assert(std::endian::native == std::endian::little,
              "binary snapshots assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::invalid_argument("truncated binary snapshot");
  return v;
}

}  // namespace

void write_field_csv(const fs::path& path, const Field& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const GridSpec& g = u.grid();
  out << (g.dim == 2 ? "x,y,u\n" : "x,u\n");
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Vec x = g.point(k);
    out << format_double(x[0]) << ',';
    if (g.dim == 2) out << format_double(x[1]) << ',';
    out << format_double(u[k]) << '\n';
  }
}

Field read_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  int dim;
  if (header == "x,u")
    dim = 1;
  else if (header == "x,y,u")
    dim = 2;
  else
    throw std::invalid_argument("unexpected snapshot header '" + header + "'");

  std::vector<double> xs, ys, us;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = split(line, ',');
    if (static_cast<int>(cols.size()) != dim + 1)
      throw std::invalid_argument("wrong column count in " + path.string());
    xs.push_back(parse_double(cols[0]));
    if (dim == 2) ys.push_back(parse_double(cols[1]));
    us.push_back(parse_double(cols[static_cast<std::size_t>(dim)]));
  }
  auto [nx, lx] = axis_from_coords(xs);
  std::array<double, kMaxDim> length{lx, 1.0};
  std::array<int, kMaxDim> n{nx, 1};
  if (dim == 2) {
    auto [ny, ly] = axis_from_coords(ys);
    length[1] = ly;
    n[1] = ny;
  }
  GridSpec g = make_grid(dim, length, n);
  if (us.size() != g.size()) throw std::invalid_argument("snapshot rows do not fill the grid");
  return Field(g, std::move(us));
}

void write_field_binary(const fs::path& path, const Field& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const GridSpec& g = u.grid();
  out.write("DDL1", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim));
  for (int j = 0; j < g.dim; ++j) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n[j]));
  for (int j = 0; j < g.dim; ++j) put<double>(out, g.length[j]);
  out.write(reinterpret_cast<const char*>(u.values().data()),
            static_cast<std::streamsize>(u.size() * sizeof(double)));
}

Field read_field_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "DDL1", 4) != 0)
    throw std::invalid_argument(path.string() + " is not a DDL1 snapshot");
  const auto dim = static_cast<int>(get<std::uint32_t>(in));
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("bad dimension in binary snapshot");
  std::array<int, kMaxDim> n{1, 1};
  std::array<double, kMaxDim> length{1.0, 1.0};
  for (int j = 0; j < dim; ++j) n[j] = static_cast<int>(get<std::uint32_t>(in));
  for (int j = 0; j < dim; ++j) length[j] = get<double>(in);
  GridSpec g = make_grid(dim, length, n);
  std::vector<double> values(g.size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw std::invalid_argument("truncated binary snapshot");
  return Field(g, std::move(values));
}

Field read_field(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::memcmp(magic, "DDL1", 4) == 0) return read_field_binary(path);
  return read_field_csv(path);
}

void write_trajectory(const fs::path& dir, const Trajectory& traj, const ProblemEcho& problem) {
  fs::create_directories(dir);
  json manifest;
  const auto& p = traj.params();
  manifest["params"] = {{"epsilon", p.epsilon}, {"delta", p.delta},
                        {"cfl_safety", p.cfl_safety}, {"flux", p.flux},
                        {"diffusion", p.diffusion}, {"scheme", p.scheme}};
  manifest["role"] = p.role;
  manifest["steps"] = traj.steps;
  manifest["dt_min"] = traj.dt_min;
  manifest["wall_seconds"] = traj.wall_seconds;
  const auto& f = traj.flags();
  manifest["flags"] = {{"blowup", f.blowup},
                       {"tainted", f.tainted},
                       {"dispersive_regime", f.dispersive_regime},
                       {"blowup_time", f.blowup_time},
                       {"blowup_max", f.blowup_max},
                       {"taint_time", f.taint_time}};
  manifest["problem"] = problem;
  json samples = json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%04zu.csv", k);
    write_field_csv(dir / name, traj.samples()[k].u);
    samples.push_back({{"t", traj.samples()[k].t}, {"file", name}});
  }
  manifest["samples"] = samples;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

LoadedTrajectory read_trajectory(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::invalid_argument("no manifest.json in " + dir.string());
  json manifest = json::parse(in);
  Trajectory::Params params;
  const auto& jp = manifest.at("params");
  params.epsilon = jp.value("epsilon", 0.0);
  params.delta = jp.value("delta", 0.0);
  params.cfl_safety = jp.value("cfl_safety", 0.0);
  params.flux = jp.value("flux", "");
  params.diffusion = jp.value("diffusion", "");
  params.scheme = jp.value("scheme", "");
  params.role = manifest.value("role", "solver");

  LoadedTrajectory loaded{Trajectory(params), {}};
  for (const auto& s : manifest.at("samples"))
    loaded.traj.push(s.at("t").get<double>(), read_field(dir / s.at("file").get<std::string>()));
  loaded.traj.steps = manifest.value("steps", std::size_t{0});
  loaded.traj.dt_min = manifest.value("dt_min", 0.0);
  loaded.traj.wall_seconds = manifest.value("wall_seconds", 0.0);
  if (manifest.contains("flags")) {
    const auto& jf = manifest["flags"];
    auto& f = loaded.traj.flags();
    f.blowup = jf.value("blowup", false);
    f.tainted = jf.value("tainted", false);
    f.dispersive_regime = jf.value("dispersive_regime", false);
    f.blowup_time = jf.value("blowup_time", 0.0);
    f.blowup_max = jf.value("blowup_max", 0.0);
    f.taint_time = jf.value("taint_time", 0.0);
  }
  if (manifest.contains("problem"))
    loaded.problem = manifest["problem"].get<ProblemEcho>();
  return loaded;
}

}  // namespace ddl
