#include "pulseforge/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace pulseforge::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

int header_dim(const json& header, const char* key) {
  if (!header.contains(key) || !header[key].is_number_integer())
    throw Error(ErrorKind::MalformedHeader, std::string("header field '") + key + "' missing or not an integer");
  const auto v = header[key].get<long long>();
  if (v < 1 || v > (1LL << 30))
    throw Error(ErrorKind::MalformedHeader, std::string("header field '") + key + "' out of range");
  return int(v);
}

}  // namespace

fs::path cube_stem(const fs::path& path) {
  if (path.extension() == ".f32" || path.extension() == ".json") return fs::path(path).replace_extension();
  return path;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

VideoCube read_cube(const fs::path& path) {
  const fs::path stem = cube_stem(path);
  fs::path header_path = stem;
  header_path += ".json";
  fs::path payload_path = stem;
  payload_path += ".f32";

  json header;
  try {
    header = json::parse(slurp(header_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, std::string("cube header: ") + e.what());
  }
  if (!header.is_object()) throw Error(ErrorKind::MalformedHeader, "cube header is not an object");
  const int t = header_dim(header, "t");
  const int h = header_dim(header, "h");
  const int w = header_dim(header, "w");
  const int c = header_dim(header, "c");
  if (!header.contains("fps") || !header["fps"].is_number())
    throw Error(ErrorKind::MalformedHeader, "header field 'fps' missing");
  const double fps = header["fps"].get<double>();

  const std::string payload = slurp(payload_path);
  const std::size_t expected = std::size_t(t) * h * w * c;
  if (payload.size() != expected * sizeof(float))
    throw Error(ErrorKind::SizeMismatch, "payload holds " + std::to_string(payload.size() / sizeof(float)) +
                                             " values, header declares " + std::to_string(expected));

  FrameMatrix data(t, Eigen::Index(h) * w * c);
  float* dst = data.data();
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, payload.data() + i * 4, 4);
    dst[i] = std::bit_cast<float>(to_little(bits));
  }
  return VideoCube(t, h, w, c, fps, std::move(data));
}

void write_cube(const VideoCube& cube, const fs::path& path) {
  const fs::path stem = cube_stem(path);
  const json header = {{"t", cube.frames()}, {"h", cube.height()}, {"w", cube.width()},
                       {"c", cube.channels()}, {"fps", cube.fps()}};
  std::string payload(std::size_t(cube.numel()) * 4, '\0');
  const float* src = cube.data().data();
  for (Eigen::Index i = 0; i < cube.numel(); ++i) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(src[i]));
    std::memcpy(payload.data() + i * 4, &bits, 4);
  }
  fs::path payload_path = stem;
  payload_path += ".f32";
  fs::path header_path = stem;
  header_path += ".json";
  write_text_atomic(payload_path, payload);
  write_text_atomic(header_path, header.dump(2) + "\n");
}

Signal read_signal(const fs::path& path) {
  const std::string text = slurp(path);
  if (path.extension() == ".json") {
    try {
      const json j = json::parse(text);
      return Signal(Eigen::Map<const Vector>(j.at("samples").get<std::vector<double>>().data(),
                                             Eigen::Index(j.at("samples").size())),
                    j.at("fs").get<double>());
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedHeader, std::string("signal json: ") + e.what());
    }
  }

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedHeader, "empty signal csv");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t_seconds,value")
    throw Error(ErrorKind::MalformedHeader, "signal csv header must be 't_seconds,value'");
  std::vector<double> ts, vs;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::MalformedHeader, "bad csv row: " + line);
    try {
      ts.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedHeader, "bad csv row: " + line);
    }
  }
  if (ts.size() < 2) throw Error(ErrorKind::InvalidArgument, "signal csv needs at least 2 rows");
  const double span = ts.back() - ts.front();
  if (!(span > 0.0)) throw Error(ErrorKind::MalformedHeader, "signal csv timestamps must increase");
  const double dt = span / double(ts.size() - 1);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (std::abs((ts[i] - ts[i - 1]) - dt) > 1e-3 * dt)
      throw Error(ErrorKind::MalformedHeader, "signal csv timestamps are not uniformly spaced");
  }
  return Signal(Eigen::Map<const Vector>(vs.data(), Eigen::Index(vs.size())), 1.0 / dt);
}

void write_signal(const Signal& s, const fs::path& path) {
  std::ostringstream out;
  out << std::setprecision(17);
  if (path.extension() == ".json") {
    json j = {{"fs", s.fs()},
              {"samples", std::vector<double>(s.samples().data(), s.samples().data() + s.size())}};
    out << j.dump() << "\n";
  } else {
    out << "t_seconds,value\n";
    for (Eigen::Index i = 0; i < s.size(); ++i) out << double(i) / s.fs() << ',' << s[i] << '\n';
  }
  write_text_atomic(path, out.str());
}

}  // namespace pulseforge::io
